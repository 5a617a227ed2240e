"""Command-line entry point: ``gaselect {ingest,select,evaluate,report}``."""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import BIAS_MODE_FLAGS, build_pipeline_config, load_config
from .dataset import (
    GENES_BY_SAMPLES,
    ORIENTATIONS,
    SAMPLES_BY_GENES,
    apply_mask,
    load_canonical,
    load_labels,
    load_matrix,
    scale_features,
    write_canonical,
)
from .errors import GaSelectError
from .pipeline import evaluate_protocol, run_selection
from .report import dumps, read_json, render_table, write_csv

DEFAULT_SEED = 42
EXIT_ERROR = 2


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _timestamp():
    # wall-clock time would break byte-identical reports; honour SOURCE_DATE_EPOCH only
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


def make_manifest(args, config_values: dict, inputs: dict, seed: int) -> dict:
    return {
        "tool": "gaselect",
        "version": __version__,
        "config_path": args.config,
        "config_values": config_values,
        "seed": seed,
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)} for name, p in inputs.items()},
        "timestamp": _timestamp(),
    }


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    ds = load_matrix(args.matrix, args.orientation)
    labels = load_labels(args.labels, args.label_convention, n_samples=ds.n_samples)
    ds = ds.with_labels(labels)
    out = Path(args.output) if args.output else _out_dir(args) / "dataset.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_canonical(ds, out)
    n_t, n_n = ds.class_counts()
    print(f"{ds.n_samples} samples, {ds.n_genes} genes, {n_t} Tumor / {n_n} Normal")
    print(f"wrote {out}")
    return 0


def _pipeline_config(args, **extra):
    values = load_config(args.config)
    seed = args.seed if args.seed is not None else values.get("pipeline", {}).get("seed", DEFAULT_SEED)
    cfg = build_pipeline_config(values, seed=seed, **extra)
    return cfg, values


def cmd_select(args) -> int:
    cfg, values = _pipeline_config(
        args, generations=args.generations, population_size=args.population
    )
    ds = load_canonical(args.dataset)
    scaled, _ = scale_features(ds)
    result = run_selection(scaled, cfg)
    out = _out_dir(args)
    doc = result.to_dict()
    doc["manifest"] = make_manifest(args, values, {"dataset": args.dataset}, cfg.seed)
    (out / "selected_genes.txt").write_text(
        "".join(g + "\n" for g in result.selected_gene_ids), encoding="utf-8"
    )
    result.trace.write_csv(out / "ga_trace.csv")
    (out / "selection.json").write_text(dumps(doc), encoding="utf-8")
    print(
        f"selected {result.popcount} of {ds.n_genes} genes "
        f"(fitness {result.fitness:.4f}): {', '.join(result.selected_gene_ids)}"
    )
    return 0


def cmd_evaluate(args) -> int:
    cfg, values = _pipeline_config(
        args,
        eval_runs=args.runs,
        bias_mode=args.bias_mode,
        generations=args.generations,
        population_size=args.population,
    )
    ds = load_canonical(args.dataset)
    report = evaluate_protocol(ds, cfg, jobs=args.jobs)
    report["manifest"] = make_manifest(args, values, {"dataset": args.dataset}, cfg.seed)
    out = _out_dir(args)
    (out / "report.json").write_text(dumps(report), encoding="utf-8")
    write_csv(report, out / "report.csv")
    sys.stdout.write(render_table(report))
    return 0


def cmd_report(args) -> int:
    sys.stdout.write(render_table(read_json(args.report)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gaselect",
        description="GA wrapper gene selection with an MLP classifier for two-class expression data.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=".", help="directory for output files")

    def run_opts(sp):
        sp.add_argument("dataset", help="canonical CSV written by 'ingest'")
        sp.add_argument("--config", help="key = value config file with [ga]/[mlp]/[pipeline]")
        sp.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
        sp.add_argument("--generations", type=int, help="override [ga] generations")
        sp.add_argument("--population", type=int, help="override [ga] population_size")
        common(sp)

    sp = sub.add_parser("ingest", help="convert a matrix + label file to the canonical CSV")
    sp.add_argument("matrix")
    sp.add_argument("labels")
    sp.add_argument("--orientation", choices=ORIENTATIONS, default=SAMPLES_BY_GENES)
    sp.add_argument("--label-convention", choices=("sign", "token"), default="sign")
    sp.add_argument("-o", "--output", help="output file (default OUT_DIR/dataset.csv)")
    common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("select", help="run GA gene selection on the whole dataset")
    run_opts(sp)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("evaluate", help="repeated 90/10 hold-out evaluation with baselines")
    run_opts(sp)
    sp.add_argument("--runs", type=int, help="number of hold-out runs (default 20)")
    sp.add_argument("--bias-mode", choices=sorted(BIAS_MODE_FLAGS), help="default both")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for runs")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("report", help="re-render the comparison table from report.json")
    sp.add_argument("report")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GaSelectError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
