"""Serialising evaluation reports and rendering the comparison table."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .baselines import PUBLISHED_REFERENCE_ROWS
from .metrics import format_percent
from .pipeline import BASELINE_LABELS

CSV_COLUMNS = [
    "mode", "run", "seed", "n_train", "n_test", "accuracy", "tp", "fn", "tn", "fp",
    "popcount", "hidden", "selected_genes",
    "gnb_mask_accuracy", "gnb_top_accuracy", "knn_mask_accuracy", "warnings",
]


def dumps(report: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_json(report: dict, path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(report: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for mode, entry in report["modes"].items():
            for r in entry["runs"]:
                cm = r["confusion"]
                b = r["baselines"]
                w.writerow([
                    mode, r["run"], r["seed"], r["n_train"], r["n_test"], repr(r["accuracy"]),
                    cm["tp"], cm["fn"], cm["tn"], cm["fp"], r["popcount"], r["hidden"],
                    ";".join(r["selected_gene_ids"]),
                    repr(b["gnb_mask"]["accuracy"]), repr(b["gnb_top"]["accuracy"]),
                    repr(b["knn_mask"]["accuracy"]), " | ".join(r["warnings"]),
                ])


def _fmt_features(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.1f}"


def table_rows(report: dict) -> list:
    """``(method, accuracy text, features text, note)`` rows, measured first."""
    rows = []
    for mode, entry in report["modes"].items():
        agg = entry["aggregate"]
        note = f"{mode}, sd {format_percent(agg['std'])}"
        rows.append(("MLP (proposed)", format_percent(agg["mean"]),
                     _fmt_features(entry["mean_popcount"]), note))
        for key, label in BASELINE_LABELS.items():
            b = entry["baselines"][key]
            rows.append((label, format_percent(b["aggregate"]["mean"]),
                         _fmt_features(b["mean_features"]), mode))
    for method, acc, n in PUBLISHED_REFERENCE_ROWS:
        rows.append((method, format_percent(acc), str(n), "(paper-reported)"))
    return rows


def render_table(report: dict) -> str:
    header = ("Method", "Accuracy", "# Feature", "")
    rows = [header] + table_rows(report)
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for r in rows:
        cells = [r[i].ljust(widths[i]) for i in range(3)] + [r[3]]
        lines.append("  ".join(cells).rstrip())
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"
