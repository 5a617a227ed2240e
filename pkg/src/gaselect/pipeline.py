"""Wrapper gene selection (GA + inner-CV MLP) and the repeated hold-out protocol.

Two ways of combining selection with evaluation are supported:

``full-data-selection``
    one mask is selected on the whole dataset and reused by every hold-out
    run. Test samples take part in choosing the genes, so the resulting
    accuracy is optimistically biased.
``nested-selection``
    each run selects its mask, tunes the hidden layer and fits the scaling
    from its own training portion only.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import baselines, mlp
from .dataset import (
    NORMAL,
    TUMOR,
    ExpressionDataset,
    apply_mask,
    as_mask,
    holdout_indices,
    scale_features,
    stratified_fold_labels,
)
from .errors import ConfigError, DegenerateMaskError, StateError
from .ga import CachedFitness, GaConfig, GaTrace, chromosome_digest, evolve
from .metrics import ConfusionMatrix, accuracy, aggregate, confusion

FULL = "full-data-selection"
NESTED = "nested-selection"
BIAS_MODES = (FULL, NESTED)
REPORT_SCHEMA = 1

# seed-derivation tags; each stream of randomness gets its own
_FOLDS, _FIT, _GA, _TUNE, _RUN, _FINAL, _GLOBAL = range(7)


def derive_seed(master: int, *keys: int) -> int:
    """Independent 63-bit seed for the stream identified by ``keys``."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class PipelineConfig:
    ga: GaConfig = field(default_factory=GaConfig)
    mlp_train: mlp.TrainConfig = field(default_factory=mlp.TrainConfig)
    hidden_sweep: tuple = (3, 15)  # inclusive
    fitness_hidden: int = 8
    inner_folds: int = 3
    parsimony_weight: float = 0.01
    eval_runs: int = 20
    train_fraction: float = 0.9
    bias_modes: tuple = (FULL, NESTED)
    knn_k: int = 3
    top_genes: int = 3
    seed: int = 42

    def __post_init__(self):
        lo, hi = self.hidden_sweep
        if not 1 <= lo <= hi:
            raise ConfigError(f"hidden_sweep must satisfy 1 <= lo <= hi, got {self.hidden_sweep}")
        if self.inner_folds < 2:
            raise ConfigError("inner_folds must be at least 2")
        if self.eval_runs < 1:
            raise ConfigError("eval_runs must be at least 1")
        if self.parsimony_weight < 0:
            raise ConfigError("parsimony_weight must be non-negative")
        if self.fitness_hidden < 1:
            raise ConfigError("fitness_hidden must be at least 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        bad = [m for m in self.bias_modes if m not in BIAS_MODES]
        if bad or not self.bias_modes:
            raise ConfigError(f"bias modes must be drawn from {BIAS_MODES}, got {self.bias_modes}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sweep"] = list(self.hidden_sweep)
        d["bias_modes"] = list(self.bias_modes)
        return d


@dataclass
class SelectionResult:
    mask: np.ndarray
    selected_gene_ids: list
    fitness: float
    trace: GaTrace
    config: dict
    fitness_evaluations: int = 0

    @property
    def popcount(self) -> int:
        return int(self.mask.sum())

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "selected_gene_ids": list(self.selected_gene_ids),
            "selected_indices": np.flatnonzero(self.mask).tolist(),
            "n_genes": int(self.mask.size),
            "popcount": self.popcount,
            "fitness": self.fitness,
            "fitness_evaluations": self.fitness_evaluations,
            "trace": self.trace.to_dict(),
            "config": self.config,
        }


# --------------------------------------------------------------------------
# inner cross-validation


def _check_training_data(ds: ExpressionDataset):
    if not ds.scaled:
        raise StateError("selection works on data scaled to [-1, 1]")
    if not ds.is_labeled:
        raise StateError("selection needs labeled data")


def _cv_accuracy(X, y, folds, k, n_hidden, train_cfg, seed_of_fold) -> float:
    """Mean per-fold accuracy of MLPs trained on the other folds."""
    accs = []
    layout = mlp.MlpLayout(X.shape[1], n_hidden)
    for f in range(k):
        test = folds == f
        s = seed_of_fold(f)
        model = mlp.init_model(layout, s)
        model, _ = mlp.train_arrays(model, X[~test], y[~test], replace(train_cfg, seed=s))
        pred = mlp.predict_batch(model, X[test])
        accs.append(float(np.mean(pred == y[test])))
    return float(np.mean(accs))


def inner_folds(ds: ExpressionDataset, cfg: PipelineConfig) -> np.ndarray:
    """Fold labels used by every fitness and tuning evaluation for ``cfg.seed``."""
    return stratified_fold_labels(ds.labels, cfg.inner_folds, derive_seed(cfg.seed, _FOLDS))


class WrapperFitness:
    """Mask -> inner-CV MLP accuracy minus ``parsimony_weight * popcount / n_genes``.

    Only the dataset handed to the constructor is ever read, which is what
    makes nested selection leak-free.
    """

    def __init__(self, ds: ExpressionDataset, cfg: PipelineConfig):
        _check_training_data(ds)
        self.X = np.ascontiguousarray(ds.values)
        self.y = np.asarray(ds.labels)
        self.cfg = cfg
        self.folds = inner_folds(ds, cfg)

    def accuracy(self, mask: np.ndarray) -> float:
        digest = chromosome_digest(mask)
        Xm = np.ascontiguousarray(self.X[:, mask])
        return _cv_accuracy(
            Xm, self.y, self.folds, self.cfg.inner_folds, self.cfg.fitness_hidden,
            self.cfg.mlp_train, lambda f: derive_seed(self.cfg.seed, _FIT, digest % 2**62, f),
        )

    def __call__(self, mask) -> float:
        mask = as_mask(mask, self.X.shape[1])
        pc = int(mask.sum())
        if pc == 0:
            raise DegenerateMaskError("mask selects no genes")
        penalty = self.cfg.parsimony_weight * pc / mask.size
        return self.accuracy(mask) - penalty


def wrapper_fitness(mask, ds: ExpressionDataset, cfg: PipelineConfig) -> float:
    return WrapperFitness(ds, cfg)(mask)


def run_selection(ds: ExpressionDataset, cfg: PipelineConfig) -> SelectionResult:
    """Run the GA with the wrapper fitness over ``ds`` and return the best mask."""
    fitness = CachedFitness(WrapperFitness(ds, cfg))
    ga_cfg = cfg.ga.resolved(ds.n_genes, seed=derive_seed(cfg.seed, _GA))
    best, trace = evolve(ga_cfg, fitness)
    return SelectionResult(
        mask=best,
        selected_gene_ids=[ds.gene_ids[i] for i in np.flatnonzero(best)],
        fitness=fitness(best),
        trace=trace,
        config={**cfg.to_dict(), "ga_resolved": ga_cfg.to_dict()},
        fitness_evaluations=fitness.calls,
    )


def tune_hidden(ds_train: ExpressionDataset, mask, cfg: PipelineConfig) -> int:
    """Hidden size in the sweep with the best inner-CV accuracy; ties to the smallest."""
    _check_training_data(ds_train)
    mask = as_mask(mask, ds_train.n_genes)
    lo, hi = cfg.hidden_sweep
    if lo == hi:
        return lo
    X = np.ascontiguousarray(ds_train.values[:, mask])
    y = np.asarray(ds_train.labels)
    folds = inner_folds(ds_train, cfg)
    best_h, best_acc = lo, -1.0
    for h in range(lo, hi + 1):
        acc = _cv_accuracy(
            X, y, folds, cfg.inner_folds, h, cfg.mlp_train,
            lambda f: derive_seed(cfg.seed, _TUNE, h, f),
        )
        if acc > best_acc:
            best_h, best_acc = h, acc
    return best_h


# --------------------------------------------------------------------------
# evaluation protocol


@dataclass
class RunRecord:
    run: int
    seed: int
    n_train: int
    n_test: int
    accuracy: float
    confusion: ConfusionMatrix
    popcount: int
    hidden: int
    selected_gene_ids: list
    baselines: dict
    warnings: list

    def to_dict(self) -> dict:
        d = asdict(self)
        d["confusion"] = self.confusion.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["confusion"] = ConfusionMatrix.from_dict(d["confusion"])
        return cls(**d)


def plan_splits(ds: ExpressionDataset, cfg: PipelineConfig):
    """``(run_seed, train_idx, test_idx, warnings)`` for every evaluation run."""
    plans = []
    for r in range(cfg.eval_runs):
        seed = derive_seed(cfg.seed, _RUN, r)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            tr, te = holdout_indices(ds, cfg.train_fraction, seed)
        plans.append((seed, tr, te, [str(w.message) for w in caught]))
    return plans


def _score(pred, y) -> dict:
    cm = confusion(pred, y)
    return {"accuracy": accuracy(cm), "confusion": cm.to_dict()}


def evaluate_run(
    ds: ExpressionDataset,
    cfg: PipelineConfig,
    run: int,
    plan,
    mode: str,
    global_selection: Optional[SelectionResult] = None,
    selection_data: Optional[ExpressionDataset] = None,
) -> tuple[RunRecord, np.ndarray]:
    """Score one hold-out run; returns the record and the mask it used.

    ``ds`` must be unscaled. Scaling is fitted on the training rows only and
    applied unclamped to the test rows.
    """
    seed, train_idx, test_idx, notes = plan
    notes = list(notes)
    raw_train, raw_test = ds.subset(train_idx), ds.subset(test_idx)
    train, params = scale_features(raw_train)
    test = params.apply(raw_test)
    run_cfg = replace(cfg, seed=seed)

    if mode == NESTED:
        mask = run_selection(train, run_cfg).mask
        top_source = train
    elif mode == FULL:
        if global_selection is None or selection_data is None:
            raise StateError("full-data-selection needs the globally selected mask")
        mask = global_selection.mask
        top_source = selection_data
    else:
        raise ConfigError(f"unknown bias mode {mode!r}")

    if len(np.unique(test.labels)) < 2:
        notes.append("test split contains a single class")

    hidden = tune_hidden(train, mask, run_cfg)
    Xtr, Xte = train.values[:, mask], test.values[:, mask]
    fs = derive_seed(seed, _FINAL)
    model = mlp.init_model(mlp.MlpLayout(int(mask.sum()), hidden), fs)
    model, _ = mlp.train_arrays(model, Xtr, train.labels, replace(cfg.mlp_train, seed=fs))
    cm = confusion(mlp.predict_batch(model, Xte), test.labels)

    top = baselines.top_genes_mask(top_source.values, top_source.labels, cfg.top_genes)
    gnb = baselines.gnb_fit_arrays(Xtr, train.labels)
    gnb_top = baselines.gnb_fit_arrays(train.values[:, top], train.labels)
    k = min(cfg.knn_k, Xtr.shape[0] - (1 - Xtr.shape[0] % 2))
    knn = baselines.KnnModel(Xtr, np.asarray(train.labels), k)
    base = {
        "gnb_mask": {
            **_score(baselines.gnb_predict_batch(gnb, Xte), test.labels),
            "n_features": int(mask.sum()),
        },
        "gnb_top": {
            **_score(baselines.gnb_predict_batch(gnb_top, test.values[:, top]), test.labels),
            "n_features": int(top.sum()),
        },
        "knn_mask": {
            **_score(baselines.knn_predict_batch(knn, Xte), test.labels),
            "n_features": int(mask.sum()),
        },
    }
    rec = RunRecord(
        run=run,
        seed=seed,
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
        accuracy=accuracy(cm),
        confusion=cm,
        popcount=int(mask.sum()),
        hidden=hidden,
        selected_gene_ids=[ds.gene_ids[i] for i in np.flatnonzero(mask)],
        baselines=base,
        warnings=notes,
    )
    return rec, mask


BASELINE_LABELS = {
    "gnb_mask": "GNB (GA genes)",
    "gnb_top": "GNB (top genes)",
    "knn_mask": "kNN (GA genes)",
}


def summarize_mode(records: Sequence[RunRecord]) -> dict:
    out = {
        "aggregate": aggregate(r.accuracy for r in records).to_dict(),
        "mean_popcount": float(np.mean([r.popcount for r in records])),
        "baselines": {},
    }
    for name in BASELINE_LABELS:
        rows = [r.baselines[name] for r in records]
        out["baselines"][name] = {
            "aggregate": aggregate(b["accuracy"] for b in rows).to_dict(),
            "mean_features": float(np.mean([b["n_features"] for b in rows])),
        }
    return out


def _unscaled(ds: ExpressionDataset) -> ExpressionDataset:
    if not ds.is_labeled:
        raise StateError("evaluation needs labeled data")
    return ExpressionDataset(ds.values, ds.labels, ds.gene_ids, False)


def _evaluate_job(args):
    return evaluate_run(*args)[0]


def evaluate_protocol(ds: ExpressionDataset, cfg: PipelineConfig, jobs: int = 1) -> dict:
    """Repeated stratified hold-out evaluation for every mode in ``cfg.bias_modes``.

    Returns the report as a JSON-ready dict. With ``jobs > 1`` runs execute in
    worker processes; records are still assembled in run order, so the
    result is identical to a sequential run.
    """
    ds = _unscaled(ds)
    plans = plan_splits(ds, cfg)
    n_tumor, n_normal = ds.class_counts()
    report = {
        "schema": REPORT_SCHEMA,
        "config": cfg.to_dict(),
        "dataset": {
            "n_samples": ds.n_samples,
            "n_genes": ds.n_genes,
            "n_tumor": n_tumor,
            "n_normal": n_normal,
        },
        "modes": {},
        "reference": [
            {"method": m, "accuracy": a, "n_features": n, "source": "paper-reported"}
            for m, a, n in baselines.PUBLISHED_REFERENCE_ROWS
        ],
    }
    for mode in cfg.bias_modes:
        selection = scaled_full = None
        if mode == FULL:
            scaled_full, _ = scale_features(ds)
            selection = run_selection(scaled_full, replace(cfg, seed=derive_seed(cfg.seed, _GLOBAL)))
        jobs_args = [(ds, cfg, r, plans[r], mode, selection, scaled_full) for r in range(cfg.eval_runs)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                records = list(pool.map(_evaluate_job, jobs_args))
        else:
            records = [_evaluate_job(a) for a in jobs_args]
        entry = {"runs": [r.to_dict() for r in records], **summarize_mode(records)}
        if selection is not None:
            entry["selection"] = {
                k: v for k, v in selection.to_dict().items() if k not in ("config", "schema")
            }
        report["modes"][mode] = entry
    return report
