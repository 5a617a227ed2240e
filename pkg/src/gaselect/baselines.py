"""Reference classifiers for the comparison table: Gaussian naive Bayes and kNN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NORMAL, TUMOR, ExpressionDataset
from .errors import ConfigError, DimensionError

VAR_FLOOR = 1e-9

# Published figures reproduced verbatim in every comparison table:
# (method, accuracy fraction, number of features).
PUBLISHED_REFERENCE_ROWS = (
    ("SVM", 0.9355, 2),
    ("Naive Bayes", 0.9355, 3),
    ("Proposed GA+MLP", 0.9987, 2),
)

CLASSES = (TUMOR, NORMAL)


@dataclass(frozen=True, eq=False)
class GnbModel:
    means: np.ndarray  # (2, n_genes)
    variances: np.ndarray  # (2, n_genes)
    priors: np.ndarray  # (2,)

    @property
    def n_genes(self) -> int:
        return self.means.shape[1]


def gnb_fit(ds: ExpressionDataset) -> GnbModel:
    return gnb_fit_arrays(ds.values, ds.labels)


def gnb_fit_arrays(X: np.ndarray, y: np.ndarray) -> GnbModel:
    means, variances, priors = [], [], []
    for cls in CLASSES:
        rows = X[y == cls]
        if rows.shape[0] == 0:
            raise ConfigError("naive Bayes needs samples from both classes")
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), VAR_FLOOR))
        priors.append(rows.shape[0] / X.shape[0])
    return GnbModel(np.array(means), np.array(variances), np.array(priors))


def gnb_log_scores(model: GnbModel, X) -> np.ndarray:
    """Per-class ``log prior + sum_genes log N(x | mean, var)``; shape (n, 2)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_genes:
        raise DimensionError(f"input has {X.shape[1]} genes, model has {model.n_genes}")
    out = np.empty((X.shape[0], 2))
    for k in CLASSES:
        var = model.variances[k]
        ll = -0.5 * (np.log(2 * np.pi * var) + (X - model.means[k]) ** 2 / var)
        out[:, k] = np.log(model.priors[k]) + ll.sum(axis=1)
    return out


def gnb_predict(model: GnbModel, x) -> int:
    s = gnb_log_scores(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
    return TUMOR if s[TUMOR] >= s[NORMAL] else NORMAL


def gnb_predict_batch(model: GnbModel, X) -> np.ndarray:
    s = gnb_log_scores(model, X)
    return np.where(s[:, TUMOR] >= s[:, NORMAL], TUMOR, NORMAL)


@dataclass(frozen=True, eq=False)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 3

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ConfigError(f"k must be a positive odd integer, got {self.k}")
        if self.k > self.X.shape[0]:
            raise ConfigError(f"k={self.k} exceeds {self.X.shape[0]} training samples")


def knn_fit(ds: ExpressionDataset, k: int = 3) -> KnnModel:
    return KnnModel(np.asarray(ds.values, dtype=np.float64), np.asarray(ds.labels), k)


def knn_predict_batch(model: KnnModel, Q) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if Q.shape[1] != model.X.shape[1]:
        raise DimensionError(f"query has {Q.shape[1]} genes, model has {model.X.shape[1]}")
    d2 = ((Q[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=2)
    # stable sort: equal distances resolved by lower training index
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
    votes_normal = (model.y[nearest] == NORMAL).sum(axis=1)
    return np.where(2 * votes_normal > model.k, NORMAL, TUMOR)


def knn_predict(model: KnnModel, x) -> int:
    return int(knn_predict_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def class_separation(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Signal-to-noise score ``|mu_T - mu_N| / (sd_T + sd_N)`` per gene."""
    a, b = X[y == TUMOR], X[y == NORMAL]
    den = a.std(axis=0) + b.std(axis=0)
    num = np.abs(a.mean(axis=0) - b.mean(axis=0))
    return np.divide(num, den, out=np.where(num > 0, np.inf, 0.0), where=den > 0)


def top_genes_mask(X: np.ndarray, y: np.ndarray, n: int = 3) -> np.ndarray:
    """Mask of the ``n`` best-separating genes; ties go to the lower index."""
    score = class_separation(X, y)
    order = np.argsort(-score, kind="stable")[: min(n, score.size)]
    mask = np.zeros(score.size, dtype=bool)
    mask[order] = True
    return mask
