"""Synthetic expression data with known informative genes, for tests and demos."""

from __future__ import annotations

import numpy as np

from .dataset import NORMAL, TUMOR, ExpressionDataset


def make_separable(
    n_genes: int = 100,
    n_tumor: int = 40,
    n_normal: int = 22,
    informative: int = 0,
    gap: float = 1.0,
    seed: int = 0,
) -> ExpressionDataset:
    """Gaussian noise genes plus one gene that splits the classes with a margin.

    Tumor samples draw the informative gene from ``U(-2, -gap/2)`` and Normal
    samples from ``U(gap/2, 2)``; all other genes are ``N(0, 1)`` for both
    classes. Sample order is shuffled.
    """
    rng = np.random.default_rng(seed)
    n = n_tumor + n_normal
    labels = np.array([TUMOR] * n_tumor + [NORMAL] * n_normal)
    labels = labels[rng.permutation(n)]
    X = rng.normal(size=(n, n_genes))
    t = labels == TUMOR
    X[t, informative] = rng.uniform(-2.0, -gap / 2, size=int(t.sum()))
    X[~t, informative] = rng.uniform(gap / 2, 2.0, size=int((~t).sum()))
    return ExpressionDataset(X, labels)


def make_colon_like(
    n_genes: int = 2000,
    n_tumor: int = 40,
    n_normal: int = 22,
    n_informative: int = 20,
    effect: float = 1.5,
    seed: int = 0,
) -> ExpressionDataset:
    """Positive, right-skewed intensities shaped like the public colon matrix.

    ``n_informative`` genes (the first ones) carry a class shift of
    ``effect`` standard deviations on the log scale; none separates the
    classes perfectly on its own.
    """
    rng = np.random.default_rng(seed)
    n = n_tumor + n_normal
    labels = np.array([TUMOR] * n_tumor + [NORMAL] * n_normal)
    labels = labels[rng.permutation(n)]
    base = rng.normal(6.0, 1.5, size=n_genes)
    log_x = base + rng.normal(0.0, 0.6, size=(n, n_genes))
    sign = rng.choice([-1.0, 1.0], size=n_informative)
    log_x[:, :n_informative] += np.outer(labels == TUMOR, sign * effect * 0.6)
    return ExpressionDataset(np.exp(log_x), labels)
