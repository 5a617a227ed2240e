"""Loading, validation, scaling, masking and splitting of expression data.

Matrices are always held samples-by-genes. Labels are integer codes with
``TUMOR = 0`` and ``NORMAL = 1`` so that a label doubles as the index of the
network output node that represents it.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateMaskError,
    DimensionError,
    EmptyInputError,
    FormatError,
    ParseError,
    StateError,
    StratificationWarning,
)

TUMOR = 0
NORMAL = 1
LABEL_NAMES = ("Tumor", "Normal")

SAMPLES_BY_GENES = "samples-by-genes"
GENES_BY_SAMPLES = "genes-by-samples"
ORIENTATIONS = (SAMPLES_BY_GENES, GENES_BY_SAMPLES)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ExpressionDataset:
    """Immutable samples-by-genes expression matrix with optional labels."""

    values: np.ndarray
    labels: Optional[np.ndarray] = None
    gene_ids: tuple = ()
    scaled: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionError(f"expected a 2-D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ParseError("matrix contains NaN or infinite values")
        object.__setattr__(self, "values", _readonly(values))

        gene_ids = tuple(self.gene_ids) if self.gene_ids else default_gene_ids(values.shape[1])
        if len(gene_ids) != values.shape[1]:
            raise DimensionError(
                f"{len(gene_ids)} gene ids for {values.shape[1]} matrix columns"
            )
        object.__setattr__(self, "gene_ids", gene_ids)

        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise AlignmentError(
                    f"{labels.size} labels for {values.shape[0]} samples"
                )
            if labels.size and not np.all((labels == TUMOR) | (labels == NORMAL)):
                raise ParseError("labels must be TUMOR (0) or NORMAL (1)")
            object.__setattr__(self, "labels", _readonly(labels))

        if self.scaled and values.size and (values.min() < -1.0 or values.max() > 1.0):
            raise StateError("dataset flagged as scaled has values outside [-1, 1]")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def class_counts(self) -> tuple[int, int]:
        """Return ``(n_tumor, n_normal)``."""
        self._require_labels()
        return int(np.sum(self.labels == TUMOR)), int(np.sum(self.labels == NORMAL))

    def with_labels(self, labels) -> "ExpressionDataset":
        return ExpressionDataset(self.values, labels, self.gene_ids, self.scaled)

    def subset(self, rows) -> "ExpressionDataset":
        """Rows selected by an index array, order preserved."""
        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else self.labels[rows]
        return ExpressionDataset(self.values[rows], labels, self.gene_ids, self.scaled)

    def _require_labels(self):
        if self.labels is None:
            raise StateError("dataset has no labels")


def default_gene_ids(n: int) -> tuple:
    return tuple(f"g{i}" for i in range(n))


# --------------------------------------------------------------------------
# ingestion

_WS = re.compile(r"[ \t]+")


def _read_rows(path) -> list[tuple[int, list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise EmptyInputError(f"{path}: file is empty")
    comma = any("," in ln for _, ln in lines)
    split = (lambda s: [t.strip() for t in s.split(",")]) if comma else _WS.split
    return [(n, split(ln)) for n, ln in lines]


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def load_matrix(path, orientation: str = SAMPLES_BY_GENES) -> ExpressionDataset:
    """Read a delimited numeric matrix into an unlabeled dataset.

    Fields may be separated by commas or by runs of spaces/tabs; the choice
    is made once per file. A first row made entirely of non-numeric tokens is
    treated as a header: gene identifiers for ``samples-by-genes`` files,
    sample identifiers (discarded) for ``genes-by-samples`` files.
    """
    if orientation not in ORIENTATIONS:
        raise ConfigError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    rows = _read_rows(path)

    header = None
    first_line, first = rows[0]
    if not any(_is_number(t) for t in first):
        header = first
        rows = rows[1:]
        if not rows:
            raise EmptyInputError(f"{path}: header row but no data")

    width = len(rows[0][1])
    data = np.empty((len(rows), width), dtype=np.float64)
    for r, (line_no, toks) in enumerate(rows):
        if len(toks) != width:
            raise FormatError(
                f"{path}: row {r} (line {line_no}) has {len(toks)} fields, expected {width}"
            )
        for c, tok in enumerate(toks):
            try:
                data[r, c] = float(tok)
            except ValueError:
                raise ParseError(
                    f"{path}: line {line_no}, column {c + 1}: non-numeric token {tok!r}"
                ) from None
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: matrix contains NaN or infinite values")

    gene_ids = ()
    if orientation == GENES_BY_SAMPLES:
        data = data.T
    elif header is not None:
        if len(header) != width:
            raise FormatError(
                f"{path}: header has {len(header)} fields, rows have {width}"
            )
        gene_ids = tuple(header)
    return ExpressionDataset(data, None, gene_ids, False)


def load_labels(path, convention: str = "sign", n_samples: Optional[int] = None) -> np.ndarray:
    """Read one class label per line.

    ``sign``: negative integer means Tumor, positive means Normal.
    ``token``: case-insensitive ``tumor`` / ``normal``.
    """
    if convention not in ("sign", "token"):
        raise ConfigError(f"label convention must be 'sign' or 'token', got {convention!r}")
    text = Path(path).read_text(encoding="utf-8")
    entries = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not entries:
        raise EmptyInputError(f"{path}: label file is empty")

    labels = []
    for line_no, tok in entries:
        if convention == "sign":
            try:
                v = int(tok)
            except ValueError:
                try:
                    f = float(tok)
                except ValueError:
                    raise ParseError(f"{path}: line {line_no}: not an integer: {tok!r}") from None
                if not f.is_integer():
                    raise ParseError(f"{path}: line {line_no}: not an integer: {tok!r}")
                v = int(f)
            if v == 0:
                raise ParseError(f"{path}: line {line_no}: zero has no class under sign convention")
            labels.append(TUMOR if v < 0 else NORMAL)
        else:
            low = tok.lower()
            if low == "tumor":
                labels.append(TUMOR)
            elif low == "normal":
                labels.append(NORMAL)
            else:
                raise ParseError(f"{path}: line {line_no}: unknown label {tok!r}")

    if n_samples is not None and len(labels) != n_samples:
        raise AlignmentError(f"{path}: {len(labels)} labels for {n_samples} samples")
    return np.asarray(labels, dtype=np.int64)


def load_canonical(path) -> ExpressionDataset:
    """Read the combined CSV format: header ``label,g0,g1,...``, one sample per row."""
    rows = _read_rows(path)
    (_, header), body = rows[0], rows[1:]
    if not header or header[0].lower() != "label":
        raise FormatError(f"{path}: first header field must be 'label'")
    if not body:
        raise EmptyInputError(f"{path}: no samples")
    width = len(header)
    labels = []
    data = np.empty((len(body), width - 1), dtype=np.float64)
    for r, (line_no, toks) in enumerate(body):
        if len(toks) != width:
            raise FormatError(
                f"{path}: row {r} (line {line_no}) has {len(toks)} fields, expected {width}"
            )
        low = toks[0].lower()
        if low not in ("tumor", "normal"):
            raise ParseError(f"{path}: line {line_no}, column 1: unknown label {toks[0]!r}")
        labels.append(TUMOR if low == "tumor" else NORMAL)
        for c, tok in enumerate(toks[1:]):
            try:
                data[r, c] = float(tok)
            except ValueError:
                raise ParseError(
                    f"{path}: line {line_no}, column {c + 2}: non-numeric token {tok!r}"
                ) from None
    return ExpressionDataset(data, labels, tuple(header[1:]), False)


def write_canonical(ds: ExpressionDataset, path) -> None:
    ds._require_labels()
    out = ["label," + ",".join(ds.gene_ids)]
    for row, lab in zip(ds.values, ds.labels):
        out.append(LABEL_NAMES[lab] + "," + ",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# scaling


@dataclass(frozen=True, eq=False)
class ScalingParams:
    """Per-gene min/max learned on a training set."""

    mins: np.ndarray
    maxs: np.ndarray

    def apply(self, ds: ExpressionDataset, clamp: bool = False) -> ExpressionDataset:
        """Map ``ds`` with these parameters.

        Held-out data can land outside [-1, 1]; such a dataset keeps
        ``scaled=False`` unless ``clamp`` is set.
        """
        if ds.scaled:
            raise StateError("dataset is already scaled")
        if ds.n_genes != self.mins.size:
            raise DimensionError(f"{ds.n_genes} genes, scaling fitted on {self.mins.size}")
        span = self.maxs - self.mins
        const = span == 0
        safe = np.where(const, 1.0, span)
        out = 2.0 * (ds.values - self.mins) / safe - 1.0
        out[:, const] = 0.0
        if clamp:
            out = np.clip(out, -1.0, 1.0)
        in_range = bool(out.size == 0 or (out.min() >= -1.0 and out.max() <= 1.0))
        return ExpressionDataset(out, ds.labels, ds.gene_ids, in_range)


def fit_scaling(ds: ExpressionDataset) -> ScalingParams:
    if ds.n_samples == 0:
        raise EmptyInputError("cannot fit scaling on an empty dataset")
    return ScalingParams(_readonly(ds.values.min(axis=0)), _readonly(ds.values.max(axis=0)))


def scale_features(ds: ExpressionDataset) -> tuple[ExpressionDataset, ScalingParams]:
    """Min-max scale every gene column to [-1, 1]; constant columns become 0.

    Returns the scaled dataset and the parameters, so held-out samples can be
    mapped with the training-set min/max.
    """
    if ds.scaled:
        raise StateError("dataset is already scaled")
    params = fit_scaling(ds)
    scaled = params.apply(ds)
    # rounding can leave endpoints a hair outside the interval
    vals = np.clip(scaled.values, -1.0, 1.0)
    return ExpressionDataset(vals, ds.labels, ds.gene_ids, True), params


# --------------------------------------------------------------------------
# masks


def as_mask(bits, n_genes: Optional[int] = None) -> np.ndarray:
    mask = np.asarray(bits).astype(bool)
    if mask.ndim != 1:
        raise DimensionError("mask must be one-dimensional")
    if n_genes is not None and mask.size != n_genes:
        raise DimensionError(f"mask length {mask.size} != n_genes {n_genes}")
    return mask


def apply_mask(ds: ExpressionDataset, mask) -> ExpressionDataset:
    """Keep exactly the columns whose mask bit is set."""
    mask = as_mask(mask, ds.n_genes)
    if not mask.any():
        raise DegenerateMaskError("mask selects no genes")
    cols = np.flatnonzero(mask)
    gene_ids = tuple(ds.gene_ids[i] for i in cols)
    return ExpressionDataset(ds.values[:, cols], ds.labels, gene_ids, ds.scaled)


# --------------------------------------------------------------------------
# splitting


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def holdout_split(
    ds: ExpressionDataset, train_fraction: float, seed: int
) -> tuple[ExpressionDataset, ExpressionDataset]:
    """Stratified train/test split; per class ``round(train_fraction * count)`` go to train."""
    train_idx, test_idx = holdout_indices(ds, train_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


def holdout_indices(ds: ExpressionDataset, train_fraction: float, seed: int):
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    ds._require_labels()
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (TUMOR, NORMAL):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size == 0:
            raise ConfigError(f"class {LABEL_NAMES[cls]} has no samples")
        idx = rng.permutation(idx)
        n_train = _round_half_up(train_fraction * idx.size)
        if n_train >= idx.size:
            warnings.warn(
                f"class {LABEL_NAMES[cls]} has no test samples after rounding",
                StratificationWarning,
                stacklevel=3,
            )
        train.append(idx[:n_train])
        test.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    folds: np.ndarray = field()
    k: int = 0

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)


def stratified_kfold(ds: ExpressionDataset, k: int, seed: int) -> FoldAssignment:
    """Assign each sample to one of ``k`` folds, dealing each class round-robin.

    The deal continues across classes, so fold sizes differ by at most one
    and per-class fold counts are within one of ``count / k``.
    """
    ds._require_labels()
    return FoldAssignment(stratified_fold_labels(ds.labels, k, seed), k)


def stratified_fold_labels(labels: Sequence[int], k: int, seed: int) -> np.ndarray:
    labels = np.asarray(labels)
    n = labels.size
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if k > n:
        raise ConfigError(f"k={k} exceeds the number of samples ({n})")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    pos = 0
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        folds[idx] = (pos + np.arange(idx.size)) % k
        pos = (pos + idx.size) % k
    return folds
