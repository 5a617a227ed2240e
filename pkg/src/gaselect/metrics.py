"""Confusion counts, accuracy and run aggregation. Tumor is the positive class."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .dataset import NORMAL, TUMOR
from .errors import DimensionError, EmptyInputError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn_: int
    tn: int
    fp: int

    @property
    def total(self) -> int:
        return self.tp + self.fn_ + self.tn + self.fp

    def swapped(self) -> "ConfusionMatrix":
        """The same counts with Normal taken as the positive class."""
        return ConfusionMatrix(tp=self.tn, fn_=self.fp, tn=self.tp, fp=self.fn_)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn_, "tn": self.tn, "fp": self.fp}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(tp=d["tp"], fn_=d["fn"], tn=d["tn"], fp=d["fp"])


def confusion(predicted, actual) -> ConfusionMatrix:
    p = np.asarray(predicted)
    a = np.asarray(actual)
    if p.shape != a.shape or p.ndim != 1:
        raise DimensionError(f"predicted {p.shape} and actual {a.shape} differ")
    if p.size == 0:
        raise EmptyInputError("no predictions to score")
    return ConfusionMatrix(
        tp=int(np.sum((a == TUMOR) & (p == TUMOR))),
        fn_=int(np.sum((a == TUMOR) & (p == NORMAL))),
        tn=int(np.sum((a == NORMAL) & (p == NORMAL))),
        fp=int(np.sum((a == NORMAL) & (p == TUMOR))),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    """``(TP + TN) / (TP + TN + FP + FN)``."""
    if cm.total == 0:
        raise EmptyInputError("confusion matrix is empty")
    return (cm.tp + cm.tn) / cm.total


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(values) -> Aggregate:
    """Mean, population std (divisor n), min and max."""
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise EmptyInputError("nothing to aggregate")
    mean = float(np.mean(v))
    std = float(np.sqrt(np.mean((v - mean) ** 2)))
    return Aggregate(mean, std, float(v.min()), float(v.max()))


def format_percent(fraction: float) -> str:
    """``0.935483 -> '93.55%'``, rounding half up to two decimals."""
    d = (Decimal(repr(float(fraction))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{d}%"
