"""Confusion counts and the four headline scores."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int
    positive: int = 1

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self) -> "ConfusionMatrix":
        """The same predictions read with the other class as positive."""
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp, 1 - self.positive)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn, "positive": self.positive}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(int(d["tp"]), int(d["fp"]), int(d["fn"]), int(d["tn"]), int(d.get("positive", 1)))


@dataclass(frozen=True)
class MetricsRecord:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsRecord":
        return cls(float(d["accuracy"]), float(d["precision"]), float(d["recall"]), float(d["f1"]))

    def get(self, name: str) -> float:
        return float(getattr(self, name))


METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def confusion(y_true, y_pred, positive: int = 1) -> ConfusionMatrix:
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError(f"label vectors differ in shape: {t.shape} vs {p.shape}")
    if len(t) == 0:
        raise ValueError("at least one label is required")
    pos_t = t == positive
    pos_p = p == positive
    return ConfusionMatrix(
        tp=int(np.sum(pos_t & pos_p)),
        fp=int(np.sum(~pos_t & pos_p)),
        fn=int(np.sum(pos_t & ~pos_p)),
        tn=int(np.sum(~pos_t & ~pos_p)),
        positive=int(positive),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix) -> MetricsRecord:
    """Accuracy, precision, recall and F1; any 0/0 is taken as 0."""
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return MetricsRecord(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=_ratio(2.0 * precision * recall, precision + recall),
    )


def percent(value: float, places: int = 2) -> str:
    """Fraction to a percent string, rounded half up (0.923076 -> '92.31')."""
    q = Decimal(1).scaleb(-places)
    return str((Decimal(repr(float(value))) * 100).quantize(q, rounding=ROUND_HALF_UP))
