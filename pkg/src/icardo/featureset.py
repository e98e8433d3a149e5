from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class SelectorKind(str, Enum):
    RFE = "rfe"
    LASSO = "lasso"
    CHI2 = "chi2"
    TREE = "tree"

    @property
    def letter(self) -> str:
        return {"rfe": "R", "lasso": "L", "chi2": "C", "tree": "T"}[self.value]

    @property
    def label(self) -> str:
        return {"rfe": "RFE", "lasso": "Lasso", "chi2": "Chi-Square", "tree": "Tree based"}[self.value]


# report/grid order: RFE, LASSO, Chi-Square, Tree-based
SELECTOR_ORDER = (SelectorKind.RFE, SelectorKind.LASSO, SelectorKind.CHI2, SelectorKind.TREE)


@dataclass(frozen=True)
class FeatureSet:
    selector: SelectorKind
    k: int
    indices: tuple[int, ...]  # 0-based columns, best-ranked first
    set_id: str
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.indices) != self.k:
            raise ValueError(f"feature set {self.set_id} has {len(self.indices)} indices, expected {self.k}")
        if len(set(self.indices)) != self.k:
            raise ValueError(f"feature set {self.set_id} has duplicate indices")

    @property
    def symbols(self) -> list[str]:
        return [f"f{i + 1}" for i in self.indices]

    def to_dict(self) -> dict:
        return {"set_id": self.set_id, "selector": self.selector.value, "k": self.k,
                "indices": list(self.indices), "feature_names": list(self.feature_names)}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSet":
        return cls(SelectorKind(d["selector"]), int(d["k"]), tuple(int(i) for i in d["indices"]),
                   d["set_id"], tuple(d.get("feature_names", ())))


def set_id(selector: SelectorKind, k: int, sizes) -> str:
    """Label like ``2C``: position of ``k`` among the sorted sizes, then the selector letter."""
    ordered = sorted(set(sizes))
    return f"{ordered.index(k) + 1}{selector.letter}"
