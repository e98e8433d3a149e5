"""Classifier kinds and their documented default hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from enum import Enum


class ClassifierKind(str, Enum):
    SVM = "svm"
    GRADBOOST = "gradboost"
    ADABOOST = "adaboost"
    LOGREG = "logreg"
    KNN = "knn"
    NAIVE_BAYES = "naive_bayes"
    MLP = "mlp"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    ClassifierKind.SVM: "SVM",
    ClassifierKind.GRADBOOST: "XG-Boost",
    ClassifierKind.ADABOOST: "AdaBoost",
    ClassifierKind.LOGREG: "Log. Reg.",
    ClassifierKind.KNN: "KNN",
    ClassifierKind.NAIVE_BAYES: "Naive Bayes",
    ClassifierKind.MLP: "ANN",
}

# block order of the results table
CLASSIFIER_ORDER = tuple(ClassifierKind)


@dataclass(frozen=True)
class LogRegParams:
    lr: float = 0.1
    l2: float = 1e-3
    epochs: int = 2000
    grad_tol: float = 1e-6


@dataclass(frozen=True)
class SVMParams:
    kernel: str = "rbf"  # rbf | linear | poly
    C: float = 1.0
    gamma: float | None = None  # None -> 1 / n_features at fit time
    degree: int = 3
    coef0: float = 1.0
    tol: float = 1e-3
    max_iter: int = 100_000


@dataclass(frozen=True)
class AdaBoostParams:
    n_stumps: int = 100


@dataclass(frozen=True)
class GradBoostParams:
    n_rounds: int = 200
    depth: int = 3
    shrinkage: float = 0.1
    min_leaf: int = 2
    newton: bool = False


@dataclass(frozen=True)
class KNNParams:
    k: int = 5
    metric: str = "euclidean"  # euclidean | manhattan


@dataclass(frozen=True)
class NaiveBayesParams:
    variant: str = "gaussian"
    var_floor: float = 1e-9


@dataclass(frozen=True)
class MLPParams:
    hidden: int = 16
    lr: float = 0.05
    epochs: int = 500
    activation: str = "logistic"


PARAM_TYPES = {
    ClassifierKind.LOGREG: LogRegParams,
    ClassifierKind.SVM: SVMParams,
    ClassifierKind.ADABOOST: AdaBoostParams,
    ClassifierKind.GRADBOOST: GradBoostParams,
    ClassifierKind.KNN: KNNParams,
    ClassifierKind.NAIVE_BAYES: NaiveBayesParams,
    ClassifierKind.MLP: MLPParams,
}


def default_params(kind: ClassifierKind):
    return PARAM_TYPES[ClassifierKind(kind)]()


def params_from_dict(kind: ClassifierKind, values: dict | None):
    """Defaults for ``kind`` overridden by ``values``; unknown keys are rejected."""
    cls = PARAM_TYPES[ClassifierKind(kind)]
    values = dict(values or {})
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown {ClassifierKind(kind).value} hyperparameters: {sorted(unknown)}")
    hp = replace(cls(), **values)
    validate(hp)
    return hp


def validate(hp) -> None:
    for name, value in asdict(hp).items():
        if isinstance(value, bool) or value is None or isinstance(value, str):
            continue
        if value <= 0:
            raise ValueError(f"hyperparameter {name} must be positive, got {value}")
    if isinstance(hp, SVMParams) and hp.kernel not in {"rbf", "linear", "poly"}:
        raise ValueError(f"unknown SVM kernel {hp.kernel!r}")
    if isinstance(hp, KNNParams) and hp.metric not in {"euclidean", "manhattan"}:
        raise ValueError(f"unknown KNN metric {hp.metric!r}")
    if isinstance(hp, NaiveBayesParams) and hp.variant != "gaussian":
        raise ValueError("only the gaussian naive Bayes variant is available")
    if isinstance(hp, MLPParams) and hp.activation != "logistic":
        raise ValueError("only logistic activations are available")
