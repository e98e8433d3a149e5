"""Seven binary classifiers behind one train/predict contract.

``train`` returns a :class:`TrainedModel`, an immutable artifact carrying the
learned parameters, the exact hyperparameters, and (optionally) the scaler,
category encodings and feature mask needed to score raw records.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..data import ScalerParams
from ..errors import IngestError, SchemaMismatchError, ShapeError, TrainingError
from ..featureset import FeatureSet
from ..numerics import Rng, finite_diff_grad
from ..schemas import get_schema, normalize_header
from ..trees import Tree
from . import bayes, boosting, linear, mlp, neighbors, svm
from .hyperparams import (
    CLASSIFIER_ORDER,
    ClassifierKind,
    default_params,
    params_from_dict,
    validate,
)

__all__ = [
    "CLASSIFIER_ORDER",
    "ClassifierKind",
    "TrainedModel",
    "default_params",
    "gradient_oracle_check",
    "params_from_dict",
    "predict",
    "predict_raw",
    "predict_record",
    "train",
]


@dataclass(frozen=True)
class TrainedModel:
    kind: ClassifierKind
    hyperparams: Any
    params: dict
    n_features: int
    seed: int
    converged: bool
    feature_mask: FeatureSet | None = None
    scaler: ScalerParams | None = None
    encodings: dict = field(default_factory=dict)
    schema_kind: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "hyperparams": asdict(self.hyperparams),
            "params": _encode(self.params),
            "n_features": self.n_features,
            "seed": self.seed,
            "convergence_flag": self.converged,
            "feature_mask": self.feature_mask.to_dict() if self.feature_mask else None,
            "scaler": self.scaler.to_dict() if self.scaler else None,
            "encodings": self.encodings,
            "schema_kind": self.schema_kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        kind = ClassifierKind(d["kind"])
        return cls(
            kind=kind,
            hyperparams=params_from_dict(kind, d["hyperparams"]),
            params=_decode(d["params"]),
            n_features=int(d["n_features"]),
            seed=int(d["seed"]),
            converged=bool(d["convergence_flag"]),
            feature_mask=FeatureSet.from_dict(d["feature_mask"]) if d.get("feature_mask") else None,
            scaler=ScalerParams.from_dict(d["scaler"]) if d.get("scaler") else None,
            encodings=d.get("encodings") or {},
            schema_kind=d.get("schema_kind"),
        )

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist(), "dtype": "int" if obj.dtype.kind in "iu" else "float"}
    if isinstance(obj, Tree):
        return {"__tree__": obj.to_dict()}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            dtype = np.int64 if obj["dtype"] == "int" else float
            return np.array(obj["__array__"], dtype=dtype)
        if "__tree__" in obj:
            return Tree.from_dict(obj["__tree__"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


_FIT = {
    ClassifierKind.LOGREG: linear.fit,
    ClassifierKind.SVM: svm.fit,
    ClassifierKind.ADABOOST: boosting.fit_adaboost,
    ClassifierKind.GRADBOOST: boosting.fit_gradboost,
    ClassifierKind.KNN: neighbors.fit,
    ClassifierKind.NAIVE_BAYES: bayes.fit,
    ClassifierKind.MLP: mlp.fit,
}


def train(kind: ClassifierKind | str, x: np.ndarray, y: np.ndarray, hp=None, seed: int = 42, *,
          feature_mask: FeatureSet | None = None, scaler: ScalerParams | None = None,
          encodings: dict | None = None, schema_kind: str | None = None) -> TrainedModel:
    """Fit one classifier. Non-convergence is reported through ``converged``."""
    kind = ClassifierKind(kind)
    hp = default_params(kind) if hp is None else hp
    validate(hp)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise ShapeError(f"x has shape {x.shape} but y has {len(y)} rows")
    if not np.all(np.isfinite(x)):
        raise TrainingError("x contains non-finite values")
    if set(np.unique(y).tolist()) != {0, 1}:
        raise TrainingError("training labels must contain both classes 0 and 1")
    if feature_mask is not None and feature_mask.k != x.shape[1]:
        raise ShapeError("feature mask size does not match x")
    params, converged = _FIT[kind](x, y, hp, Rng(seed))
    return TrainedModel(kind=kind, hyperparams=hp, params=params, n_features=x.shape[1],
                        seed=int(seed), converged=bool(converged), feature_mask=feature_mask,
                        scaler=scaler, encodings=dict(encodings or {}), schema_kind=schema_kind)


def decision_scores(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    kind, p, hp = model.kind, model.params, model.hyperparams
    if kind is ClassifierKind.LOGREG:
        return linear.decision(p, x)
    if kind is ClassifierKind.SVM:
        return svm.decision(p, x, hp)
    if kind is ClassifierKind.ADABOOST:
        return boosting.adaboost_decision(p, x)
    if kind is ClassifierKind.GRADBOOST:
        return boosting.gradboost_margin(p, x, hp)
    if kind is ClassifierKind.KNN:
        return neighbors.decision(p, x, hp)
    if kind is ClassifierKind.NAIVE_BAYES:
        return bayes.decision(p, x)
    return mlp.decision(p, x)


def predict(model: TrainedModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels in {0, 1} and kind-specific scores for pre-scaled, pre-masked rows.

    Scores are probabilities for LogReg/KNN/NaiveBayes/MLP and signed margins
    for SVM/AdaBoost/GradBoost; ties resolve to class 0.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} columns, got shape {x.shape}")
    scores = decision_scores(model, x)
    if model.kind is ClassifierKind.NAIVE_BAYES:
        labels = bayes.labels_from_joint(bayes.joint_log_likelihood(model.params, x))
    elif model.kind in (ClassifierKind.SVM, ClassifierKind.ADABOOST, ClassifierKind.GRADBOOST):
        labels = (scores > 0).astype(np.int64)
    else:
        labels = (scores > 0.5).astype(np.int64)
    return labels, scores


def predict_raw(model: TrainedModel, x_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predict from full-width, label-encoded but unscaled rows."""
    if model.scaler is None:
        raise ValueError("model carries no scaler; use predict on scaled rows")
    x = model.scaler.transform(np.atleast_2d(np.asarray(x_raw, dtype=float)))
    if model.feature_mask is not None:
        x = x[:, list(model.feature_mask.indices)]
    return predict(model, x)


def encode_raw_record(model: TrainedModel, record: dict) -> np.ndarray:
    """Full-width encoded row from a header->value record.

    Only masked features are required; the rest are filled with the training
    minimum since the model never reads them.
    """
    if model.scaler is None or model.schema_kind is None:
        raise ValueError("model has no stored preprocessing")
    schema = get_schema(model.schema_kind)
    lookup = {normalize_header(str(k)): v for k, v in record.items()}
    needed = set(model.feature_mask.indices) if model.feature_mask else set(range(len(schema)))
    row = np.array(model.scaler.mins, dtype=float)
    for j, feat in enumerate(schema.features):
        value = next((lookup[k] for k in feat.header_keys() if k in lookup), None)
        if value is None:
            if j in needed:
                raise SchemaMismatchError(f"record is missing feature {feat.name!r}", column=feat.name)
            continue
        mapping = model.encodings.get(feat.name)
        text = str(value).strip()
        if mapping is not None and text in mapping:
            row[j] = mapping[text]
            continue
        try:
            row[j] = float(text)
        except ValueError:
            raise IngestError(f"feature {feat.name!r}: cannot interpret value {text!r}") from None
        if mapping is not None and row[j] not in set(mapping.values()):
            raise IngestError(f"feature {feat.name!r}: unknown category code {text!r}")
    return row


def predict_record(model: TrainedModel, record: dict) -> tuple[int, float]:
    labels, scores = predict_raw(model, encode_raw_record(model, record)[None, :])
    return int(labels[0]), float(scores[0])


def gradient_oracle_check(kind: ClassifierKind | str, x: np.ndarray, y: np.ndarray, *,
                          seed: int = 0, hidden: int = 3, l2: float = 1e-3, h: float = 1e-5) -> float:
    """Max relative error between the analytic gradient and central differences.

    Evaluated at a seeded random parameter point. Components are compared
    as ``|a - n| / max(|a|, |n|, 1e-6)``.
    """
    kind = ClassifierKind(kind)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) > 20:
        raise ValueError("the gradient check is meant for toy data (<= 20 rows)")
    rng = Rng(seed)
    if kind is ClassifierKind.LOGREG:
        theta = rng.uniform(-1.0, 1.0, x.shape[1] + 1)

        def f(t):
            return linear.loss_and_grad(t, x, y, l2)[0]
        analytic = linear.loss_and_grad(theta, x, y, l2)[1]
    elif kind is ClassifierKind.MLP:
        theta = mlp.init_theta(x.shape[1], hidden, rng)

        def f(t):
            return mlp.loss_and_grad(t, x, y, hidden)[0]
        analytic = mlp.loss_and_grad(theta, x, y, hidden)[1]
    else:
        raise ValueError("gradient check applies to logreg and mlp only")
    numeric = finite_diff_grad(f, theta, h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / denom))
