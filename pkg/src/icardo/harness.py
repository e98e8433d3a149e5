"""The selector x size x classifier evaluation grid and the 13-feature validation run."""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .data import Dataset, DataSplit, ScalerParams, minmax_scale, stratified_split
from .errors import IcardoError
from .featureset import SELECTOR_ORDER, FeatureSet, SelectorKind
from .learners import CLASSIFIER_ORDER, ClassifierKind, params_from_dict, predict, train
from .learners.hyperparams import LogRegParams
from .metrics import METRIC_NAMES, ConfusionMatrix, MetricsRecord, confusion, metrics
from .selectors import (
    DEFAULT_SIZES,
    ForestConfig,
    LassoConfig,
    RFEConfig,
    SelectorConfig,
    build_all_feature_sets,
    rfe_select,
    select,
)

SCHEMA_VERSION = 1
SWEEP_KERNELS = ("linear", "rbf", "poly")
SWEEP_C = (0.1, 1.0, 10.0)
VALIDATION_SEEDS = (42, 43, 44, 45, 46)


def selector_config_from_dict(d: dict | None) -> SelectorConfig:
    d = d or {}
    rfe = d.get("rfe", {})
    return SelectorConfig(
        lasso=LassoConfig(**d.get("lasso", {})),
        rfe=RFEConfig(base=LogRegParams(**rfe.get("base", {}))),
        forest=ForestConfig(**d.get("forest", {})),
    )


@dataclass(frozen=True)
class GridConfig:
    seed: int = 42
    test_fraction: float = 0.30
    sizes: tuple[int, ...] = DEFAULT_SIZES
    selectors: tuple[SelectorKind, ...] = SELECTOR_ORDER
    classifiers: tuple[ClassifierKind, ...] = CLASSIFIER_ORDER
    hyperparams: dict = field(default_factory=dict)  # classifier value -> overrides
    positive: str = "minority"  # minority | cad
    selector_config: SelectorConfig = field(default_factory=SelectorConfig)
    record_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(k) for k in self.sizes))
        object.__setattr__(self, "selectors", tuple(SelectorKind(s) for s in self.selectors))
        object.__setattr__(self, "classifiers", tuple(ClassifierKind(c) for c in self.classifiers))
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must be a non-empty list of positive integers")
        if not self.selectors or not self.classifiers:
            raise ValueError("at least one selector and one classifier are required")
        if self.positive not in ("minority", "cad"):
            raise ValueError("positive must be 'minority' or 'cad'")
        for kind, overrides in self.hyperparams.items():
            params_from_dict(kind, overrides)

    def hp(self, kind: ClassifierKind):
        return params_from_dict(kind, self.hyperparams.get(kind.value))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "sizes": list(self.sizes),
            "selectors": [s.value for s in self.selectors],
            "classifiers": [c.value for c in self.classifiers],
            "hyperparams": {c.value: asdict(self.hp(c)) for c in self.classifiers},
            "positive": self.positive,
            "selector_config": asdict(self.selector_config),
            "record_timing": self.record_timing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridConfig":
        d = dict(d)
        if "selector_config" in d:
            d["selector_config"] = selector_config_from_dict(d["selector_config"])
        d["hyperparams"] = {ClassifierKind(k).value: v for k, v in d.get("hyperparams", {}).items()}
        return cls(**d)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EvalRecord:
    set_id: str
    selector: SelectorKind
    k: int
    classifier: ClassifierKind
    cm: ConfusionMatrix | None
    metrics: MetricsRecord | None
    converged: bool | None
    split_digest: str
    features: tuple[int, ...] = ()
    wall_time_ms: float | None = None
    error: str | None = None
    variant: str | None = None  # hyperparameter tag for sweep records

    @property
    def ok(self) -> bool:
        return self.error is None and self.metrics is not None

    def to_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "selector": self.selector.value,
            "k": self.k,
            "classifier": self.classifier.value,
            "confusion": self.cm.to_dict() if self.cm else None,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "convergence_flag": self.converged,
            "split_digest": self.split_digest,
            "features": list(self.features),
            "wall_time_ms": self.wall_time_ms,
            "error": self.error,
            "variant": self.variant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        return cls(
            set_id=d["set_id"],
            selector=SelectorKind(d["selector"]),
            k=int(d["k"]),
            classifier=ClassifierKind(d["classifier"]),
            cm=ConfusionMatrix.from_dict(d["confusion"]) if d.get("confusion") else None,
            metrics=MetricsRecord.from_dict(d["metrics"]) if d.get("metrics") else None,
            converged=d.get("convergence_flag"),
            split_digest=d["split_digest"],
            features=tuple(d.get("features", ())),
            wall_time_ms=d.get("wall_time_ms"),
            error=d.get("error"),
            variant=d.get("variant"),
        )


@dataclass(frozen=True)
class GridReport:
    records: tuple[EvalRecord, ...]
    provenance: dict
    feature_sets: tuple[FeatureSet, ...] = ()
    schema_version: int = SCHEMA_VERSION

    @property
    def sizes(self) -> list[int]:
        return list(self.provenance["config"]["sizes"])

    def best(self, key: str = "accuracy", n: int | None = None) -> list[EvalRecord]:
        ranked = rank_models(self, key)
        return ranked if n is None else ranked[:n]

    def lookup(self, selector, k, classifier) -> EvalRecord | None:
        for r in self.records:
            if r.selector == SelectorKind(selector) and r.k == k and r.classifier == ClassifierKind(classifier):
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "provenance": self.provenance,
            "feature_sets": [fs.to_dict() for fs in self.feature_sets],
            "records": [r.to_dict() for r in self.records],
            "best": [_record_key(r) for r in rank_models(self)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "GridReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls(
            records=tuple(EvalRecord.from_dict(r) for r in d["records"]),
            provenance=d["provenance"],
            feature_sets=tuple(FeatureSet.from_dict(f) for f in d.get("feature_sets", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "GridReport":
        return cls.from_dict(json.loads(text))


def _record_key(r: EvalRecord) -> str:
    tag = f"/{r.variant}" if r.variant else ""
    return f"{r.set_id}/{r.classifier.value}{tag}"


def rank_models(report: GridReport | list[EvalRecord], key: str = "accuracy") -> list[EvalRecord]:
    """Best first by ``key``; ties go to accuracy, precision, smaller k, then set id.

    Failed cells follow in their original order.
    """
    if key not in METRIC_NAMES:
        raise ValueError(f"unknown metric {key!r}")
    records = list(report.records if isinstance(report, GridReport) else report)
    ok = [r for r in records if r.ok]
    failed = [r for r in records if not r.ok]
    ok.sort(key=lambda r: (-r.metrics.get(key), -r.metrics.accuracy, -r.metrics.precision, r.k, r.set_id))
    return ok + failed


def resolve_positive(y: np.ndarray, convention: str) -> int:
    """Class id treated as positive. ``minority`` picks the rarer class (1 on a tie)."""
    if convention == "cad":
        return 1
    y = np.asarray(y)
    n1 = int(np.sum(y == 1))
    return 0 if n1 > len(y) - n1 else 1


@dataclass(frozen=True)
class Prepared:
    """Everything the cells share: split, scaled data, scaler and feature sets."""
    split: DataSplit
    scaled: Dataset
    scaler: ScalerParams
    feature_sets: tuple[FeatureSet, ...]
    selector_errors: dict
    positive: int


def prepare(dataset: Dataset, config: GridConfig) -> Prepared:
    if not dataset.encoded:
        raise ValueError("dataset must be label-encoded")
    for k in config.sizes:
        if k > dataset.n_features:
            raise ValueError(f"size {k} exceeds the {dataset.n_features} available features")
    split = stratified_split(dataset, config.test_fraction, config.seed)
    scaled, scaler = minmax_scale(dataset, split)
    train_part = scaled.rows(split.train_indices)
    sets: list[FeatureSet] = []
    errors: dict = {}
    for selector in config.selectors:
        try:
            sets.extend(build_all_feature_sets(train_part, config.sizes, (selector,), config.selector_config))
        except (IcardoError, ArithmeticError, ValueError) as exc:
            errors[selector.value] = f"{type(exc).__name__}: {exc}"
    return Prepared(split, scaled, scaler, tuple(sets), errors, resolve_positive(dataset.y, config.positive))


def _evaluate_cell(task) -> tuple:
    kind, hp, seed, x_train, y_train, x_test, y_test, positive, timing = task
    start = time.perf_counter()
    try:
        with np.errstate(all="ignore"):
            model = train(kind, x_train, y_train, hp, seed)
            labels, scores = predict(model, x_test)
        if not np.all(np.isfinite(scores)):
            raise ArithmeticError("non-finite decision scores")
        cm = confusion(y_test, labels, positive)
        result = (cm, metrics(cm), model.converged, None)
    except (IcardoError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        result = (None, None, None, f"{type(exc).__name__}: {exc}")
    elapsed = round((time.perf_counter() - start) * 1000.0, 3) if timing else None
    return result + (elapsed,)


def _run_tasks(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_evaluate_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps submission order, so record order never depends on timing
        return list(pool.map(_evaluate_cell, tasks, chunksize=1))


def _cells(prep: Prepared, config: GridConfig, variants: list[tuple[ClassifierKind, object, str | None]],
           jobs: int = 1):
    tr = np.array(prep.split.train_indices)
    te = np.array(prep.split.test_indices)
    x = np.asarray(prep.scaled.x, dtype=float)
    y = np.asarray(prep.scaled.y)
    by_key = {(fs.selector, fs.k): fs for fs in prep.feature_sets}
    digest = prep.split.digest()
    meta, tasks = [], []
    for selector in config.selectors:
        for k in sorted(set(config.sizes)):
            fs = by_key.get((selector, k))
            for kind, hp, tag in variants:
                meta.append((selector, k, kind, fs, tag))
                if fs is None:
                    tasks.append(None)
                    continue
                cols = list(fs.indices)
                tasks.append((kind, hp, config.seed, x[tr][:, cols], y[tr], x[te][:, cols], y[te],
                              prep.positive, config.record_timing))
    live = [t for t in tasks if t is not None]
    results = iter(_run_tasks(live, jobs))
    records = []
    for (selector, k, kind, fs, tag), task in zip(meta, tasks):
        sid = fs.set_id if fs else f"{sorted(set(config.sizes)).index(k) + 1}{selector.letter}"
        if task is None:
            records.append(EvalRecord(sid, selector, k, kind, None, None, None, digest,
                                      error=prep.selector_errors.get(selector.value, "selector failed"),
                                      variant=tag))
            continue
        cm, met, conv, err, ms = next(results)
        records.append(EvalRecord(sid, selector, k, kind, cm, met, conv, digest, fs.indices, ms, err, tag))
    return records



def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def _provenance(dataset: Dataset, config: GridConfig, prep: Prepared) -> dict:
    return {
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "split_digest": prep.split.digest(),
        "n_train": len(prep.split.train_indices),
        "n_test": len(prep.split.test_indices),
        "test_indices": list(prep.split.test_indices),
        "positive_class": prep.positive,
        "config_hash": config.digest(),
        "config": config.to_dict(),
        "schema_kind": dataset.schema.kind,
        "n_rows": dataset.n_rows,
        "n_features": dataset.n_features,
        "tool_version": __version__,
        "selector_errors": dict(prep.selector_errors),
    }


def run_grid(dataset: Dataset, config: GridConfig = GridConfig(), jobs: int = 1,
             prep: Prepared | None = None) -> GridReport:
    """Evaluate every (selector, size, classifier) cell on one shared split.

    A failing cell becomes a record with ``error`` set; it never stops the grid.
    """
    prep = prep or prepare(dataset, config)
    variants = [(kind, config.hp(kind), None) for kind in config.classifiers]
    records = _cells(prep, config, variants, jobs)
    return GridReport(tuple(records), _provenance(dataset, config, prep), prep.feature_sets)


def svm_sweep(dataset: Dataset, config: GridConfig = GridConfig(), kernels=SWEEP_KERNELS, Cs=SWEEP_C,
              jobs: int = 1, prep: Prepared | None = None) -> list[EvalRecord]:
    """SVM cells for every kernel x C pair on the grid's feature sets and split."""
    prep = prep or prepare(dataset, config)
    base = config.hyperparams.get(ClassifierKind.SVM.value, {})
    variants = []
    for kernel in kernels:
        for c in Cs:
            hp = params_from_dict(ClassifierKind.SVM, {**base, "kernel": kernel, "C": float(c)})
            variants.append((ClassifierKind.SVM, hp, f"{kernel},C={c:g}"))
    return _cells(prep, config, variants, jobs)


# -- 13-feature validation ---------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    seed: int
    baseline: MetricsRecord
    improved: MetricsRecord
    baseline_cm: ConfusionMatrix
    improved_cm: ConfusionMatrix
    feature_set: FeatureSet

    @property
    def delta(self) -> float:
        return self.improved.accuracy - self.baseline.accuracy

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "baseline": self.baseline.to_dict(),
            "improved": self.improved.to_dict(),
            "baseline_confusion": self.baseline_cm.to_dict(),
            "improved_confusion": self.improved_cm.to_dict(),
            "delta": self.delta,
            "feature_set": self.feature_set.to_dict(),
        }


def validate_combined(dataset: Dataset, rfe_k: int = 10, seed: int = 42, test_fraction: float = 0.30,
                      svm_params: dict | None = None, positive: str = "minority",
                      rfe_config: RFEConfig = RFEConfig()) -> ValidationResult:
    """SVM on every column versus SVM on an RFE subset, same split and scaler."""
    if not 1 <= rfe_k <= dataset.n_features:
        raise ValueError(f"rfe_k must lie in [1, {dataset.n_features}]")
    hp = params_from_dict(ClassifierKind.SVM, svm_params)
    split = stratified_split(dataset, test_fraction, seed)
    scaled, _ = minmax_scale(dataset, split)
    tr = np.array(split.train_indices)
    te = np.array(split.test_indices)
    x = np.asarray(scaled.x, dtype=float)
    y = np.asarray(scaled.y)
    pos = resolve_positive(dataset.y, positive)
    fs = rfe_select(scaled.rows(tr), rfe_k, rfe_config, sizes=[rfe_k])

    def run(cols):
        model = train(ClassifierKind.SVM, x[tr][:, cols], y[tr], hp, seed)
        labels, _ = predict(model, x[te][:, cols])
        return confusion(y[te], labels, pos)

    base_cm = run(list(range(dataset.n_features)))
    # the full set needs no second fit: identical inputs give an identical model
    sub_cm = base_cm if sorted(fs.indices) == list(range(dataset.n_features)) else run(list(fs.indices))
    return ValidationResult(seed, metrics(base_cm), metrics(sub_cm), base_cm, sub_cm, fs)


def validation_sweep(dataset: Dataset, seeds=VALIDATION_SEEDS, **kwargs) -> list[ValidationResult]:
    return [validate_combined(dataset, seed=s, **kwargs) for s in seeds]


def train_pipeline(dataset: Dataset, classifier: ClassifierKind, selector: SelectorKind | None, k: int | None,
                   config: GridConfig = GridConfig()):
    """Split, scale and select exactly as one grid cell does, then fit on the training rows.

    The returned model carries the scaler, feature mask and category maps, so
    it can score raw records. ``selector=None`` keeps every column.
    """
    classifier = ClassifierKind(classifier)
    split = stratified_split(dataset, config.test_fraction, config.seed)
    scaled, scaler = minmax_scale(dataset, split)
    tr = np.array(split.train_indices)
    if selector is None:
        fs = None
        cols = list(range(dataset.n_features))
    else:
        fs = select(scaled.rows(tr), SelectorKind(selector), k, config.selector_config, sizes=config.sizes
                    if k in config.sizes else [k])
        cols = list(fs.indices)
    x = np.asarray(scaled.x, dtype=float)
    model = train(classifier, x[tr][:, cols], np.asarray(scaled.y)[tr], config.hp(classifier), config.seed,
                  feature_mask=fs, scaler=scaler, encodings=dataset.schema.encodings(),
                  schema_kind=dataset.schema.kind)
    return model, split
