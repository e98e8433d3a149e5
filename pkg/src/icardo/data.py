"""CSV ingestion, label encoding, min-max scaling and stratified splitting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CardinalityError,
    EmptyDatasetError,
    IngestError,
    RowParseError,
    SchemaMismatchError,
    StratificationError,
)
from .numerics import Rng
from .schemas import Feature, FeatureKind, Schema, get_schema, normalize_header

MAX_CATEGORIES = 16
MISSING_TOKENS = {"", "na", "nan", "null", "?"}
_NO = {"no", "n"}
_YES = {"yes", "y"}


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # object dtype until encoded, float afterwards
    y: np.ndarray
    schema: Schema
    scaled: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y row counts differ")
        if self.x.ndim != 2 or self.x.shape[1] != len(self.schema):
            raise ValueError("x column count does not match schema")
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    @property
    def encoded(self) -> bool:
        return self.x.dtype != object

    def rows(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return replace(self, x=self.x[idx].copy(), y=self.y[idx].copy())

    def columns(self, columns: Sequence[int]) -> "Dataset":
        cols = np.asarray(columns, dtype=np.int64)
        return replace(self, x=self.x[:, cols].copy(), schema=self.schema.subset(cols))

    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.y == c)) for c in (0, 1)}

    def summary(self) -> str:
        counts = self.class_counts()
        label = "CAD" if self.schema.kind == "alizadeh56" else "disease"
        return (f"{self.n_rows} rows, {counts[1]} positive-{label}, "
                f"{counts[0]} negative, {self.n_features} features")


@dataclass(frozen=True)
class ScalerParams:
    names: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != len(self.mins):
            raise ValueError(f"expected {len(self.mins)} columns, got {x.shape[-1]}")
        lo = np.array(self.mins)
        span = np.array(self.maxs) - lo
        safe = np.where(span > 0, span, 1.0)
        # constant training columns map to 0 everywhere, test rows included
        return np.where(span > 0, (x - lo) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"names": list(self.names), "mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(tuple(d["names"]), tuple(float(v) for v in d["mins"]),
                   tuple(float(v) for v in d["maxs"]))


@dataclass(frozen=True)
class DataSplit:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_fraction: float

    def digest(self) -> str:
        payload = json.dumps([list(self.train_indices), list(self.test_indices)])
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "test_fraction": self.test_fraction,
                "train_indices": list(self.train_indices),
                "test_indices": list(self.test_indices), "digest": self.digest()}

    @classmethod
    def from_dict(cls, d: dict) -> "DataSplit":
        return cls(tuple(d["train_indices"]), tuple(d["test_indices"]),
                   int(d["seed"]), float(d["test_fraction"]))


def from_arrays(x, y, names: Sequence[str] | None = None, kind: str = "custom") -> Dataset:
    """Wrap numeric arrays in an encoded Dataset with a generic numeric schema."""
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=np.int64)
    if x.ndim != 2:
        raise ValueError("x must be two-dimensional")
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(x.shape[1])]
    if len(names) != x.shape[1]:
        raise ValueError("one name per column is required")
    feats = tuple(Feature(index=j + 1, name=n, kind=FeatureKind.NUMERIC) for j, n in enumerate(names))
    return Dataset(x=x, y=y, schema=Schema(kind=kind, features=feats, label_name="label"))


# -- loading -----------------------------------------------------------------

def _parse_label(value: str, schema: Schema, row: int) -> int:
    key = value.strip().lower()
    if key in schema.label_values:
        return schema.label_values[key]
    try:
        num = float(key)
    except ValueError:
        raise RowParseError(f"row {row}: unrecognised label {value!r}", row, schema.label_name) from None
    if not math.isfinite(num):
        raise RowParseError(f"row {row}: non-finite label", row, schema.label_name)
    return int(num > 0)


def _match_header(header: list[str], schema: Schema, ignore: Iterable[str]) -> tuple[list[int], int]:
    keys = [normalize_header(h) for h in header]
    ignored = {normalize_header(i) for i in ignore}
    label_keys = {normalize_header(n) for n in (schema.label_name, *schema.label_aliases)}
    positions: list[int] = []
    used: set[int] = set()
    for feat in schema.features:
        wanted = feat.header_keys()
        hits = [i for i, k in enumerate(keys) if k in wanted]
        if not hits:
            raise SchemaMismatchError(f"missing column {feat.name!r}", column=feat.name)
        positions.append(hits[0])
        used.add(hits[0])
    label_hits = [i for i, k in enumerate(keys) if k in label_keys and i not in used]
    if not label_hits:
        raise SchemaMismatchError(f"missing label column {schema.label_name!r}", column=schema.label_name)
    used.add(label_hits[0])
    for i, k in enumerate(keys):
        if i not in used and k not in ignored:
            raise SchemaMismatchError(f"unexpected column {header[i].strip()!r}", column=header[i].strip())
    return positions, label_hits[0]


def load_csv(path: str | Path, schema_kind: str = "alizadeh56", *,
             ignore_columns: Iterable[str] = (), drop_incomplete: bool = False) -> Dataset:
    """Read a header-first CSV into an unscaled, unencoded Dataset.

    Data rows are numbered from 1 (the header is row 0) in error messages.
    With ``drop_incomplete`` rows containing missing tokens are skipped
    instead of rejected; malformed values are always errors.
    """
    schema = get_schema(schema_kind)
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDatasetError(f"{path}: file is empty")
        positions, label_pos = _match_header(header, schema, ignore_columns)
        xs: list[list] = []
        ys: list[int] = []
        for row_no, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise RowParseError(f"row {row_no}: expected {len(header)} cells, got {len(record)}", row_no)
            cells = [record[p].strip() for p in positions]
            label_cell = record[label_pos].strip()
            if any(c.lower() in MISSING_TOKENS for c in (*cells, label_cell)):
                if drop_incomplete:
                    continue
                bad = next((f.name for f, c in zip(schema.features, cells) if c.lower() in MISSING_TOKENS),
                           schema.label_name)
                raise RowParseError(f"row {row_no}: missing value in column {bad!r}", row_no, bad)
            parsed: list = []
            for feat, cell in zip(schema.features, cells):
                if feat.kind.categorical:
                    parsed.append(cell)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise RowParseError(
                        f"row {row_no}: column {feat.name!r} value {cell!r} is not numeric",
                        row_no, feat.name) from None
                if not math.isfinite(value):
                    raise RowParseError(f"row {row_no}: column {feat.name!r} is not finite", row_no, feat.name)
                parsed.append(value)
            xs.append(parsed)
            ys.append(_parse_label(label_cell, schema, row_no))
    if not xs:
        raise EmptyDatasetError(f"{path}: no data rows")
    x = np.empty((len(xs), len(schema)), dtype=object)
    for i, r in enumerate(xs):
        x[i, :] = r
    return Dataset(x=x, y=np.array(ys, dtype=np.int64), schema=schema)


# -- encoding ----------------------------------------------------------------

def category_mapping(values: Iterable[str]) -> dict[str, int]:
    """Lexicographic codes, except yes/no columns which always map no->0, yes->1."""
    distinct = sorted(set(values))
    yes = [v for v in distinct if v.lower() in _YES]
    no = [v for v in distinct if v.lower() in _NO]
    if len(yes) + len(no) == len(distinct) and len(yes) <= 1 and len(no) <= 1:
        return {v: int(v in yes) for v in distinct}
    return {v: i for i, v in enumerate(distinct)}


def encode_labels(dataset: Dataset) -> Dataset:
    """Map categorical text columns to integer codes; mappings go into the schema."""
    if dataset.scaled:
        raise ValueError("encode before scaling")
    if dataset.encoded:
        return dataset
    x = np.empty(dataset.x.shape, dtype=float)
    feats: list[Feature] = []
    for j, feat in enumerate(dataset.schema.features):
        col = dataset.x[:, j]
        if not feat.kind.categorical:
            x[:, j] = col.astype(float)
            feats.append(feat)
            continue
        values = [str(v) for v in col]
        mapping = feat.encoding or category_mapping(values)
        if len(mapping) > MAX_CATEGORIES:
            raise CardinalityError(
                f"column {feat.name!r} has {len(mapping)} distinct values (limit {MAX_CATEGORIES})", feat.name)
        try:
            x[:, j] = [mapping[v] for v in values]
        except KeyError as exc:
            raise IngestError(f"column {feat.name!r}: unknown category {exc.args[0]!r}") from None
        feats.append(replace(feat, encoding=mapping))
    return replace(dataset, x=x, schema=dataset.schema.with_features(feats))


def decode_column(dataset: Dataset, column: int) -> list[str]:
    feat = dataset.schema.features[column]
    if feat.encoding is None:
        raise ValueError(f"column {feat.name!r} is not categorical")
    inverse = {code: text for text, code in feat.encoding.items()}
    return [inverse[int(v)] for v in dataset.x[:, column]]


def encode_record(record: dict[str, str | float], schema: Schema) -> np.ndarray:
    """Encode one raw record (header name -> value) into a full-width row."""
    lookup = {normalize_header(k): v for k, v in record.items()}
    row = np.empty(len(schema), dtype=float)
    for j, feat in enumerate(schema.features):
        hit = next((lookup[k] for k in feat.header_keys() if k in lookup), None)
        if hit is None:
            raise SchemaMismatchError(f"record is missing feature {feat.name!r}", column=feat.name)
        if feat.encoding is not None:
            text = str(hit).strip()
            if text in feat.encoding:
                row[j] = feat.encoding[text]
                continue
            try:
                code = float(text)
            except ValueError:
                raise IngestError(f"feature {feat.name!r}: unknown category {text!r}") from None
            if code not in set(feat.encoding.values()):
                raise IngestError(f"feature {feat.name!r}: unknown code {text!r}")
            row[j] = code
        else:
            try:
                row[j] = float(hit)
            except (TypeError, ValueError):
                raise IngestError(f"feature {feat.name!r}: value {hit!r} is not numeric") from None
    return row


# -- scaling -----------------------------------------------------------------

def fit_scaler(dataset: Dataset, rows: Sequence[int] | None = None) -> ScalerParams:
    if not dataset.encoded:
        raise ValueError("dataset must be label-encoded before scaling")
    x = np.asarray(dataset.x, dtype=float)
    if rows is not None:
        x = x[np.asarray(rows, dtype=np.int64)]
    return ScalerParams(tuple(dataset.schema.names),
                        tuple(float(v) for v in x.min(axis=0)),
                        tuple(float(v) for v in x.max(axis=0)))


def minmax_scale(dataset: Dataset, split: DataSplit | None = None,
                 params: ScalerParams | None = None) -> tuple[Dataset, ScalerParams]:
    """Scale every column to [0, 1] using training-row extremes.

    Test rows are transformed with the same parameters and are not clamped.
    """
    if params is None:
        params = fit_scaler(dataset, split.train_indices if split is not None else None)
    x = params.transform(dataset.x)
    return replace(dataset, x=x, scaled=True), params


# -- splitting ---------------------------------------------------------------

def _allocate(counts: list[int], total: int) -> list[int]:
    n = sum(counts)
    quotas = [c * total / n for c in counts]
    alloc = [math.floor(q) for q in quotas]
    remainders = sorted(range(len(counts)), key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in remainders[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def stratified_split(y: Dataset | np.ndarray, test_fraction: float = 0.30, seed: int = 42) -> DataSplit:
    """Deterministic stratified train/test partition.

    The test size is ``round(test_fraction * n)`` (half up); per-class test
    counts are the largest-remainder apportionment of that total.
    """
    labels = np.asarray(y.y if isinstance(y, Dataset) else y)
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    classes = sorted(int(c) for c in np.unique(labels))
    counts = [int(np.sum(labels == c)) for c in classes]
    if len(classes) < 2 or min(counts) < 2:
        raise StratificationError("every class needs at least two rows to stratify")
    n = len(labels)
    n_test = int(math.floor(test_fraction * n + 0.5))
    n_test = min(max(n_test, len(classes)), n - len(classes))
    per_class = _allocate(counts, n_test)
    rng = Rng(seed)
    train: list[int] = []
    test: list[int] = []
    for c, k in zip(classes, per_class):
        members = np.flatnonzero(labels == c)
        order = members[rng.permutation(len(members))]
        test.extend(int(i) for i in order[:k])
        train.extend(int(i) for i in order[k:])
    return DataSplit(tuple(sorted(train)), tuple(sorted(test)), int(seed), float(test_fraction))


# -- cache files -------------------------------------------------------------

def save_dataset(dataset: Dataset, path: str | Path) -> None:
    if not dataset.encoded:
        raise ValueError("only encoded datasets can be cached")
    payload = {
        "schema_kind": dataset.schema.kind,
        "encodings": dataset.schema.encodings(),
        "x": np.asarray(dataset.x, dtype=float).tolist(),
        "y": dataset.y.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True))


def load_dataset(path: str | Path) -> Dataset:
    payload = json.loads(Path(path).read_text())
    schema = get_schema(payload["schema_kind"])
    enc = payload.get("encodings", {})
    feats = [replace(f, encoding=enc.get(f.name)) if f.kind.categorical else f for f in schema.features]
    return Dataset(x=np.array(payload["x"], dtype=float), y=np.array(payload["y"], dtype=np.int64),
                   schema=schema.with_features(feats))


def load_any(path: str | Path, schema_kind: str, **kwargs) -> Dataset:
    """Load a cached ``.json`` dataset or ingest and encode a CSV."""
    if str(path).endswith(".json"):
        return load_dataset(path)
    return encode_labels(load_csv(path, schema_kind, **kwargs))
