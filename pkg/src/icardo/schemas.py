"""Column schemas for the two supported tables.

Feature order is the conventional symbol order (f1..f56 for the
Z-Alizadeh Sani table). Canonical names are the short column headers used
in the public CSV export; the long descriptive names are accepted as aliases.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    BINARY = "binary-categorical"
    MULTI = "multi-categorical"

    @property
    def categorical(self) -> bool:
        return self is not FeatureKind.NUMERIC


@dataclass(frozen=True)
class Feature:
    index: int  # 1-based, f1..fN
    name: str
    kind: FeatureKind
    declared_range: tuple[float, float] | None = None
    aliases: tuple[str, ...] = ()
    encoding: dict[str, int] | None = None

    @property
    def symbol(self) -> str:
        return f"f{self.index}"

    def header_keys(self) -> set[str]:
        return {normalize_header(n) for n in (self.name, *self.aliases)}


@dataclass(frozen=True)
class Schema:
    kind: str
    features: tuple[Feature, ...]
    label_name: str
    label_aliases: tuple[str, ...] = ()
    # text label value -> class id; numeric labels use ``label > 0``
    label_values: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def with_features(self, features) -> "Schema":
        return replace(self, features=tuple(features))

    def subset(self, columns) -> "Schema":
        """Schema restricted to ``columns`` (0-based), re-indexed from 1."""
        feats = [replace(self.features[c], index=i + 1) for i, c in enumerate(columns)]
        return replace(self, features=tuple(feats))

    def encodings(self) -> dict[str, dict[str, int]]:
        return {f.name: dict(f.encoding) for f in self.features if f.encoding is not None}


def normalize_header(text: str) -> str:
    return " ".join(text.strip().lower().split())


N, B, M = FeatureKind.NUMERIC, FeatureKind.BINARY, FeatureKind.MULTI

# (name, kind, declared range, aliases)
_ALIZADEH = [
    ("Age", N, (30, 86), ("age",)),
    ("Sex", B, None, ()),
    # Listed with range 30-86 in the source table, which duplicates the age
    # range; the column itself is a yes/no diabetes indicator.
    ("DM", B, None, ("Diabetes mellitus", "Diabetes mellitus (DM)")),
    ("EX-Smoker", B, None, ("Ex-smoker", "Ex Smoker")),
    ("Current Smoker", B, None, ()),
    ("HTN", B, None, ("Hyper tension (HTN)", "Hypertension")),
    ("FH", B, None, ("Family history (FH)", "Family history")),
    ("BMI", N, (18, 41), ("Body mass index (BMI) (Kg/m2)", "Body mass index")),
    ("DLP", B, None, ("Dyslipidemia (DLP)", "Dyslipidemia")),
    ("Airway disease", B, None, ()),
    ("CRF", B, None, ("Chronic Renal Failure (CRF)", "Chronic Renal Failure")),
    ("CVA", B, None, ("Cerebrovascular Accident (CVA)", "Cerebrovascular Accident")),
    ("CHF", B, None, ("Congestive Heart Failure (CHF)", "Congestive Heart Failure")),
    ("Obesity", B, None, ()),
    ("Thyroid Disease", B, None, ()),
    ("Edema", B, None, ()),
    ("Systolic Murmur", B, None, ()),
    ("Typical Chest Pain", B, None, ()),
    ("Atypical", B, None, ()),
    ("Weak Peripheral Pulse", B, None, ()),
    ("Exertional CP", B, None, ("Exertional Chest Pain (Exertional CP)", "Exertional Chest Pain")),
    ("Nonanginal", B, None, ("Nonanginal CP",)),
    ("Dyspnea", B, None, ()),
    ("Lung rales", B, None, ()),
    ("Diastolic Murmur", B, None, ()),
    ("LowTH Ang", B, None, ("low Threshold angina (Low Th Ang)", "Low Th Ang", "low Threshold angina")),
    ("BP", N, (90, 190), ("Blood Pressure (BP) (mmHg)", "Blood Pressure")),
    ("Function Class", N, (1, 4), ()),
    ("PR", N, (50, 110), ("Pulse Rate (PR) (ppm)", "Pulse Rate")),
    ("St Elevation", B, None, ("ST Elevation",)),
    ("Poor R Progression", B, None, ("Poor R Wave Progression (Poor R Progression)", "Poor R Wave Progression")),
    ("Tinversion", B, None, ("T inversion",)),
    ("Q Wave", B, None, ()),
    ("LVH", B, None, ("LVH (Left Ventricular Hypertrophy)", "Left Ventricular Hypertrophy")),
    ("St Depression", B, None, ("ST Depression",)),
    ("Rhythm", B, None, ()),
    ("Lymph", N, (7, 60), ("Lymph (Lymphocyte) (%)", "Lymphocyte")),
    ("K", N, (3.0, 6.6), ("K (Potassium) (mEq/lit)", "Potassium")),
    ("VHD", M, None, ("Valvular Heart Disease (VHD)", "Valvular Heart Disease")),
    ("BUN", N, (6, 52), ("Blood Urea Nitrogen (BUN) (mg/dl)", "Blood Urea Nitrogen")),
    ("CR", N, (0.5, 2.2), ("Creatine (Cr) (mg/dl)", "Creatine", "Cr")),
    ("LDL", N, (18, 232), ("Low density lipoprotein (LDL) (mg/dl)",)),
    ("TG", N, (37, 1050), ("Triglyceride (TG) (mg/dl)", "Triglyceride")),
    ("ESR", N, (1, 90), ("Erythrocyte Sedimentation rate (ESR) (mm/h)",)),
    ("Neut", N, (32, 89), ("Neutrophil (Neut) (%)", "Neutrophil")),
    ("HDL", N, (15, 111), ("High density lipoprotein (HDL) (mg/dl)",)),
    ("HB", N, (8.9, 17.6), ("Haemoglobin (HB) (g/dl)", "Haemoglobin")),
    ("PLT", N, (25, 742), ("Platelet (PLT) (1000/ml)", "Platelet")),
    ("FBS", N, (62, 400), ("Fasting Blood Sugar (FBS) (mg/dl)", "Fasting Blood Sugar")),
    ("Na", N, (128, 156), ("Sodium (Na) (mEq/lit)", "Sodium")),
    ("Region RWMA", N, (0, 4), ("Regional Wall Motion Abnormality (Region with RWMA)", "Region with RWMA")),
    ("EF-TTE", N, (15, 60), ("Ejection Fraction (EF)", "EF")),
    ("WBC", N, (3700, 18000), ("White Blood Cell (WBC) (cells/ml)", "White Blood Cell")),
    ("BBB", M, None, ("Bundle Branch Block(BBB)", "Bundle Branch Block")),
    ("Weight", N, (48, 120), ()),
    ("Length", N, (140, 188), ()),
]

_UCI = [
    ("age", N, (28, 77), ()),
    ("sex", B, None, ()),
    ("cp", M, None, ("chest pain", "chest_pain_type")),
    ("trestbps", N, (0, 200), ("trtbps", "resting blood pressure")),
    ("chol", N, (0, 603), ("cholesterol", "serum cholesterol")),
    ("fbs", B, None, ("fasting blood sugar",)),
    ("restecg", M, None, ("resting ecg",)),
    ("thalach", N, (60, 202), ("thalch", "thalachh", "max heart rate")),
    ("exang", B, None, ("exng", "exercise induced angina")),
    ("oldpeak", N, (-2.6, 6.2), ("st depression",)),
    ("slope", M, None, ("slp",)),
    ("ca", N, (0, 3), ("caa",)),
    ("thal", M, None, ("thall",)),
]


def _build(kind: str, rows, label_name, label_aliases, label_values) -> Schema:
    feats = tuple(
        Feature(index=i + 1, name=name, kind=k, declared_range=rng, aliases=al)
        for i, (name, k, rng, al) in enumerate(rows)
    )
    return Schema(kind=kind, features=feats, label_name=label_name,
                  label_aliases=label_aliases, label_values=label_values)


ALIZADEH56 = _build(
    "alizadeh56", _ALIZADEH, "Cath", ("label", "class"),
    {"cad": 1, "normal": 0},
)

UCI13 = _build(
    "uci13", _UCI, "num", ("target", "condition", "output", "label"),
    {},
)

SCHEMAS = {"alizadeh56": ALIZADEH56, "uci13": UCI13}


def get_schema(kind: str) -> Schema:
    try:
        return SCHEMAS[kind]
    except KeyError:
        raise ValueError(f"unknown schema kind {kind!r}; expected one of {sorted(SCHEMAS)}") from None
