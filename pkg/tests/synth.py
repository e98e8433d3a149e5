"""Synthetic tables shaped like the two supported schemas.

These exercise ingestion and the full pipeline without the clinical data;
the label depends on a handful of columns so classifiers have signal.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from icardo.schemas import ALIZADEH56, UCI13, FeatureKind

# columns stored as 0/1 digits in the public export rather than words
_DIGIT_BINARY = {"DM", "HTN", "Current Smoker", "EX-Smoker", "FH", "Edema", "Typical Chest Pain",
                 "St Elevation", "St Depression", "Tinversion", "LVH", "Poor R Progression", "Q Wave"}
_MULTI = {"VHD": ["N", "mild", "Moderate", "Severe"], "BBB": ["N", "LBBB", "RBBB"]}


def alizadeh_rows(n: int = 303, seed: int = 0, n_cad: int = 216):
    rng = np.random.default_rng(seed)
    y = np.zeros(n, dtype=int)
    y[rng.permutation(n)[:n_cad]] = 1
    rows = []
    for i in range(n):
        row = {}
        for f in ALIZADEH56.features:
            lo, hi = f.declared_range or (0, 1)
            if f.kind is FeatureKind.NUMERIC:
                v = rng.uniform(lo, hi)
                if f.name in ("Age", "Region RWMA", "EF-TTE", "Typical Chest Pain"):
                    shift = (hi - lo) * 0.25 * (1 if y[i] else -1)
                    if f.name == "EF-TTE":
                        shift = -shift
                    v = float(np.clip(v + shift, lo, hi))
                if f.name in ("Function Class", "Region RWMA"):
                    v = round(v)
                row[f.name] = f"{v:.6g}"
            elif f.kind is FeatureKind.MULTI:
                row[f.name] = _MULTI[f.name][int(rng.integers(len(_MULTI[f.name])))]
            else:
                p = 0.5
                if f.name in ("Typical Chest Pain", "Atypical", "Nonanginal", "Tinversion"):
                    p = 0.8 if (y[i] == 1) == (f.name in ("Typical Chest Pain", "Tinversion")) else 0.2
                on = rng.random() < p
                if f.name == "Sex":
                    row[f.name] = "Male" if on else "Fmale"
                elif f.name in _DIGIT_BINARY:
                    row[f.name] = "1" if on else "0"
                else:
                    row[f.name] = "Y" if on else "N"
        row["Cath"] = "Cad" if y[i] else "Normal"
        rows.append(row)
    return rows


def uci_rows(n: int = 300, seed: int = 0):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        sick = rng.random() < 0.55
        s = 1.0 if sick else -1.0
        row = {
            "age": f"{int(np.clip(rng.normal(54 + 3 * s, 8), 28, 77))}",
            "sex": str(int(rng.random() < (0.85 if sick else 0.6))),
            "cp": str(int(rng.choice(4, p=[0.1, 0.1, 0.2, 0.6] if sick else [0.3, 0.3, 0.3, 0.1]) + 1)),
            "trestbps": f"{int(np.clip(rng.normal(132, 18), 90, 200))}",
            "chol": f"{int(np.clip(rng.normal(220, 50), 100, 603))}",
            "fbs": str(int(rng.random() < 0.15)),
            "restecg": str(int(rng.integers(3))),
            "thalach": f"{int(np.clip(rng.normal(140 - 12 * s, 20), 60, 202))}",
            "exang": str(int(rng.random() < (0.6 if sick else 0.15))),
            "oldpeak": f"{max(0.0, rng.normal(1.0 + 0.6 * s, 1.0)):.1f}",
            "slope": str(int(rng.integers(1, 4))),
            "ca": str(int(np.clip(rng.poisson(1.0 if sick else 0.3), 0, 3))),
            "thal": str(int(rng.choice([3, 6, 7], p=[0.3, 0.1, 0.6] if sick else [0.8, 0.05, 0.15]))),
            "num": str(int(rng.integers(1, 5)) if sick else 0),
        }
        rows.append(row)
    return rows


def write_csv(path: Path, rows, header=None) -> Path:
    header = header or list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        w.writerows(rows)
    return path


def alizadeh_csv(path: Path, **kwargs) -> Path:
    return write_csv(path, alizadeh_rows(**kwargs), ALIZADEH56.names + ["Cath"])


def uci_csv(path: Path, **kwargs) -> Path:
    return write_csv(path, uci_rows(**kwargs), UCI13.names + ["num"])
