"""Parsing and encoding of the UCI dermatology table.

Each line of ``dermatology.data`` holds 35 comma-separated integers: ten
graded clinical attributes, family history, 22 graded histopathological
attributes, age (``?`` when unknown) and the class label 1-6.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError

CLINICAL = (
    "erythema",
    "scaling",
    "definite_borders",
    "itching",
    "koebner_phenomenon",
    "polygonal_papules",
    "follicular_papules",
    "oral_mucosal_involvement",
    "knee_and_elbow_involvement",
    "scalp_involvement",
)
HISTOPATHOLOGICAL = (
    "melanin_incontinence",
    "eosinophils_in_infiltrate",
    "pnl_infiltrate",
    "fibrosis_of_papillary_dermis",
    "exocytosis",
    "acanthosis",
    "hyperkeratosis",
    "parakeratosis",
    "clubbing_of_rete_ridges",
    "elongation_of_rete_ridges",
    "thinning_of_suprapapillary_epidermis",
    "spongiform_pustule",
    "munro_microabcess",
    "focal_hypergranulosis",
    "disappearance_of_granular_layer",
    "vacuolisation_of_basal_layer",
    "spongiosis",
    "saw_tooth_appearance_of_retes",
    "follicular_horn_plug",
    "perifollicular_parakeratosis",
    "inflammatory_monoluclear_infiltrate",
    "band_like_infiltrate",
)
# file order of the categorical attributes (age sits after them, class last)
CATEGORICAL = CLINICAL + ("family_history",) + HISTOPATHOLOGICAL
N_FIELDS = len(CATEGORICAL) + 2

CLASS_NAMES = (
    "psoriasis",
    "seboreic dermatitis",
    "lichen planus",
    "pityriasis rosea",
    "chronic dermatitis",
    "pityriasis rubra pilaris",
)
N_CLASSES = len(CLASS_NAMES)

# Fixed one-hot domains. family_history is already a 0/1 indicator and stays a
# single column; eosinophils never exceeds 2 in the data. 31*4 + 3 + 1 + age = 129.
ENCODING_LEVELS = {name: 4 for name in CATEGORICAL}
ENCODING_LEVELS["eosinophils_in_infiltrate"] = 3
ENCODING_LEVELS["family_history"] = 1
N_FEATURES = sum(ENCODING_LEVELS.values()) + 1

BUNDLED_DATA = "dermatology_complete_cases.data"


@dataclass(frozen=True)
class DermRecord:
    clinical: tuple
    family_history: int
    histopathological: tuple
    age: Optional[int]
    class_label: int

    def categorical_values(self):
        return self.clinical + (self.family_history,) + self.histopathological


@dataclass(frozen=True)
class FeatureMatrix:
    x: np.ndarray
    labels: np.ndarray
    column_names: tuple
    age_scaling: str = "minmax"

    @property
    def rows(self):
        return self.x.shape[0]

    @property
    def features(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class ClassDistribution:
    counts: dict

    @property
    def total(self):
        return sum(self.counts.values())


def default_data_path():
    """``$DERM2VEC_DATA`` if set, else the complete-case copy shipped with the package."""
    env = os.environ.get("DERM2VEC_DATA")
    if env:
        return Path(env)
    return Path(str(resources.files("derm2vec") / "data" / BUNDLED_DATA))


def _parse_int(token, lineno, field):
    try:
        return int(token)
    except ValueError:
        raise ParseError(lineno, f"field {field} is not an integer: {token!r}") from None


def parse_line(line, lineno=1):
    fields = [t.strip() for t in line.split(",")]
    if len(fields) != N_FIELDS:
        raise ParseError(lineno, f"expected {N_FIELDS} fields, got {len(fields)}")

    values = []
    for i, name in enumerate(CATEGORICAL):
        v = _parse_int(fields[i], lineno, i + 1)
        top = 1 if name == "family_history" else 3
        if not 0 <= v <= top:
            raise ParseError(lineno, f"{name}={v} outside 0..{top}")
        values.append(v)

    age_tok = fields[len(CATEGORICAL)]
    if age_tok == "?":
        age = None
    else:
        age = _parse_int(age_tok, lineno, len(CATEGORICAL) + 1)
        if age < 0:
            raise ParseError(lineno, f"negative age {age}")

    label = _parse_int(fields[-1], lineno, N_FIELDS)
    if not 1 <= label <= N_CLASSES:
        raise ParseError(lineno, f"class label {label} outside 1..{N_CLASSES}")

    nc = len(CLINICAL)
    return DermRecord(
        clinical=tuple(values[:nc]),
        family_history=values[nc],
        histopathological=tuple(values[nc + 1:]),
        age=age,
        class_label=label,
    )


def parse_dataset(path):
    """Read every record of a ``dermatology.data`` file (blank lines ignored)."""
    records = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(parse_line(line, lineno))
    return records


def drop_missing(records):
    return [r for r in records if r.age is not None]


def class_distribution(records):
    counts = dict.fromkeys(CLASS_NAMES, 0)
    for r in records:
        counts[CLASS_NAMES[r.class_label - 1]] += 1
    return ClassDistribution(counts)


def column_names():
    names = []
    for attr in CATEGORICAL:
        levels = ENCODING_LEVELS[attr]
        if levels == 1:
            names.append(attr)
        else:
            names.extend(f"{attr}={v}" for v in range(levels))
    names.append("age")
    return tuple(names)


def encode_features(records, age_scaling="minmax"):
    """One-hot encode ``records`` into an ``(n, 129)`` design matrix.

    ``age_scaling="minmax"`` maps age onto [0, 1] using this record set's
    range; ``"none"`` keeps raw years. Labels become 0-based class indices.
    """
    if not records:
        raise ValueError("cannot encode an empty record list")
    if age_scaling not in ("minmax", "none"):
        raise ValueError(f"unknown age_scaling {age_scaling!r}")
    if any(r.age is None for r in records):
        raise ValueError("records with missing age must be dropped before encoding")

    n = len(records)
    cats = np.array([r.categorical_values() for r in records], dtype=np.int64)
    x = np.zeros((n, N_FEATURES), dtype=np.float64)
    col = 0
    for j, attr in enumerate(CATEGORICAL):
        levels = ENCODING_LEVELS[attr]
        v = cats[:, j]
        if levels == 1:
            x[:, col] = v
        else:
            bad = v >= levels
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise ValueError(f"record {row}: {attr}={v[row]} has no column in the encoding")
            x[np.arange(n), col + v] = 1.0
        col += levels

    age = np.array([r.age for r in records], dtype=np.float64)
    if age_scaling == "minmax":
        span = age.max() - age.min()
        age = (age - age.min()) / span if span > 0 else np.zeros_like(age)
    x[:, col] = age

    labels = np.array([r.class_label - 1 for r in records], dtype=np.int64)
    return FeatureMatrix(x=x, labels=labels, column_names=column_names(), age_scaling=age_scaling)


def decode_categorical(x):
    """Recover the categorical attribute values from encoded rows (arg-max per block)."""
    x = np.asarray(x)
    out = np.empty((x.shape[0], len(CATEGORICAL)), dtype=np.int64)
    col = 0
    for j, attr in enumerate(CATEGORICAL):
        levels = ENCODING_LEVELS[attr]
        if levels == 1:
            out[:, j] = x[:, col].astype(np.int64)
        else:
            out[:, j] = np.argmax(x[:, col:col + levels], axis=1)
        col += levels
    return out


def load_dataset(path=None, age_scaling="minmax"):
    """parse -> drop_missing -> encode in one call."""
    records = drop_missing(parse_dataset(path or default_data_path()))
    return encode_features(records, age_scaling=age_scaling)


def summary_markdown(records):
    kept = drop_missing(records)
    dist = class_distribution(kept)
    lines = [
        "| quantity | count |",
        "|---|---:|",
        f"| records parsed | {len(records)} |",
        f"| records with missing age | {len(records) - len(kept)} |",
        f"| records retained | {len(kept)} |",
    ]
    lines += [f"| class: {name} | {count} |" for name, count in dist.counts.items()]
    return "\n".join(lines) + "\n"
