"""Experiment configuration: INI files with ``;``-separated row lists."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .autoencoder import AutoencoderSpec
from .errors import ConfigError, Derm2VecError
from .neural import TrainConfig

KINDS = ("dnn_sweep", "derm2vec_sweep", "comparison", "single")
TABLE_KINDS = {1: "dnn_sweep", 2: "derm2vec_sweep", 3: "comparison"}
IMPLEMENTED_METHODS = ("derm2vec", "dnn", "dt", "ann", "rf", "nb", "knn")
PUBLISHED_ONLY_METHODS = ("xgboost", "svc")
METHOD_LABELS = {
    "derm2vec": "Derm2Vec",
    "dnn": "DNN",
    "xgboost": "XGBoost",
    "dt": "DT",
    "ann": "ANN (1 hidden layer, 2 nodes)",
    "svc": "SVC (RBF kernel)",
    "rf": "RF",
    "nb": "NB",
    "knn": "KNN (k=5)",
}


@dataclass(frozen=True)
class DnnRow:
    hidden: tuple
    dropout: float
    published: Optional[float] = None

    def label(self):
        drop = f"dropout {self.dropout:g}" if self.dropout else "no dropout"
        return f"{len(self.hidden)} hidden layer(s) {_widths(self.hidden)}, {drop}"


@dataclass(frozen=True)
class Derm2VecRow:
    encoding_dim: int
    hidden: tuple
    dropout: float
    published: Optional[float] = None

    def label(self):
        drop = f"dropout {self.dropout:g}" if self.dropout else "no dropout"
        return f"d={self.encoding_dim}; classifier {_widths(self.hidden)}, {drop}"


@dataclass(frozen=True)
class ExperimentConfig:
    kinds: tuple = ("dnn_sweep", "derm2vec_sweep", "comparison")
    seed: int = 2020
    seeds: int = 1
    folds: int = 10
    stratified: bool = True
    jobs: int = 1
    out: str = "results"
    data: Optional[str] = None
    deep_age_scaling: str = "minmax"
    baseline_age_scaling: str = "none"
    classifier_train: TrainConfig = field(default_factory=TrainConfig)
    ae_spec: AutoencoderSpec = field(default_factory=lambda: AutoencoderSpec(loss="binary_cross_entropy"))
    ae_train: TrainConfig = field(default_factory=TrainConfig)
    dnn_rows: tuple = ()
    derm2vec_rows: tuple = ()
    methods: tuple = ()
    derm2vec_row: int = 5
    dnn_row: int = 4
    knn_k: int = 5
    rf_n_estimators: int = 100
    rf_max_depth: Optional[int] = 3
    dt_max_depth: Optional[int] = None
    published: dict = field(default_factory=dict)
    single: dict = field(default_factory=dict)

    def validate(self):
        for k in self.kinds:
            if k not in KINDS:
                raise ConfigError("experiment.kinds", f"unknown kind {k!r}")
        if not self.kinds:
            raise ConfigError("experiment.kinds", "no experiment selected")
        if self.seeds < 1:
            raise ConfigError("experiment.seeds", "must be at least 1")
        if self.folds < 2:
            raise ConfigError("experiment.folds", "must be at least 2")
        if self.jobs < 1:
            raise ConfigError("experiment.jobs", "must be at least 1")
        for name in ("deep_age_scaling", "baseline_age_scaling"):
            if getattr(self, name) not in ("minmax", "none"):
                raise ConfigError(f"experiment.{name}", "must be 'minmax' or 'none'")
        if "dnn_sweep" in self.kinds and not self.dnn_rows:
            raise ConfigError("dnn_sweep.rows", "grid is empty")
        if "derm2vec_sweep" in self.kinds and not self.derm2vec_rows:
            raise ConfigError("derm2vec_sweep.rows", "grid is empty")
        if "comparison" in self.kinds:
            if not self.methods:
                raise ConfigError("comparison.methods", "no methods selected")
            for m in self.methods:
                if m not in IMPLEMENTED_METHODS + PUBLISHED_ONLY_METHODS:
                    raise ConfigError("comparison.methods", f"unknown method {m!r}")
            if "derm2vec" in self.methods and not 1 <= self.derm2vec_row <= len(self.derm2vec_rows):
                raise ConfigError("comparison.derm2vec_row", f"no derm2vec_sweep row {self.derm2vec_row}")
            if "dnn" in self.methods and not 1 <= self.dnn_row <= len(self.dnn_rows):
                raise ConfigError("comparison.dnn_row", f"no dnn_sweep row {self.dnn_row}")
        if "single" in self.kinds and self.single.get("method") not in IMPLEMENTED_METHODS:
            raise ConfigError("single.method", f"expected one of {IMPLEMENTED_METHODS}")
        return self

    def for_tables(self, tables):
        return replace(self, kinds=tuple(TABLE_KINDS[t] for t in tables))


def _widths(hidden):
    return "(" + ", ".join(str(h) for h in hidden) + ")" if len(hidden) > 1 else str(hidden[0])


def _int_list(text, where):
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(where, f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise ConfigError(where, f"expected positive widths, got {text!r}")
    return vals


def _dropout(text, where):
    t = text.strip().lower()
    if t in ("none", "no", "0", ""):
        return 0.0
    try:
        rate = float(t)
    except ValueError:
        raise ConfigError(where, f"bad dropout {text!r}") from None
    if not 0.0 <= rate < 1.0:
        raise ConfigError(where, f"dropout {rate} outside [0, 1)")
    return rate


def _opt_float(text, where):
    t = text.strip()
    if not t:
        return None
    try:
        return float(t)
    except ValueError:
        raise ConfigError(where, f"expected a number, got {text!r}") from None


def _opt_int(text, where):
    t = text.strip().lower()
    if t in ("none", ""):
        return None
    try:
        return int(t)
    except ValueError:
        raise ConfigError(where, f"expected an integer or 'none', got {text!r}") from None


def _rows(text):
    return [ln.split("#")[0].strip() for ln in text.splitlines() if ln.split("#")[0].strip()]


def parse_dnn_rows(text, section="dnn_sweep"):
    rows = []
    for i, line in enumerate(_rows(text), start=1):
        where = f"{section}.rows[{i}]"
        parts = [p.strip() for p in line.split(";")]
        if len(parts) not in (2, 3):
            raise ConfigError(where, f"expected 'widths ; dropout [; published]', got {line!r}")
        published = _opt_float(parts[2], where) if len(parts) == 3 else None
        rows.append(DnnRow(_int_list(parts[0], where), _dropout(parts[1], where), published))
    return tuple(rows)


def parse_derm2vec_rows(text, section="derm2vec_sweep"):
    rows = []
    for i, line in enumerate(_rows(text), start=1):
        where = f"{section}.rows[{i}]"
        parts = [p.strip() for p in line.split(";")]
        if len(parts) not in (3, 4):
            raise ConfigError(where, f"expected 'dim ; widths ; dropout [; published]', got {line!r}")
        dim = _int_list(parts[0], where)
        if len(dim) != 1:
            raise ConfigError(where, "encoding dim must be a single integer")
        published = _opt_float(parts[3], where) if len(parts) == 4 else None
        rows.append(Derm2VecRow(dim[0], _int_list(parts[1], where), _dropout(parts[2], where), published))
    return tuple(rows)


def _train_config(sec, where, base):
    try:
        return TrainConfig(
            epochs=sec.getint("epochs", base.epochs),
            batch_size=sec.getint("batch_size", base.batch_size),
            learning_rate=sec.getfloat("learning_rate", base.learning_rate),
            optimizer=sec.get("optimizer", base.optimizer).strip(),
        )
    except (ValueError, Derm2VecError) as e:
        raise ConfigError(where, str(e)) from None


def _published(text):
    out = {}
    for item in text.replace("\n", " ").split(","):
        if ":" in item:
            k, v = item.split(":", 1)
            out[k.strip()] = _opt_float(v, f"comparison.published.{k.strip()}")
    return out


def default_config_text():
    return (resources.files("derm2vec") / "configs" / "default.ini").read_text()


def parse_config(text, source="<config>"):
    cp = configparser.ConfigParser(inline_comment_prefixes=None, interpolation=None)
    try:
        cp.read_string(text, source=str(source))
    except configparser.Error as e:
        raise ConfigError(str(source), str(e)) from None

    exp = cp["experiment"] if cp.has_section("experiment") else {}
    kw = {}

    def get(section, key, conv, where=None):
        where = where or f"{section}.{key}"
        if not cp.has_option(section, key):
            return None
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(where, f"bad value {raw!r}") from None

    if exp:
        v = get("experiment", "kinds", lambda s: tuple(t.strip() for t in s.split(",") if t.strip()))
        if v is not None:
            kw["kinds"] = v
        for key, conv in (("seed", int), ("seeds", int), ("folds", int), ("jobs", int)):
            v = get("experiment", key, conv)
            if v is not None:
                kw[key] = v
        v = get("experiment", "stratified", lambda s: cp.getboolean("experiment", "stratified"))
        if v is not None:
            kw["stratified"] = v
        for key in ("out", "data", "deep_age_scaling", "baseline_age_scaling"):
            v = get("experiment", key, str.strip)
            if v:
                kw[key] = v

    if cp.has_section("classifier"):
        kw["classifier_train"] = _train_config(cp["classifier"], "classifier", TrainConfig())
    if cp.has_section("autoencoder"):
        sec = cp["autoencoder"]
        kw["ae_train"] = _train_config(sec, "autoencoder", TrainConfig())
        try:
            kw["ae_spec"] = AutoencoderSpec(
                encoder_widths=_int_list(sec.get("encoder_widths", "200, 100, 50"), "autoencoder.encoder_widths"),
                bottleneck_activation=sec.get("bottleneck_activation", "relu").strip(),
                loss=sec.get("loss", "binary_cross_entropy").strip(),
            )
            kw["ae_spec"].network_spec()
        except Derm2VecError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError("autoencoder", str(e)) from None

    if cp.has_option("dnn_sweep", "rows"):
        kw["dnn_rows"] = parse_dnn_rows(cp.get("dnn_sweep", "rows"))
    if cp.has_option("derm2vec_sweep", "rows"):
        kw["derm2vec_rows"] = parse_derm2vec_rows(cp.get("derm2vec_sweep", "rows"))

    if cp.has_section("comparison"):
        v = get("comparison", "methods", lambda s: tuple(t.strip().lower() for t in s.split(",") if t.strip()))
        if v is not None:
            kw["methods"] = v
        for key in ("derm2vec_row", "dnn_row", "knn_k", "rf_n_estimators"):
            v = get("comparison", key, int)
            if v is not None:
                kw[key] = v
        for key in ("rf_max_depth", "dt_max_depth"):
            if cp.has_option("comparison", key):
                kw[key] = _opt_int(cp.get("comparison", key), f"comparison.{key}")
        if cp.has_option("comparison", "published"):
            kw["published"] = _published(cp.get("comparison", "published"))

    if cp.has_section("single"):
        kw["single"] = {k: v.strip() for k, v in cp["single"].items()}

    return ExperimentConfig(**kw).validate()


def load_config(path=None):
    """Parse ``path``, or the bundled default configuration when ``path`` is None."""
    if path is None:
        return parse_config(default_config_text(), "default.ini")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(str(p), f"cannot read config: {e.strerror}") from None
    return parse_config(text, p)
