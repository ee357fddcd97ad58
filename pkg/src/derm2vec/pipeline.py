"""Two-stage Derm2Vec model and the stand-alone DNN it is compared against.

Derm2Vec first fits the autoencoder on the training rows only, then trains a
dropout-regularised softmax classifier on the bottleneck codes. The classifier
never sees the raw 129 features.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .autoencoder import AutoencoderSpec, build_autoencoder, encode, train_autoencoder
from .core import derive_seed, make_rng
from .data import N_CLASSES
from .errors import DivergenceError, ShapeError
from .neural import NetworkSpec, TrainConfig, fit, init_network, one_hot, predict_classes


@dataclass(frozen=True)
class Derm2VecConfig:
    ae_spec: AutoencoderSpec = field(default_factory=AutoencoderSpec)
    ae_train: TrainConfig = field(default_factory=TrainConfig)
    clf_hidden: tuple = (100,)
    clf_dropout: float = 0.5
    clf_train: TrainConfig = field(default_factory=TrainConfig)
    n_classes: int = N_CLASSES
    seed: int = 0

    def classifier_spec(self):
        return NetworkSpec.mlp(self.ae_spec.encoding_dim, tuple(self.clf_hidden),
                               self.n_classes, dropout=self.clf_dropout or 0.0)


@dataclass
class FittedDerm2Vec:
    autoencoder: object
    classifier: object
    config: Derm2VecConfig
    ae_history: list
    clf_history: list


def _train_stage(spec, x, y, cfg, seed, stage):
    net = init_network(spec, make_rng(derive_seed(seed, stage, "init")))
    try:
        return fit(net, x, y, cfg.with_seed(derive_seed(seed, stage, "train")))
    except DivergenceError as e:
        raise e.with_stage(stage) from e


def fit_derm2vec(x_train, y_train, cfg):
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    if x_train.ndim != 2 or x_train.shape[1] != cfg.ae_spec.input_dim:
        raise ShapeError(f"expected (*, {cfg.ae_spec.input_dim}) features, got {x_train.shape}")

    ae = build_autoencoder(cfg.ae_spec, make_rng(derive_seed(cfg.seed, "ae", "init")))
    try:
        ae, ae_hist = train_autoencoder(ae, x_train, cfg.ae_train.with_seed(derive_seed(cfg.seed, "ae", "train")))
    except DivergenceError as e:
        raise e.with_stage("autoencoder") from e

    codes = encode(ae, x_train)
    clf, clf_hist = _train_stage(cfg.classifier_spec(), codes, one_hot(y_train, cfg.n_classes),
                                 cfg.clf_train, cfg.seed, "classifier")
    return FittedDerm2Vec(ae, clf, cfg, ae_hist, clf_hist)


def predict(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.config.ae_spec.input_dim:
        raise ShapeError(f"expected (*, {model.config.ae_spec.input_dim}) features, got {x.shape}")
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return predict_classes(model.classifier, encode(model.autoencoder, x))


@dataclass(frozen=True)
class Derm2VecMethod:
    """CV-harness adapter: ``fit(x, y, seed)`` returns a predictor."""

    config: Derm2VecConfig = field(default_factory=Derm2VecConfig)

    def fit(self, x, y, seed):
        model = fit_derm2vec(x, y, replace(self.config, seed=seed))
        return lambda xt: predict(model, xt)

    def describe(self):
        c = self.config
        return {
            "method": "derm2vec",
            "encoding_dim": c.ae_spec.encoding_dim,
            "encoder_widths": list(c.ae_spec.encoder_widths),
            "bottleneck_activation": c.ae_spec.bottleneck_activation,
            "clf_hidden": list(c.clf_hidden),
            "clf_dropout": c.clf_dropout,
            "ae_train": vars(c.ae_train) | {"seed": None},
            "clf_train": vars(c.clf_train) | {"seed": None},
        }


@dataclass(frozen=True)
class DnnMethod:
    """Softmax MLP on the raw feature matrix."""

    hidden: tuple = (100,)
    dropout: float = 0.0
    train: TrainConfig = field(default_factory=TrainConfig)
    n_classes: int = N_CLASSES

    def fit(self, x, y, seed):
        x = np.asarray(x, dtype=np.float64)
        spec = NetworkSpec.mlp(x.shape[1], tuple(self.hidden), self.n_classes, dropout=self.dropout or 0.0)
        net, _ = _train_stage(spec, x, one_hot(y, self.n_classes), self.train, seed, "dnn")
        return lambda xt: predict_classes(net, xt)

    def describe(self):
        return {
            "method": "dnn",
            "hidden": list(self.hidden),
            "dropout": self.dropout,
            "train": vars(self.train) | {"seed": None},
        }
