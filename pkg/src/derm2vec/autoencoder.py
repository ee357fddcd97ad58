"""Stacked autoencoder whose bottleneck code serves as the patient vector."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import N_FEATURES
from .errors import ShapeError, SpecError
from .neural import LayerSpec, NetworkSpec, activate, fit, forward, init_network


@dataclass(frozen=True)
class AutoencoderSpec:
    input_dim: int = N_FEATURES
    encoder_widths: tuple = (200, 100, 50)
    encoding_dim: int = 32
    hidden_activation: str = "relu"
    bottleneck_activation: str = "relu"
    output_activation: str = "sigmoid"
    loss: str = "mean_squared_error"

    def __post_init__(self):
        object.__setattr__(self, "encoder_widths", tuple(self.encoder_widths))
        if self.encoding_dim < 1:
            raise SpecError("encoding_dim must be at least 1")
        if self.input_dim < 1 or any(w < 1 for w in self.encoder_widths):
            raise SpecError("all widths must be positive")

    @property
    def decoder_widths(self):
        return self.encoder_widths[::-1]

    def widths(self):
        """Output width of every layer, input excluded."""
        return (*self.encoder_widths, self.encoding_dim, *self.decoder_widths, self.input_dim)

    def network_spec(self):
        dims = (self.input_dim, *self.widths())
        n_enc = len(self.encoder_widths)
        acts = (
            [self.hidden_activation] * n_enc
            + [self.bottleneck_activation]
            + [self.hidden_activation] * n_enc
            + [self.output_activation]
        )
        layers = tuple(LayerSpec(dims[i], dims[i + 1], acts[i]) for i in range(len(acts)))
        return NetworkSpec(layers, self.loss)


@dataclass(frozen=True)
class PatientVector:
    values: np.ndarray
    source_row: int


def build_autoencoder(spec, rng):
    return init_network(spec.network_spec(), rng)


def train_autoencoder(ae, x, cfg):
    """Fit ``ae`` to reconstruct ``x``; labels never enter this function."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != ae.spec.input_dim:
        raise ShapeError(f"autoencoder expects (*, {ae.spec.input_dim}) input, got {x.shape}")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("autoencoder inputs must lie in [0, 1]")
    return fit(ae, x, x, cfg)


def bottleneck_index(ae):
    """Number of layers from the input up to and including the code layer."""
    return len(ae.spec.layers) // 2


def encode(ae, x):
    """Bottleneck activations for every row of ``x`` (eval mode)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != ae.spec.input_dim:
        raise ShapeError(f"autoencoder expects (*, {ae.spec.input_dim}) input, got {x.shape}")
    if x.shape[0] == 0:
        return np.zeros((0, ae.spec.layers[bottleneck_index(ae) - 1].output_dim))
    return forward(ae, x, "eval", upto=bottleneck_index(ae)).output


def decode(ae, codes):
    a = np.asarray(codes, dtype=np.float64)
    for k in range(bottleneck_index(ae), len(ae.spec.layers)):
        a = forward_layer(ae, k, a)
    return a


def forward_layer(net, k, a):
    return activate(a @ net.weights[k] + net.biases[k], net.spec.layers[k].activation)


def reconstruct(ae, x):
    return forward(ae, x, "eval").output


def reconstruction_error(ae, x):
    """Mean squared reconstruction error per entry."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.mean((reconstruct(ae, x) - x) ** 2))


def patient_vectors(codes):
    return [PatientVector(values=row.copy(), source_row=i) for i, row in enumerate(np.asarray(codes))]


def write_patient_vectors(codes, path):
    """CSV export: ``row`` then ``v0 .. v{d-1}``, full float precision."""
    codes = np.asarray(codes)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", *(f"v{j}" for j in range(codes.shape[1]))])
        for i, row in enumerate(codes):
            w.writerow([i, *(repr(float(v)) for v in row)])
