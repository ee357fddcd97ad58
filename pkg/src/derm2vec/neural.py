"""Fully-connected networks trained with mini-batch Adam or SGD.

Weights are stored input-major, ``W[k]`` of shape ``(fan_in, fan_out)``, so a
layer computes ``x @ W + b`` on row-major batches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .core import make_rng
from .errors import DivergenceError, ShapeError, SpecError

ACTIVATIONS = ("relu", "sigmoid", "softmax", "linear")
LOSSES = ("softmax_cross_entropy", "mean_squared_error", "binary_cross_entropy")
LOG_FLOOR = 1e-12
FORMAT_NAME = "derm2vec-network"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class LayerSpec:
    input_dim: int
    output_dim: int
    activation: str = "relu"
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise SpecError(f"layer dims must be positive, got {self.input_dim}->{self.output_dim}")
        if self.activation not in ACTIVATIONS:
            raise SpecError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise SpecError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple
    loss: str = "softmax_cross_entropy"

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise SpecError("a network needs at least one layer")
        if self.loss not in LOSSES:
            raise SpecError(f"unknown loss {self.loss!r}")
        for k, (a, b) in enumerate(zip(layers, layers[1:])):
            if a.output_dim != b.input_dim:
                raise SpecError(f"layer {k} outputs {a.output_dim} but layer {k + 1} expects {b.input_dim}")
        for k, layer in enumerate(layers[:-1]):
            if layer.activation == "softmax":
                raise SpecError(f"softmax is only allowed on the final layer (found on layer {k})")
        if layers[-1].dropout_rate:
            raise SpecError("dropout is not allowed on the output layer")
        if self.loss == "softmax_cross_entropy" and layers[-1].activation != "softmax":
            raise SpecError("softmax_cross_entropy requires a softmax output layer")
        if self.loss == "binary_cross_entropy" and layers[-1].activation != "sigmoid":
            raise SpecError("binary_cross_entropy requires a sigmoid output layer")

    @classmethod
    def mlp(cls, input_dim, hidden, output_dim, dropout=0.0, hidden_activation="relu",
            output_activation="softmax", loss="softmax_cross_entropy"):
        """Stack of dense layers; ``dropout`` applies to every hidden layer."""
        dims = [input_dim, *hidden, output_dim]
        layers = [
            LayerSpec(dims[i], dims[i + 1], hidden_activation, dropout)
            for i in range(len(hidden))
        ]
        layers.append(LayerSpec(dims[-2], dims[-1], output_activation, 0.0))
        return cls(tuple(layers), loss)

    @property
    def input_dim(self):
        return self.layers[0].input_dim

    @property
    def output_dim(self):
        return self.layers[-1].output_dim

    @property
    def n_params(self):
        return sum(l.input_dim * l.output_dim + l.output_dim for l in self.layers)

    def to_dict(self):
        return {"loss": self.loss, "layers": [vars(l).copy() for l in self.layers]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(LayerSpec(**l) for l in d["layers"]), d["loss"])


@dataclass
class Network:
    spec: NetworkSpec
    weights: list
    biases: list

    def copy(self):
        return Network(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def parameters(self):
        """Parameter arrays in canonical order W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def get_flat(self):
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        pos = 0
        for p in self.parameters():
            p[...] = vec[pos:pos + p.size].reshape(p.shape)
            pos += p.size
        if pos != vec.size:
            raise ShapeError(f"expected {pos} parameters, got {vec.size}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 0:
            raise SpecError("epochs must be non-negative")
        if self.batch_size < 1:
            raise SpecError("batch_size must be positive")
        if not self.learning_rate > 0:
            raise SpecError("learning_rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise SpecError(f"unknown optimizer {self.optimizer!r}")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass
class Trace:
    """Everything a forward pass keeps for backprop.

    ``inputs[k]`` is what layer k consumed (after the previous layer's dropout),
    ``outputs[k]`` its post-activation, post-dropout output; ``masks[k]`` is the
    scaled keep mask or ``None``.
    """

    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    activated: list = field(default_factory=list)
    masks: list = field(default_factory=list)

    @property
    def output(self):
        return self.outputs[-1]


def init_network(spec, rng):
    """Glorot-uniform weights and zero biases."""
    weights, biases = [], []
    for layer in spec.layers:
        bound = np.sqrt(6.0 / (layer.input_dim + layer.output_dim))
        weights.append(rng.uniform(-bound, bound, size=(layer.input_dim, layer.output_dim)))
        biases.append(np.zeros(layer.output_dim))
    return Network(spec, weights, biases)


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def activate(z, kind):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))
    if kind == "softmax":
        return softmax(z)
    return z


def dropout_mask(shape, rate, rng):
    """Inverted-dropout mask: 0 with probability ``rate``, else ``1/(1-rate)``."""
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def forward(net, x, mode="eval", rng=None, masks=None, upto=None):
    """Run the network on ``x``.

    In ``"train"`` mode each layer with a dropout rate gets a fresh mask from
    ``rng`` unless ``masks`` supplies frozen ones. ``upto`` stops after that
    many layers.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.spec.input_dim:
        raise ShapeError(f"network expects (*, {net.spec.input_dim}) input, got {x.shape}")
    if mode == "train" and rng is None and masks is None:
        raise ValueError("train mode needs an rng or frozen masks")

    n_layers = len(net.spec.layers) if upto is None else upto
    tr = Trace()
    a = x
    for k in range(n_layers):
        layer = net.spec.layers[k]
        tr.inputs.append(a)
        h = activate(a @ net.weights[k] + net.biases[k], layer.activation)
        tr.activated.append(h)
        mask = None
        if mode == "train" and layer.dropout_rate > 0:
            mask = masks[k] if masks is not None else dropout_mask(h.shape, layer.dropout_rate, rng)
            h = h * mask
        tr.masks.append(mask)
        tr.outputs.append(h)
        a = h
    return tr


def loss_value(output, targets, loss):
    output = np.asarray(output, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if output.shape != targets.shape:
        raise ShapeError(f"output {output.shape} and targets {targets.shape} differ")
    if output.shape[0] == 0:
        return 0.0
    if loss == "softmax_cross_entropy":
        ll = np.sum(targets * np.log(np.maximum(output, LOG_FLOOR)), axis=1)
        return float(max(-np.mean(ll), 0.0))
    if loss == "mean_squared_error":
        return float(np.mean((output - targets) ** 2))
    if loss == "binary_cross_entropy":
        ll = targets * np.log(np.maximum(output, LOG_FLOOR))
        ll += (1.0 - targets) * np.log(np.maximum(1.0 - output, LOG_FLOOR))
        return float(max(-np.mean(ll), 0.0))
    raise SpecError(f"unknown loss {loss!r}")


def backward(net, trace, targets):
    """Gradients of the configured loss, as lists aligned with weights/biases."""
    layers = net.spec.layers
    out = trace.output
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != out.shape:
        raise ShapeError(f"targets {targets.shape} do not match output {out.shape}")
    n = out.shape[0]
    last = layers[-1]

    if net.spec.loss == "softmax_cross_entropy":
        delta = (out - targets) / n
    elif net.spec.loss == "binary_cross_entropy":
        delta = (out - targets) / out.size
    else:
        g = 2.0 * (out - targets) / out.size
        delta = _activation_backward(g, trace.activated[-1], last.activation)

    grads_w = [None] * len(layers)
    grads_b = [None] * len(layers)
    for k in range(len(layers) - 1, -1, -1):
        grads_w[k] = trace.inputs[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k == 0:
            break
        g = delta @ net.weights[k].T
        if trace.masks[k - 1] is not None:
            g = g * trace.masks[k - 1]
        delta = _activation_backward(g, trace.activated[k - 1], layers[k - 1].activation)
    return grads_w, grads_b


def _activation_backward(g, h, kind):
    """Chain ``g = dL/dh`` through activation ``kind`` whose output is ``h``."""
    if kind == "relu":
        return g * (h > 0)
    if kind == "sigmoid":
        return g * h * (1.0 - h)
    if kind == "softmax":
        return h * (g - np.sum(g * h, axis=1, keepdims=True))
    return g


def one_hot(labels, n_classes):
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def fit(net, x, y, cfg):
    """Train a copy of ``net`` on ``(x, y)``; returns ``(trained, epoch_losses)``.

    ``y`` is a target matrix with one row per sample. The epoch loss is the
    sample-weighted mean of the training-mode batch losses.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    net = net.copy()
    history = []
    if cfg.epochs == 0 or x.shape[0] == 0:
        return net, history

    rng = make_rng(cfg.seed)
    params = net.parameters()
    flat_params = [p.reshape(-1) for p in params]
    m_state = [np.zeros(p.size) for p in params]
    v_state = [np.zeros(p.size) for p in params]
    n = x.shape[0]
    step = 0
    # overflow is caught below as a DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.epochs + 1):
            order = rng.permutation(n) if cfg.shuffle else np.arange(n)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                xb, yb = x[idx], y[idx]
                tr = forward(net, xb, "train", rng=rng)
                total += loss_value(tr.output, yb, net.spec.loss) * idx.size
                gw, gb = backward(net, tr, yb)
                grads = []
                for w, b in zip(gw, gb):
                    grads += [w, b]
                step += 1
                for p, g, m, v in zip(flat_params, grads, m_state, v_state):
                    g = np.ascontiguousarray(g).reshape(-1)
                    if cfg.optimizer == "adam":
                        kernels.adam_step(p, g, m, v, cfg.learning_rate, cfg.beta1,
                                          cfg.beta2, cfg.epsilon, step)
                    else:
                        p -= cfg.learning_rate * g
            epoch_loss = total / n
            if not np.isfinite(epoch_loss) or not all(np.isfinite(p).all() for p in flat_params):
                raise DivergenceError(epoch, cfg.learning_rate)
            history.append(epoch_loss)
    return net, history


def predict_proba(net, x):
    return forward(net, x, "eval").output


def predict_classes(net, x):
    """Arg-max class per row; ``np.argmax`` already prefers the lowest index on ties."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(predict_proba(net, x), axis=1).astype(np.int64)


def save_network(net, path):
    """Write spec and parameters to a ``.npz`` file with a JSON header."""
    header = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "spec": net.spec.to_dict()}
    arrays = {"header": np.array(json.dumps(header))}
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays[f"W{k}"] = w
        arrays[f"b{k}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_network(path):
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != FORMAT_NAME:
            raise ValueError(f"{path} is not a {FORMAT_NAME} file")
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported {FORMAT_NAME} version {header.get('version')}")
        spec = NetworkSpec.from_dict(header["spec"])
        k = len(spec.layers)
        weights = [z[f"W{i}"].copy() for i in range(k)]
        biases = [z[f"b{i}"].copy() for i in range(k)]
    for i, (layer, w, b) in enumerate(zip(spec.layers, weights, biases)):
        if w.shape != (layer.input_dim, layer.output_dim) or b.shape != (layer.output_dim,):
            raise ShapeError(f"layer {i} parameter shapes do not match the stored spec")
    return Network(spec, weights, biases)


def accuracy(pred, labels):
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    return float(np.mean(pred == labels)) if labels.size else 0.0
