"""From-scratch fully connected regressor with exact backpropagation.

Gradients flow to the weights for training and all the way through to the
input vector for dreaming. Everything is float64 and deterministic in the
seed; no framework, just matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import (
    BadRange,
    ConfigError,
    DegenerateLabels,
    EmptyInput,
    ModelFormatError,
    NonFiniteInput,
    ShapeMismatch,
)

MODEL_HEADER = "moldream-mlp v1"
DEFAULT_HIDDEN = (500, 500, 500, 500)


@dataclass
class Mlp:
    """Weight/bias stacks for the chain dims[0] -> ... -> dims[-1] = 1.

    Hidden layers apply the activation; the scalar head is linear. The
    row convention is x @ W + b, so W has shape (fan_in, fan_out).
    """

    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in ("relu", "identity"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or any(d < 1 for d in dims) or dims[-1] != 1:
            raise ShapeMismatch(f"bad dimension chain {dims}")
        self.dims = dims
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ShapeMismatch("layer count does not match the dimension chain")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (dims[layer], dims[layer + 1])
            if w.shape != want or b.shape != (dims[layer + 1],):
                raise ShapeMismatch(
                    f"layer {layer}: weights {w.shape}, biases {b.shape},"
                    f" expected {want}"
                )
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NonFiniteInput(f"layer {layer} has non-finite parameters")

    @classmethod
    def init(cls, dims, seed, activation: str = "relu") -> "Mlp":
        """Uniform weights in +-1/sqrt(fan_in), zero biases."""
        rng = seed if isinstance(seed, np.random.Generator) \
            else np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims, dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(tuple(dims), weights, biases, activation)


@dataclass
class GradientBundle:
    """Gradients shaped like the model, plus the gradient at the input."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray


def forward_batch(m: Mlp, X) -> tuple[np.ndarray, dict]:
    """Predictions for a (batch, fan_in) matrix, plus the backprop cache."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.dims[0]:
        raise ShapeMismatch(f"input shape {X.shape}, expected (*, {m.dims[0]})")
    if not np.isfinite(X).all():
        raise NonFiniteInput("input contains nan or inf")
    activations = [X]
    pre = []
    a = X
    last = len(m.weights) - 1
    for layer, (w, b) in enumerate(zip(m.weights, m.biases)):
        z = a @ w + b
        pre.append(z)
        if layer < last and m.activation == "relu":
            a = np.maximum(z, 0.0)
        else:
            a = z
        activations.append(a)
    cache = {"activations": activations, "pre": pre, "dims": m.dims}
    return a[:, 0], cache


def forward(m: Mlp, x) -> tuple[float, dict]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch(f"expected a flat vector, got shape {x.shape}")
    preds, cache = forward_batch(m, x[None, :])
    return float(preds[0]), cache


def backward_batch(m: Mlp, cache, dpred) -> GradientBundle:
    """Exact loss gradients given d(loss)/d(prediction) per sample.

    Weight and bias gradients are summed over the batch; the input
    gradient stays per-sample.
    """
    if cache.get("dims") != m.dims or len(cache["pre"]) != len(m.weights):
        raise ShapeMismatch("cache does not belong to this model")
    dpred = np.asarray(dpred, dtype=np.float64)
    activations, pre = cache["activations"], cache["pre"]
    if dpred.shape != (activations[0].shape[0],):
        raise ShapeMismatch("one upstream gradient per batch sample required")
    delta = dpred[:, None]
    d_weights = [np.empty(0)] * len(m.weights)
    d_biases = [np.empty(0)] * len(m.weights)
    for layer in range(len(m.weights) - 1, -1, -1):
        d_weights[layer] = activations[layer].T @ delta
        d_biases[layer] = delta.sum(axis=0)
        delta = delta @ m.weights[layer].T
        if layer > 0 and m.activation == "relu":
            delta = delta * (pre[layer - 1] > 0.0)
    return GradientBundle(d_weights, d_biases, delta)


def backward(m: Mlp, cache, dpred: float) -> GradientBundle:
    bundle = backward_batch(m, cache, np.array([float(dpred)]))
    bundle.input = bundle.input[0]
    return bundle


def input_gradient_batch(m: Mlp, cache, dpred) -> np.ndarray:
    """Input gradients only, skipping the weight-gradient products.

    Same delta chain as backward_batch, so the result is bit-identical
    to GradientBundle.input; used on the hot path where weights are frozen.
    """
    if cache.get("dims") != m.dims or len(cache["pre"]) != len(m.weights):
        raise ShapeMismatch("cache does not belong to this model")
    dpred = np.asarray(dpred, dtype=np.float64)
    delta = dpred[:, None]
    for layer in range(len(m.weights) - 1, -1, -1):
        delta = delta @ m.weights[layer].T
        if layer > 0 and m.activation == "relu":
            delta = delta * (cache["pre"][layer - 1] > 0.0)
    return delta


class MlpRegressor(RegressorMixin, BaseEstimator):
    """Mini-batch SGD regressor over standardized labels.

    Labels are shifted/scaled to zero mean and unit variance on the train
    split; predict undoes the scaling. ``history_`` holds one
    (train_mse, validation_mse) pair per epoch, on the normalized scale.
    """

    def __init__(self, hidden_dims=DEFAULT_HIDDEN, activation="relu",
                 learning_rate=1e-3, batch_size=128, epochs=200,
                 train_fraction=0.8, seed=0):
        self.hidden_dims = hidden_dims
        self.activation = activation
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.train_fraction = train_fraction
        self.seed = seed

    def _check_ranges(self):
        if not self.learning_rate > 0:
            raise BadRange("learning_rate must be positive")
        if self.batch_size < 1:
            raise BadRange("batch_size must be at least 1")
        if self.epochs < 0:
            raise BadRange("epochs must be non-negative")
        if not 0.0 < self.train_fraction < 1.0:
            raise BadRange("train_fraction must lie strictly between 0 and 1")

    def fit(self, X, y):
        self._check_ranges()
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        n = X.shape[0]
        if n < 2:
            raise EmptyInput("need at least two samples to fit")
        dims = (X.shape[1], *tuple(self.hidden_dims), 1)
        rng = np.random.default_rng(self.seed)
        model = Mlp.init(dims, rng, self.activation)

        split = rng.permutation(n)
        n_train = min(max(int(round(self.train_fraction * n)), 1), n - 1)
        train_idx, val_idx = split[:n_train], split[n_train:]
        mean = float(y[train_idx].mean())
        std = float(y[train_idx].std())
        if std == 0.0:
            raise DegenerateLabels("training labels are all identical")
        y_norm = (y - mean) / std

        history: list[tuple[float, float]] = []
        for _ in range(self.epochs):
            order = rng.permutation(n_train)
            for start in range(0, n_train, self.batch_size):
                batch = train_idx[order[start:start + self.batch_size]]
                preds, cache = forward_batch(model, X[batch])
                dpred = 2.0 * (preds - y_norm[batch]) / batch.size
                grads = backward_batch(model, cache, dpred)
                for layer in range(len(model.weights)):
                    model.weights[layer] -= self.learning_rate * grads.weights[layer]
                    model.biases[layer] -= self.learning_rate * grads.biases[layer]
            train_mse = self._mse(model, X[train_idx], y_norm[train_idx])
            val_mse = self._mse(model, X[val_idx], y_norm[val_idx])
            history.append((train_mse, val_mse))

        self.model_ = model
        self.norm_mean_ = mean
        self.norm_std_ = std
        self.history_ = history
        self.n_features_in_ = X.shape[1]
        self.train_indices_ = np.sort(train_idx)
        self.val_indices_ = np.sort(val_idx)
        return self

    @staticmethod
    def _mse(model, X, y_norm) -> float:
        if X.shape[0] == 0:
            return float("nan")
        preds, _ = forward_batch(model, X)
        return float(np.mean((preds - y_norm) ** 2))

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatch(
                f"{X.shape[1]} features, model expects {self.n_features_in_}"
            )
        preds, _ = forward_batch(self.model_, X)
        return preds * self.norm_std_ + self.norm_mean_


def save_model(reg: MlpRegressor, path) -> None:
    """Versioned plain-text dump; full-precision decimal keeps it bit-exact."""
    check_is_fitted(reg, "model_")
    m = reg.model_
    lines = [
        MODEL_HEADER,
        "dims " + " ".join(str(d) for d in m.dims),
        f"activation {m.activation}",
        f"normalization {reg.norm_mean_!r} {reg.norm_std_!r}",
    ]
    for w, b in zip(m.weights, m.biases):
        lines.append("")
        for row in w:
            lines.append(" ".join(repr(float(v)) for v in row))
        lines.append(" ".join(repr(float(v)) for v in b))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_floats(line: str, count: int, what: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != count:
        raise ModelFormatError(f"{what}: expected {count} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ModelFormatError(f"{what}: {exc}") from None


def load_model(path) -> MlpRegressor:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MODEL_HEADER:
        raise ModelFormatError(f"missing header {MODEL_HEADER!r}")
    if len(lines) < 4:
        raise ModelFormatError("file ends before the parameter blocks")
    dims_parts = lines[1].split()
    if dims_parts[:1] != ["dims"] or len(dims_parts) < 3:
        raise ModelFormatError("second line must be 'dims <chain>'")
    try:
        dims = tuple(int(p) for p in dims_parts[1:])
    except ValueError:
        raise ModelFormatError("dimension chain must be integers") from None
    act_parts = lines[2].split()
    if act_parts[:1] != ["activation"] or len(act_parts) != 2:
        raise ModelFormatError("third line must be 'activation <name>'")
    activation = act_parts[1]
    norm_parts = lines[3].split()
    if norm_parts[:1] != ["normalization"] or len(norm_parts) != 3:
        raise ModelFormatError("fourth line must be 'normalization <mean> <std>'")
    norm = _parse_floats(" ".join(norm_parts[1:]), 2, "normalization")

    cursor = 4
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        rows = []
        for r in range(fan_in):
            if cursor >= len(lines):
                raise ModelFormatError(f"layer {layer}: missing weight row {r}")
            rows.append(_parse_floats(lines[cursor], fan_out,
                                      f"layer {layer} row {r}"))
            cursor += 1
        if cursor >= len(lines):
            raise ModelFormatError(f"layer {layer}: missing bias line")
        biases.append(_parse_floats(lines[cursor], fan_out, f"layer {layer} bias"))
        cursor += 1
        weights.append(np.vstack(rows) if rows else np.empty((0, fan_out)))
    if cursor != len(lines):
        raise ModelFormatError(f"{len(lines) - cursor} unexpected trailing lines")

    try:
        model = Mlp(dims, weights, biases, activation)
    except (ShapeMismatch, NonFiniteInput, ConfigError) as exc:
        raise ModelFormatError(str(exc)) from exc
    reg = MlpRegressor(hidden_dims=dims[1:-1], activation=activation)
    reg.model_ = model
    reg.norm_mean_ = float(norm[0])
    reg.norm_std_ = float(norm[1])
    reg.history_ = []
    reg.n_features_in_ = dims[0]
    return reg
