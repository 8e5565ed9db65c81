"""Inverse training: descend the input while the network stays frozen.

A molecule's one-hot encoding is perturbed with uniform noise, then moved
by gradient steps that pull the frozen regressor's prediction toward a
target value. The real-valued input is decoded by row-wise argmax after
every step; a trajectory records each epoch where the decoded molecule
actually changed.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import BadRange, EncodingError, NotOneHot, ShapeMismatch
from .graph import MolecularGraph, canonical_key, write_smiles
from .net import MlpRegressor, forward_batch, input_gradient_batch
from .selfies import (
    ALPHABET,
    ALPHABET_SIZE,
    decode,
    encode,
    to_onehot,
    tokens_to_text,
)

GRADIENT_VANISHED = "gradient_vanished"
MAX_EPOCHS = "max_epochs"


@dataclass(frozen=True)
class DreamConfig:
    """Knobs for one dreaming run; target is in raw property units."""

    target: float
    learning_rate: float = 0.1
    max_epochs: int = 500
    grad_tolerance: float = 1e-6
    noise_upper_bound: float = 0.9
    seed: int = 0
    renoise_each_epoch: bool = False

    def __post_init__(self):
        # learning_rate 0 is allowed: it makes the run a no-op probe.
        if self.learning_rate < 0:
            raise BadRange("learning_rate must be non-negative")
        if self.max_epochs < 1:
            raise BadRange("max_epochs must be at least 1")
        if self.grad_tolerance <= 0:
            raise BadRange("grad_tolerance must be positive")
        if not 0.0 <= self.noise_upper_bound < 1.0:
            raise BadRange("noise_upper_bound must lie in [0, 1)")


@dataclass(frozen=True)
class DreamStep:
    epoch: int
    tokens: list[str]
    graph: MolecularGraph
    prediction: float
    loss: float


@dataclass
class DreamTrajectory:
    steps: list[DreamStep]
    final_input: np.ndarray
    termination: str
    final_prediction: float
    final_loss: float


@dataclass
class DreamSetResult:
    """Per-molecule outcomes, order-aligned; failures leave a None slot."""

    trajectories: list[DreamTrajectory | None]
    errors: list[tuple[int, str]] = field(default_factory=list)


def inject_noise(x, upper_bound: float, seed: int) -> np.ndarray:
    """Replace every exact zero with a uniform draw from [0, upper_bound)."""
    if not 0.0 <= upper_bound < 1.0:
        raise BadRange("noise upper bound must lie in [0, 1)")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or not np.isin(x, (0.0, 1.0)).all() \
            or not (x.sum(axis=1) == 1.0).all():
        raise NotOneHot("expected an exact one-hot matrix")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.0, upper_bound, size=x.shape)
    return np.where(x == 1.0, 1.0, draws)


def _item_seed(cfg_seed: int, key_text: str) -> int:
    # Content-derived so a molecule dreams the same wherever it sits
    # in the input list.
    return cfg_seed ^ zlib.crc32(key_text.encode())


def _dream_batch(reg: MlpRegressor, graphs, cfg: DreamConfig) -> DreamSetResult:
    check_is_fitted(reg, "model_")
    if reg.n_features_in_ % ALPHABET_SIZE:
        raise ShapeMismatch("model width is not a multiple of the alphabet size")
    l_max = reg.n_features_in_ // ALPHABET_SIZE

    trajectories: list[DreamTrajectory | None] = [None] * len(graphs)
    errors: list[tuple[int, str]] = []
    rows: list[int] = []
    rngs: list[np.random.Generator] = []
    zero_masks: list[np.ndarray] = []
    x_rows: list[np.ndarray] = []
    for i, g in enumerate(graphs):
        try:
            tokens = encode(g, l_max=l_max)
        except EncodingError as exc:
            errors.append((i, str(exc)))
            continue
        onehot = to_onehot(tokens, l_max)
        rng = np.random.default_rng(
            _item_seed(cfg.seed, canonical_key(g).text))
        draws = rng.uniform(0.0, cfg.noise_upper_bound, size=onehot.shape)
        rows.append(i)
        rngs.append(rng)
        zero_masks.append((onehot == 0.0).ravel())
        x_rows.append(np.where(onehot == 1.0, 1.0, draws).ravel())
    if not rows:
        return DreamSetResult(trajectories, errors)

    n = len(rows)
    x = np.vstack(x_rows)
    t_norm = (cfg.target - reg.norm_mean_) / reg.norm_std_
    model = reg.model_

    def evaluate(mat):
        preds, cache = forward_batch(model, mat)
        dpred = 2.0 * (preds - t_norm)
        grads = input_gradient_batch(model, cache, dpred)
        return preds, (preds - t_norm) ** 2, grads

    preds, losses, grads = evaluate(x)
    argmaxes = x.reshape(n, l_max, ALPHABET_SIZE).argmax(axis=2)
    steps: list[list[DreamStep]] = []
    last_keys = []
    for r in range(n):
        tokens = _tokens_from_argmax(argmaxes[r])
        graph = decode(tokens)
        last_keys.append(canonical_key(graph))
        steps.append([DreamStep(0, tokens, graph,
                                _raw(reg, preds[r]), float(losses[r]))])

    active = np.ones(n, dtype=bool)
    termination = [MAX_EPOCHS] * n
    for epoch in range(1, cfg.max_epochs + 1):
        flat = np.abs(grads).max(axis=1) < cfg.grad_tolerance
        for r in np.flatnonzero(active & flat):
            termination[r] = GRADIENT_VANISHED
        active &= ~flat
        if not active.any():
            break
        x[active] -= cfg.learning_rate * grads[active]
        if cfg.renoise_each_epoch:
            for r in np.flatnonzero(active):
                draws = rngs[r].uniform(0.0, cfg.noise_upper_bound,
                                        size=reg.n_features_in_)
                x[r, zero_masks[r]] = draws[zero_masks[r]]
        preds, losses, grads = evaluate(x)
        new_argmaxes = x.reshape(n, l_max, ALPHABET_SIZE).argmax(axis=2)
        for r in np.flatnonzero(active & (new_argmaxes != argmaxes).any(axis=1)):
            tokens = _tokens_from_argmax(new_argmaxes[r])
            graph = decode(tokens)
            key = canonical_key(graph)
            if key != last_keys[r]:
                last_keys[r] = key
                steps[r].append(DreamStep(epoch, tokens, graph,
                                          _raw(reg, preds[r]), float(losses[r])))
        argmaxes = new_argmaxes

    for r, i in enumerate(rows):
        trajectories[i] = DreamTrajectory(
            steps=steps[r],
            final_input=x[r].reshape(l_max, ALPHABET_SIZE).copy(),
            termination=termination[r],
            final_prediction=_raw(reg, preds[r]),
            final_loss=float(losses[r]),
        )
    return DreamSetResult(trajectories, errors)


def _raw(reg: MlpRegressor, pred_norm: float) -> float:
    return float(pred_norm * reg.norm_std_ + reg.norm_mean_)


def _tokens_from_argmax(indices) -> list[str]:
    tokens = [ALPHABET[j] for j in indices]
    while tokens and tokens[-1] == "[PAD]":
        tokens.pop()
    return tokens


def dream(reg: MlpRegressor, start: MolecularGraph,
          cfg: DreamConfig) -> DreamTrajectory:
    """Dream a single molecule; encoding failures raise."""
    result = _dream_batch(reg, [start], cfg)
    if result.errors:
        raise EncodingError(result.errors[0][1])
    return result.trajectories[0]


def dream_set(reg: MlpRegressor, graphs, cfg: DreamConfig) -> DreamSetResult:
    """Dream each molecule independently; per-item failures are recorded."""
    return _dream_batch(reg, list(graphs), cfg)


def trajectory_json_lines(traj: DreamTrajectory) -> list[str]:
    """One JSON object per recorded step, in trajectory order."""
    lines = []
    for step in traj.steps:
        lines.append(json.dumps({
            "epoch": step.epoch,
            "tokens": tokens_to_text(step.tokens),
            "smiles": write_smiles(step.graph),
            "prediction": step.prediction,
            "loss": step.loss,
        }))
    return lines


class MoleculeDreamer(BaseEstimator):
    """Estimator facade for dreaming molecule sets against one target."""

    def __init__(self, regressor=None, target=0.0, learning_rate=0.1,
                 max_epochs=500, grad_tolerance=1e-6, noise_upper_bound=0.9,
                 seed=0, renoise_each_epoch=False):
        self.regressor = regressor
        self.target = target
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.grad_tolerance = grad_tolerance
        self.noise_upper_bound = noise_upper_bound
        self.seed = seed
        self.renoise_each_epoch = renoise_each_epoch

    def _config(self) -> DreamConfig:
        return DreamConfig(
            target=self.target,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            grad_tolerance=self.grad_tolerance,
            noise_upper_bound=self.noise_upper_bound,
            seed=self.seed,
            renoise_each_epoch=self.renoise_each_epoch,
        )

    def fit(self, X, y=None):
        check_is_fitted(self.regressor, "model_")
        return self

    def dream(self, graph) -> DreamTrajectory:
        return dream(self.regressor, graph, self._config())

    def dream_set(self, graphs) -> DreamSetResult:
        return dream_set(self.regressor, graphs, self._config())

    def transform(self, X) -> list[MolecularGraph]:
        """Map each input molecule to its final dreamed molecule."""
        result = self.dream_set(X)
        if result.errors:
            index, message = result.errors[0]
            raise EncodingError(f"item {index}: {message}")
        return [t.steps[-1].graph for t in result.trajectories]
