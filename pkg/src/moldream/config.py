"""Experiment configuration backed by a flat key = value file."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ConfigError
from .kvfile import read_kv

SPLITS = ("all", "train", "validation")


def _parse_ints(value: str) -> tuple[int, ...]:
    return tuple(int(part) for part in value.split())


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(value)


_PARSERS = {
    "dataset": str,
    "table": str,
    "labels": str,
    "activation": str,
    "split": str,
    "n_smallest": int,
    "l_max": int,
    "batch_size": int,
    "epochs": int,
    "seed": int,
    "dream_max_epochs": int,
    "bins": int,
    "learning_rate": float,
    "train_fraction": float,
    "dream_learning_rate": float,
    "grad_tolerance": float,
    "noise_upper_bound": float,
    "target_high": float,
    "target_low": float,
    "hidden_dims": _parse_ints,
    "renoise_each_epoch": _parse_bool,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs, with working defaults.

    ``table`` points at an alternative property-contribution file and
    ``labels`` at an external label file; ``labels`` wins when both are
    set. Unset targets default to dataset max + 2 std / min - 2 std at
    run time.
    """

    dataset: str
    n_smallest: int = 10000
    l_max: int = 20
    table: str | None = None
    labels: str | None = None
    hidden_dims: tuple[int, ...] = (500, 500, 500, 500)
    activation: str = "relu"
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 200
    train_fraction: float = 0.8
    seed: int = 0
    dream_learning_rate: float = 0.1
    dream_max_epochs: int = 500
    grad_tolerance: float = 1e-6
    noise_upper_bound: float = 0.9
    renoise_each_epoch: bool = False
    target_high: float | None = None
    target_low: float | None = None
    bins: int = 30
    split: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims",
                           tuple(int(d) for d in self.hidden_dims))
        if self.n_smallest < 1:
            raise ConfigError("n_smallest must be at least 1")
        if self.l_max < 1:
            raise ConfigError("l_max must be at least 1")
        if self.bins < 1:
            raise ConfigError("bins must be at least 1")
        if self.split not in SPLITS:
            raise ConfigError(
                f"split must be one of {', '.join(SPLITS)}, not {self.split!r}")

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        raw = read_kv(path)
        kwargs = {}
        for key, value in raw.items():
            parser = _PARSERS.get(key)
            if parser is None:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                kwargs[key] = parser(value)
            except ValueError:
                raise ConfigError(
                    f"bad value for {key!r}: {value!r}") from None
        if "dataset" not in kwargs:
            raise ConfigError("config must name a dataset file")
        return cls(**kwargs)

    def as_dict(self) -> dict:
        return asdict(self)
