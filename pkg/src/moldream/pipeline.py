"""Dataset ingestion, the end-to-end experiment driver, and artifacts."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .dream import DreamConfig, DreamSetResult, dream_set, trajectory_json_lines
from .errors import BadRange, EmptyDataset, EmptyInput, FileUnreadable, MoldreamError
from .graph import MolecularGraph, canonical_key, composition, parse_smiles
from .net import MlpRegressor
from .oracle import (
    DEFAULT_TABLE,
    ExternalLabelOracle,
    PropertyTable,
    Stats,
    TableOracle,
    dataset_stats,
)
from .selfies import DEFAULT_L_MAX, encode, to_onehot


@dataclass(frozen=True)
class Entry:
    """One usable dataset molecule with its token form and label."""

    graph: MolecularGraph
    tokens: tuple[str, ...]
    label: float


@dataclass(frozen=True)
class Dataset:
    entries: tuple[Entry, ...]
    skips: tuple[tuple[int, str], ...]


def ingest(path: str, n_smallest: int, l_max: int = DEFAULT_L_MAX,
           oracle=None) -> Dataset:
    """Read one SMILES per line and keep the n smallest usable molecules.

    Unparseable or unencodable lines and repeats of an already-seen
    molecule are skipped and recorded as (line number, reason); blank
    lines and # comments are ignored outright. Survivors are sorted by
    (heavy-atom count, token length, identity key) before the cut, then
    labeled through the oracle.
    """
    if n_smallest < 1:
        raise BadRange("n_smallest must be at least 1")
    if oracle is None:
        oracle = TableOracle()
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FileUnreadable(f"cannot read dataset {path!r}: {exc}") from None

    kept: list[tuple[MolecularGraph, tuple[str, ...], str]] = []
    seen: set[str] = set()
    skips: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            g = parse_smiles(text)
        except MoldreamError as exc:
            skips.append((lineno, f"{type(exc).__name__}: {exc}"))
            continue
        key = canonical_key(g).text
        if key in seen:
            skips.append((lineno, f"duplicate of {key}"))
            continue
        try:
            tokens = tuple(encode(g, l_max))
        except MoldreamError as exc:
            skips.append((lineno, f"{type(exc).__name__}: {exc}"))
            continue
        seen.add(key)
        kept.append((g, tokens, key))

    if not kept:
        raise EmptyDataset(f"no usable molecules in {path!r}")
    kept.sort(key=lambda item: (len(item[0].atoms), len(item[1]), item[2]))
    entries = tuple(Entry(g, tokens, float(oracle.label(g)))
                    for g, tokens, _ in kept[:n_smallest])
    return Dataset(entries, tuple(skips))


def histogram(values, bins: int,
              value_range: tuple[float, float]) -> list[tuple[float, float, int]]:
    """Fixed-range counts; bins are left-closed and the last is also
    right-closed. Out-of-range values land in the end bins so the total
    always equals the number of values."""
    if bins < 1:
        raise BadRange("bins must be at least 1")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not lo < hi:
        raise BadRange("histogram range must satisfy lo < hi")
    width = (hi - lo) / bins
    edges = [lo + i * width for i in range(bins)] + [hi]
    counts = [0] * bins
    for v in values:
        idx = int((float(v) - lo) // width)
        counts[min(max(idx, 0), bins - 1)] += 1
    return [(edges[i], edges[i + 1], counts[i]) for i in range(bins)]


@dataclass(frozen=True)
class CompositionShift:
    target_label: str
    elements: dict[str, tuple[float, float, float]]


def composition_shift(trajectories, target_label: str) -> CompositionShift:
    """Mean element counts (hydrogens included) at the first and last step."""
    trajs = list(trajectories)
    if not trajs:
        raise EmptyInput("no trajectories to compare")
    befores = [composition(t.steps[0].graph) for t in trajs]
    afters = [composition(t.steps[-1].graph) for t in trajs]
    elements = sorted({el for comp in befores + afters for el in comp})
    n = len(trajs)
    table = {}
    for el in elements:
        before = sum(c.get(el, 0) for c in befores) / n
        after = sum(c.get(el, 0) for c in afters) / n
        table[el] = (before, after, after - before)
    return CompositionShift(target_label, table)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    dataset: Dataset
    regressor: MlpRegressor
    high: DreamSetResult
    low: DreamSetResult
    report: dict


def _make_oracle(cfg: ExperimentConfig):
    if cfg.labels is not None:
        return ExternalLabelOracle.from_file(cfg.labels)
    table = PropertyTable.from_file(cfg.table) if cfg.table else DEFAULT_TABLE
    return TableOracle(table)


def _stats_dict(stats: Stats) -> dict:
    return {"mean": stats.mean, "std": stats.std, "min": stats.min,
            "max": stats.max, "count": stats.count}


def _dream_config(cfg: ExperimentConfig, target: float) -> DreamConfig:
    return DreamConfig(
        target=target,
        learning_rate=cfg.dream_learning_rate,
        max_epochs=cfg.dream_max_epochs,
        grad_tolerance=cfg.grad_tolerance,
        noise_upper_bound=cfg.noise_upper_bound,
        seed=cfg.seed,
        renoise_each_epoch=cfg.renoise_each_epoch,
    )


def train_regressor(cfg: ExperimentConfig,
                    oracle=None) -> tuple[Dataset, MlpRegressor]:
    """Ingest the configured dataset and fit the regressor on all of it."""
    if oracle is None:
        oracle = _make_oracle(cfg)
    data = ingest(cfg.dataset, cfg.n_smallest, cfg.l_max, oracle)
    X = np.stack([to_onehot(e.tokens, cfg.l_max).ravel() for e in data.entries])
    y = np.array([e.label for e in data.entries])
    reg = MlpRegressor(
        hidden_dims=cfg.hidden_dims,
        activation=cfg.activation,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
        train_fraction=cfg.train_fraction,
        seed=cfg.seed,
    ).fit(X, y)
    return data, reg


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Ingest, train, dream toward both targets, and score the outcome."""
    oracle = _make_oracle(cfg)
    data, reg = train_regressor(cfg, oracle)

    if cfg.split == "train":
        subset = [int(i) for i in reg.train_indices_]
    elif cfg.split == "validation":
        subset = [int(i) for i in reg.val_indices_]
    else:
        subset = list(range(len(data.entries)))

    label_stats = dataset_stats([e.label for e in data.entries])
    t_high = (cfg.target_high if cfg.target_high is not None
              else label_stats.max + 2.0 * label_stats.std)
    t_low = (cfg.target_low if cfg.target_low is not None
             else label_stats.min - 2.0 * label_stats.std)

    graphs = [data.entries[i].graph for i in subset]
    high = dream_set(reg, graphs, _dream_config(cfg, t_high))
    low = dream_set(reg, graphs, _dream_config(cfg, t_low))

    # Stats must cover identical molecule sets, so only positions where
    # both arms produced a trajectory count (ingest makes failures
    # impossible in practice, since it already encoded every entry).
    ok = [j for j in range(len(subset))
          if high.trajectories[j] is not None
          and low.trajectories[j] is not None]
    original_values = [data.entries[subset[j]].label for j in ok]
    high_values = [float(oracle.label(high.trajectories[j].steps[-1].graph))
                   for j in ok]
    low_values = [float(oracle.label(low.trajectories[j].steps[-1].graph))
                  for j in ok]
    if not original_values:
        raise EmptyDataset("no molecule survived both dreaming arms")

    all_values = original_values + high_values + low_values
    lo, hi = min(all_values), max(all_values)
    if lo == hi:
        # One-point distribution; widen so the shared binning is usable.
        lo, hi = lo - 0.5, hi + 0.5
    columns = [histogram(vs, cfg.bins, (lo, hi))
               for vs in (original_values, high_values, low_values)]
    rows = [[columns[0][i][0], columns[0][i][1],
             columns[0][i][2], columns[1][i][2], columns[2][i][2]]
            for i in range(cfg.bins)]

    omin, omax = min(original_values), max(original_values)
    beyond = {
        arm: {"above_max": sum(v > omax for v in values),
              "below_min": sum(v < omin for v in values)}
        for arm, values in (("high", high_values), ("low", low_values))
    }
    comp = {
        arm: {el: list(entry) for el, entry in
              composition_shift([r.trajectories[j] for j in ok], arm).elements.items()}
        for arm, r in (("high", high), ("low", low))
    }

    report = {
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "n_molecules": len(ok),
        "targets": {"high": float(t_high), "low": float(t_low)},
        "original": _stats_dict(dataset_stats(original_values)),
        "dreamed_high": _stats_dict(dataset_stats(high_values)),
        "dreamed_low": _stats_dict(dataset_stats(low_values)),
        "values": {
            "original": original_values,
            "dreamed_high": high_values,
            "dreamed_low": low_values,
        },
        "beyond_original": beyond,
        "histogram": {"range": [lo, hi], "bins": cfg.bins, "rows": rows},
        "composition": comp,
        "dream_errors": {
            "high": [[i, message] for i, message in high.errors],
            "low": [[i, message] for i, message in low.errors],
        },
        "skips": len(data.skips),
    }
    return ExperimentResult(cfg, data, reg, high, low, report)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_artifacts(result: ExperimentResult, out_dir: str) -> None:
    """Write report.json, CSV summaries, trajectories, and the skip log."""
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report_json(result.report))

    with open(os.path.join(out_dir, "histograms.csv"), "w", encoding="utf-8") as fh:
        fh.write("bin_lo,bin_hi,original,dreamed_high,dreamed_low\n")
        for blo, bhi, orig, high, low in result.report["histogram"]["rows"]:
            fh.write(f"{blo!r},{bhi!r},{orig},{high},{low}\n")

    with open(os.path.join(out_dir, "stats.csv"), "w", encoding="utf-8") as fh:
        fh.write("set,mean,std,min,max,count\n")
        for name in ("original", "dreamed_high", "dreamed_low"):
            s = result.report[name]
            fh.write(f"{name},{s['mean']!r},{s['std']!r},"
                     f"{s['min']!r},{s['max']!r},{s['count']}\n")

    with open(os.path.join(out_dir, "trajectories.jsonl"), "w",
              encoding="utf-8") as fh:
        for arm, dream_result in (("high", result.high), ("low", result.low)):
            for traj in dream_result.trajectories:
                if traj is None:
                    continue
                molecule = canonical_key(traj.steps[0].graph).text
                for line in trajectory_json_lines(traj):
                    record = {"molecule": molecule, "arm": arm,
                              **json.loads(line)}
                    fh.write(json.dumps(record) + "\n")

    with open(os.path.join(out_dir, "skips.txt"), "w", encoding="utf-8") as fh:
        for lineno, reason in result.dataset.skips:
            fh.write(f"{lineno}\t{reason}\n")
