"""Command-line interface.

Exit codes: 0 on success, 1 for usage errors, 2 for data or
configuration errors reported as ``error: ...`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .config import SPLITS, ExperimentConfig
from .dream import DreamConfig, dream, trajectory_json_lines
from .errors import ConfigError, EmptyInput, FileUnreadable, MoldreamError
from .graph import composition, parse_smiles
from .net import load_model, save_model
from .oracle import ExternalLabelOracle, PropertyTable, TableOracle
from .pipeline import ingest, run_experiment, train_regressor, write_artifacts


def _oracle_from_flags(table_path, labels_path):
    if labels_path:
        return ExternalLabelOracle.from_file(labels_path)
    if table_path:
        return TableOracle(PropertyTable.from_file(table_path))
    return None


def _cmd_ingest(args) -> int:
    oracle = _oracle_from_flags(args.table, args.labels)
    ds = ingest(args.dataset, args.n_smallest, args.l_max, oracle)
    print(f"entries: {len(ds.entries)}")
    print(f"skips: {len(ds.skips)}")
    for lineno, reason in ds.skips:
        print(f"  line {lineno}: {reason}")
    return 0


def _resolve_train_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        if args.dataset:
            cfg = replace(cfg, dataset=args.dataset)
        return cfg
    if not args.dataset:
        raise ConfigError("train needs --config or --dataset")
    return ExperimentConfig(dataset=args.dataset)


def _cmd_train(args) -> int:
    cfg = _resolve_train_config(args)
    data, reg = train_regressor(cfg)
    save_model(reg, args.out)
    print(f"trained on {len(data.entries)} molecules")
    if reg.history_:
        train_mse, val_mse = reg.history_[-1]
        print(f"final train mse {train_mse:.6f}, "
              f"validation mse {val_mse:.6f} (normalized)")
    print(f"model written to {args.out}")
    return 0


def _cmd_dream(args) -> int:
    reg = load_model(args.model)
    start = parse_smiles(args.smiles)
    cfg = DreamConfig(
        target=args.target,
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        grad_tolerance=args.grad_tolerance,
        noise_upper_bound=args.noise_upper,
        seed=args.seed,
        renoise_each_epoch=args.renoise,
    )
    traj = dream(reg, start, cfg)
    for line in trajectory_json_lines(traj):
        print(line)
    print(f"termination: {traj.termination}, "
          f"final prediction {traj.final_prediction!r}", file=sys.stderr)
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.split:
        cfg = replace(cfg, split=args.split)
    result = run_experiment(cfg)
    write_artifacts(result, args.out_dir)
    report = result.report
    print(f"molecules: {report['n_molecules']}")
    print(f"original mean {report['original']['mean']:.4f}, "
          f"dreamed high mean {report['dreamed_high']['mean']:.4f}, "
          f"dreamed low mean {report['dreamed_low']['mean']:.4f}")
    print(f"report: {os.path.join(args.out_dir, 'report.json')}")
    return 0


def _cmd_probe(args) -> int:
    try:
        with open(args.trajectories, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FileUnreadable(
            f"cannot read trajectories {args.trajectories!r}: {exc}") from None

    # (arm, molecule) -> (first_epoch, first_smiles, last_epoch, last_smiles)
    groups: dict[tuple[str, str], tuple[int, str, int, str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError:
            raise ConfigError(f"bad JSON on line {lineno}") from None
        try:
            key = (record["arm"], record["molecule"])
            epoch = int(record["epoch"])
            smiles = record["smiles"]
        except (KeyError, TypeError):
            raise ConfigError(
                f"line {lineno} lacks arm/molecule/epoch/smiles") from None
        if key not in groups:
            groups[key] = (epoch, smiles, epoch, smiles)
        else:
            first_e, first_s, last_e, last_s = groups[key]
            if epoch < first_e:
                first_e, first_s = epoch, smiles
            if epoch >= last_e:
                last_e, last_s = epoch, smiles
            groups[key] = (first_e, first_s, last_e, last_s)
    if not groups:
        raise EmptyInput("no trajectory records")

    for arm in sorted({arm for arm, _ in groups}):
        befores = []
        afters = []
        for (group_arm, _), (_, first_s, _, last_s) in groups.items():
            if group_arm != arm:
                continue
            befores.append(composition(parse_smiles(first_s)))
            afters.append(composition(parse_smiles(last_s)))
        elements = sorted({el for comp in befores + afters for el in comp})
        n = len(befores)
        print(f"arm {arm} ({n} molecules)")
        print(f"  {'element':<8}{'before':>10}{'after':>10}{'delta':>10}")
        for el in elements:
            before = sum(c.get(el, 0) for c in befores) / n
            after = sum(c.get(el, 0) for c in afters) / n
            print(f"  {el:<8}{before:>10.3f}{after:>10.3f}"
                  f"{after - before:>+10.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moldream",
        description="Train a property regressor on small molecules and "
                    "dream them toward property targets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset and report skips")
    p.add_argument("--dataset", required=True, help="SMILES file, one per line")
    p.add_argument("--n-smallest", type=int, default=10000)
    p.add_argument("--l-max", type=int, default=20)
    p.add_argument("--table", help="property contribution file")
    p.add_argument("--labels", help="external label file (SMILES<TAB>value)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="train a regressor and save it")
    p.add_argument("--dataset", help="overrides the config's dataset")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("dream", help="dream one molecule toward a target")
    p.add_argument("--model", required=True)
    p.add_argument("--smiles", required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-epochs", type=int, default=500)
    p.add_argument("--grad-tolerance", type=float, default=1e-6)
    p.add_argument("--noise-upper", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--renoise", action="store_true",
                   help="re-draw the noise positions every epoch")
    p.set_defaults(func=_cmd_dream)

    p = sub.add_parser("experiment", help="run the full pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--split", choices=SPLITS,
                   help="restrict dreaming to one side of the train split")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("probe", help="composition table from trajectories")
    p.add_argument("--trajectories", required=True,
                   help="trajectories.jsonl from an experiment run")
    p.set_defaults(func=_cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; remap so
        # usage problems are 1 and data problems keep 2.
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except MoldreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
