"""Command-line entry points and exit-code contract."""

import json

import pytest

from moldream.cli import main
from moldream.net import load_model

DATASET = [
    "C", "N", "O", "CC", "CO", "CN", "CF", "C=O", "C#N",
    "CCO", "CCN", "CCC", "CC=O", "COC", "CNC", "OCCO",
    "CC(C)C", "CC(N)O", "C1CC1", "C1CCC1", "FCF", "NCO",
    "OCO", "CCCO",
]


@pytest.fixture()
def data_path(tmp_path):
    path = tmp_path / "data.smi"
    path.write_text("".join(s + "\n" for s in DATASET))
    return str(path)


@pytest.fixture()
def config_path(tmp_path, data_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        f"dataset = {data_path}\n"
        "n_smallest = 20\n"
        "l_max = 8\n"
        "hidden_dims = 16 8\n"
        "learning_rate = 0.005\n"
        "batch_size = 8\n"
        "epochs = 10\n"
        "train_fraction = 0.8\n"
        "seed = 3\n"
        "dream_learning_rate = 0.05\n"
        "dream_max_epochs = 10\n"
        "bins = 5\n"
    )
    return str(path)


def test_no_subcommand_is_usage_error():
    assert main([]) == 1


def test_unknown_flag_is_usage_error():
    assert main(["ingest", "--bogus"]) == 1


def test_unknown_subcommand_is_usage_error():
    assert main(["frobnicate"]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_ingest_reports_counts(tmp_path, capsys):
    path = tmp_path / "mix.smi"
    path.write_text("CCO\nCCO\nc1ccccc1\nC\n")
    assert main(["ingest", "--dataset", str(path)]) == 0
    out = capsys.readouterr().out
    assert "entries: 2" in out
    assert "skips: 2" in out


def test_ingest_missing_file_exits_two(tmp_path, capsys):
    assert main(["ingest", "--dataset", str(tmp_path / "nope.smi")]) == 2
    assert "error:" in capsys.readouterr().err


def test_ingest_empty_dataset_exits_two(tmp_path, capsys):
    path = tmp_path / "empty.smi"
    path.write_text("c1ccccc1\n")
    assert main(["ingest", "--dataset", str(path)]) == 2


def test_train_writes_loadable_model(tmp_path, config_path):
    out = tmp_path / "model.txt"
    assert main(["train", "--config", config_path, "--out", str(out)]) == 0
    reg = load_model(str(out))
    assert reg.model_.dims[0] == 8 * 12


def test_train_without_dataset_or_config_exits_two(tmp_path):
    assert main(["train", "--out", str(tmp_path / "m.txt")]) == 2


def test_train_missing_out_flag_is_usage_error(config_path):
    assert main(["train", "--config", config_path]) == 1


def test_dream_prints_trajectory(tmp_path, config_path, capsys):
    model = tmp_path / "model.txt"
    assert main(["train", "--config", config_path, "--out", str(model)]) == 0
    capsys.readouterr()
    rc = main(["dream", "--model", str(model), "--smiles", "CCO",
               "--target", "5.0", "--seed", "1"])
    assert rc == 0
    captured = capsys.readouterr()
    lines = captured.out.strip().splitlines()
    assert lines
    first = json.loads(lines[0])
    assert first["epoch"] == 0
    assert first["smiles"] == "CCO"
    for line in lines[1:]:
        json.loads(line)
    assert "termination" in captured.err


def test_dream_invalid_smiles_exits_two(tmp_path, config_path, capsys):
    model = tmp_path / "model.txt"
    main(["train", "--config", config_path, "--out", str(model)])
    capsys.readouterr()
    assert main(["dream", "--model", str(model), "--smiles", "C(",
                 "--target", "1.0"]) == 2


def test_dream_missing_model_exits_two(tmp_path):
    assert main(["dream", "--model", str(tmp_path / "no.txt"),
                 "--smiles", "C", "--target", "1.0"]) == 2


def test_experiment_writes_artifacts(tmp_path, config_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["experiment", "--config", config_path,
                 "--out-dir", str(out_dir)]) == 0
    for name in ("report.json", "histograms.csv", "stats.csv",
                 "trajectories.jsonl", "skips.txt"):
        assert (out_dir / name).exists()
    assert "report.json" in capsys.readouterr().out
    report = json.loads((out_dir / "report.json").read_text())
    assert report["n_molecules"] == 20


def test_experiment_split_flag_overrides(tmp_path, config_path):
    out_dir = tmp_path / "out_val"
    assert main(["experiment", "--config", config_path,
                 "--out-dir", str(out_dir), "--split", "validation"]) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["n_molecules"] == 4


def test_experiment_bad_config_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dataset = x\nflavor = mint\n")
    assert main(["experiment", "--config", str(cfg),
                 "--out-dir", str(tmp_path / "o")]) == 2
    assert "error:" in capsys.readouterr().err


def test_probe_prints_composition_table(tmp_path, config_path, capsys):
    out_dir = tmp_path / "out"
    main(["experiment", "--config", config_path, "--out-dir", str(out_dir)])
    capsys.readouterr()
    rc = main(["probe", "--trajectories", str(out_dir / "trajectories.jsonl")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "arm high" in out
    assert "arm low" in out
    assert "H" in out


def test_probe_missing_file_exits_two(tmp_path):
    assert main(["probe", "--trajectories",
                 str(tmp_path / "no.jsonl")]) == 2


def test_probe_empty_file_exits_two(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert main(["probe", "--trajectories", str(path)]) == 2
