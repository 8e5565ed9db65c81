"""End-to-end acceptance checks.

Each test prints one ``ACCEPTANCE n: PASS/FAIL`` line (run pytest with
``-s`` to see them live). Criterion 7 may print WARN instead: its claim
is a single-run observation, so absence is flagged rather than failed.
The suite builds its own deterministic dataset of decoder-generated
molecules, so no external data is needed.
"""

import time

import numpy as np
import pytest

from moldream.config import ExperimentConfig
from moldream.graph import MAX_VALENCE, canonical_key, write_smiles
from moldream.net import Mlp, MlpRegressor, backward, forward
from moldream.pipeline import ingest, report_json, run_experiment
from moldream.selfies import ALPHABET, ALPHABET_SIZE, decode, to_onehot

SEEDS = (11, 12, 13)
N_MOLECULES = 1000


def verdict(n: int, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    if not ok:
        pytest.fail(f"criterion {n}: {detail}")


@pytest.fixture(scope="module")
def synth_dataset(tmp_path_factory):
    """Deterministic dataset file: distinct molecules from random decodes."""
    rng = np.random.default_rng(20260819)
    seen = set()
    lines = []
    while len(lines) < 1300:
        length = int(rng.integers(4, 21))
        idx = rng.integers(0, ALPHABET_SIZE, size=length)
        g = decode([ALPHABET[i] for i in idx])
        if not g.atoms:
            continue
        key = canonical_key(g).text
        if key in seen:
            continue
        seen.add(key)
        lines.append(write_smiles(g))
    path = tmp_path_factory.mktemp("data") / "synthetic.smi"
    path.write_text("".join(s + "\n" for s in lines))
    return str(path)


@pytest.fixture(scope="module")
def ingested(synth_dataset):
    return ingest(synth_dataset, n_smallest=N_MOLECULES, l_max=20)


def acceptance_config(dataset_path, seed, noise_upper_bound):
    # Desk-scale training; dream rate 0.01 keeps the noise ablation
    # meaningful (at 0.1 even barely-noised inputs optimize fully).
    return ExperimentConfig(
        dataset=dataset_path,
        n_smallest=N_MOLECULES,
        l_max=20,
        hidden_dims=(64, 32),
        learning_rate=5e-3,
        batch_size=64,
        epochs=50,
        train_fraction=0.8,
        seed=seed,
        dream_learning_rate=0.01,
        dream_max_epochs=100,
        noise_upper_bound=noise_upper_bound,
        bins=30,
    )


@pytest.fixture(scope="module")
def experiment_runs(synth_dataset):
    """(seed, noise bound) -> (ExperimentResult, wall seconds)."""
    runs = {}
    for ub in (0.9, 0.1):
        for seed in SEEDS:
            cfg = acceptance_config(synth_dataset, seed, ub)
            start = time.perf_counter()
            result = run_experiment(cfg)
            runs[(seed, ub)] = (result, time.perf_counter() - start)
    return runs


def graph_is_valid(g) -> bool:
    n = len(g.atoms)
    seen_pairs = set()
    order_sum = [0] * n
    for a, b, order in g.bonds:
        if not (0 <= a < b < n) or order not in (1, 2, 3):
            return False
        if (a, b) in seen_pairs:
            return False
        seen_pairs.add((a, b))
        order_sum[a] += order
        order_sum[b] += order
    return all(order_sum[i] <= MAX_VALENCE[el]
               for i, el in enumerate(g.atoms))


def test_acceptance_1_grammar_robustness():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    failures = 0
    for _ in range(10_000):
        length = int(rng.integers(1, 21))
        tokens = [ALPHABET[i] for i in rng.integers(0, ALPHABET_SIZE, length)]
        try:
            g = decode(tokens)
        except Exception:
            failures += 1
            continue
        if not graph_is_valid(g):
            failures += 1
    elapsed = time.perf_counter() - start
    verdict(1, failures == 0 and elapsed < 5.0,
            f"{failures} failures in 10000 decodes, {elapsed:.2f}s")


def test_acceptance_2_codec_roundtrip(ingested):
    start = time.perf_counter()
    good = sum(canonical_key(decode(list(e.tokens))) == canonical_key(e.graph)
               for e in ingested.entries)
    elapsed = time.perf_counter() - start
    total = len(ingested.entries)
    verdict(2, good == total and elapsed < 10.0,
            f"{good}/{total} round-trips, {elapsed:.2f}s")


def test_acceptance_3_gradient_check():
    rng = np.random.default_rng(7)
    eps = 1e-5
    start = time.perf_counter()
    worst = 0.0
    bad = 0
    for trial in range(100):
        depth = int(rng.integers(1, 3))
        dims = ([int(rng.integers(2, 6))]
                + [int(rng.integers(2, 6)) for _ in range(depth)] + [1])
        model = Mlp.init(dims, seed=int(rng.integers(1 << 30)))
        for layer in range(len(model.biases)):
            # Zero biases put ReLU pre-activations exactly on the kink,
            # where central differences legitimately disagree; jitter off it.
            model.biases[layer] += rng.normal(scale=0.3,
                                              size=model.biases[layer].shape)
        x = rng.normal(size=dims[0])

        def output_at(xv):
            return forward(model, xv)[0]

        _, cache = forward(model, x)
        grads = backward(model, cache, 1.0)

        def agree(analytic, fd):
            return abs(analytic - fd) <= 1e-4 * max(abs(analytic),
                                                    abs(fd)) + 1e-6

        ok = True
        for i in range(dims[0]):
            xp, xm = x.copy(), x.copy()
            xp[i] += eps
            xm[i] -= eps
            fd = (output_at(xp) - output_at(xm)) / (2 * eps)
            worst = max(worst, abs(grads.input[i] - fd))
            ok &= agree(grads.input[i], fd)
        for layer in range(len(model.weights)):
            for idx in np.ndindex(model.weights[layer].shape):
                saved = model.weights[layer][idx]
                model.weights[layer][idx] = saved + eps
                up = output_at(x)
                model.weights[layer][idx] = saved - eps
                down = output_at(x)
                model.weights[layer][idx] = saved
                fd = (up - down) / (2 * eps)
                ok &= agree(grads.weights[layer][idx], fd)
            for idx in np.ndindex(model.biases[layer].shape):
                saved = model.biases[layer][idx]
                model.biases[layer][idx] = saved + eps
                up = output_at(x)
                model.biases[layer][idx] = saved - eps
                down = output_at(x)
                model.biases[layer][idx] = saved
                fd = (up - down) / (2 * eps)
                ok &= agree(grads.biases[layer][idx], fd)
        bad += not ok
    elapsed = time.perf_counter() - start
    verdict(3, bad == 0 and elapsed < 30.0,
            f"{bad}/100 nets disagree, {elapsed:.2f}s")


def test_acceptance_4_regression_sanity(ingested):
    X = np.stack([to_onehot(e.tokens, 20).ravel() for e in ingested.entries])
    y = np.array([e.label for e in ingested.entries])
    start = time.perf_counter()
    reg = MlpRegressor(hidden_dims=(64, 32), learning_rate=5e-3,
                       batch_size=32, epochs=120, seed=0).fit(X, y)
    elapsed = time.perf_counter() - start
    val = reg.val_indices_
    mse = float(np.mean((reg.predict(X[val]) - y[val]) ** 2))
    bound = 0.25 * float(y[val].var())
    verdict(4, mse < bound and elapsed < 300.0,
            f"held-out MSE {mse:.4f} vs bound {bound:.4f}, {elapsed:.0f}s")


def arm_shifts(report):
    mean = report["original"]["mean"]
    return (report["dreamed_high"]["mean"] - mean,
            report["dreamed_low"]["mean"] - mean)


def test_acceptance_5_distribution_shift(experiment_runs):
    result, elapsed = experiment_runs[(SEEDS[0], 0.9)]
    report = result.report
    high_shift, low_shift = arm_shifts(report)
    need = 0.2 * report["original"]["std"]
    ok = high_shift >= need and low_shift <= -need and elapsed < 600.0
    verdict(5, ok, f"high {high_shift:+.3f}, low {low_shift:+.3f}, "
                   f"need ±{need:.3f}, {elapsed:.0f}s")


def test_acceptance_6_noise_ablation(experiment_runs):
    means = {}
    for ub in (0.9, 0.1):
        shifts = [arm_shifts(experiment_runs[(seed, ub)][0].report)
                  for seed in SEEDS]
        means[ub] = (float(np.mean([s[0] for s in shifts])),
                     float(np.mean([s[1] for s in shifts])))
    ok = (abs(means[0.1][0]) < abs(means[0.9][0])
          and abs(means[0.1][1]) < abs(means[0.9][1]))
    verdict(6, ok, f"0.9 -> high {means[0.9][0]:+.3f} low {means[0.9][1]:+.3f}; "
                   f"0.1 -> high {means[0.1][0]:+.3f} low {means[0.1][1]:+.3f}")


def test_acceptance_7_extremal_generation(experiment_runs):
    consistent = True
    beyond_seen = 0
    for (seed, ub), (result, _) in experiment_runs.items():
        report = result.report
        original = report["values"]["original"]
        omin, omax = min(original), max(original)
        for arm in ("high", "low"):
            values = report["values"][f"dreamed_{arm}"]
            recomputed = {"above_max": sum(v > omax for v in values),
                          "below_min": sum(v < omin for v in values)}
            consistent &= report["beyond_original"][arm] == recomputed
        if ub == 0.9:
            beyond_seen += report["beyond_original"]["high"]["above_max"] >= 1
    if not consistent:
        verdict(7, False, "beyond-min/max counts disagree with raw values")
    elif beyond_seen:
        verdict(7, True, f"{beyond_seen}/3 seeds beat the original max")
    else:
        # Beating the original max is a single-run observation; absence warns.
        print("ACCEPTANCE 7: WARN (no run beat the original max)")


def test_acceptance_8_nitrogen_probe(experiment_runs):
    report = experiment_runs[(SEEDS[0], 0.9)][0].report
    before, after, delta = report["composition"]["low"].get("N", (0.0, 0.0, 0.0))
    verdict(8, after >= before,
            f"mean N {before:.3f} -> {after:.3f} ({delta:+.3f})")


def test_acceptance_9_determinism(experiment_runs, synth_dataset):
    first = experiment_runs[(SEEDS[0], 0.9)][0]
    again = run_experiment(acceptance_config(synth_dataset, SEEDS[0], 0.9))
    identical = (report_json(first.report).encode()
                 == report_json(again.report).encode())
    verdict(9, identical, "repeated run reproduces report.json byte-for-byte")
