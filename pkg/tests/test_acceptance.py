"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (value, tolerance, runtime
against its limit); the lines are printed in the pytest terminal summary
and also when this file is run directly with ``python tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from kanfraud.cli import main as cli_main
from kanfraud.data import Dataset, balance, split, standardize_apply, standardize_fit
from kanfraud.data import SplitDataset
from kanfraud.kan import KanConfig, kan_loss_and_gradients, kan_new, kan_predict, kan_train
from kanfraud.metrics import compute_metrics, logistic_baseline
from kanfraud.pca import pca_fit
from kanfraud.separability import quick_decision
from kanfraud.spline import basis_values, make_knots
from kanfraud.synthetic import make_spline_boundary, shuffled_labels, write_csv
from kanfraud.tuning import GaConfig, SearchSpace, enumerate_grid, estimate_search_time, ga_search, grid_search
from kanfraud.tuning import heuristic_config

from conftest import ACCEPTANCE_LINES
from oracles import HAND_CASES, central_difference, naive_basis_row, pair_count_auc, relative_errors
from test_pca import oracle_pca, random_dataset


def record(name, passed, detail, elapsed, limit):
    in_time = elapsed < limit
    ok = bool(passed and in_time)
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}; runtime {elapsed:.4g}s (limit {limit:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def scaled(parts):
    scaler, train = standardize_fit(parts.train)
    return SplitDataset(train, standardize_apply(scaler, parts.valid), standardize_apply(scaler, parts.test),
                        parts.split_seed, parts.fractions)


def test_heuristic_fidelity():
    expected = {30: [30, 15, 1], 51: [51, 25, 1], 27: [27, 13, 1], 35: [35, 17, 1], 50: [50, 25, 1]}
    heuristic_config(2)  # warm-up
    ok, slowest = True, 0.0
    for dim, width in expected.items():
        start = time.perf_counter()
        cfg = heuristic_config(dim)
        slowest = max(slowest, time.perf_counter() - start)
        ok &= cfg.width == width and cfg.k == 15 and cfg.grid == 5
    record("heuristic fidelity", ok, "5 reported widths, k=15, grid=5 exact", slowest, 0.001)


def test_grid_count_fidelity():
    start = time.perf_counter()
    genomes = enumerate_grid(SearchSpace((3, 30), (3, 20), (3, 30)))
    elapsed = time.perf_counter() - start
    record("grid-count fidelity", len(genomes) == 14112, f"{len(genomes)} genomes (want 14112)", elapsed, 0.01)


def test_estimator_fidelity():
    start = time.perf_counter()
    rounded = estimate_search_time(14, 105, 14112, round_mean=True)
    exact = estimate_search_time(14, 105, 14112)
    elapsed = time.perf_counter() - start
    ok = rounded.total_s == 846720 and rounded.total_h == 235.2 and exact.total_s == 839664
    record("estimator fidelity", ok,
           f"rounded {rounded.total_s:g}s / {rounded.total_h:g}h, exact {exact.total_s:g}s", elapsed, 0.001)


def test_spline_correctness():
    rng = np.random.default_rng(2024)
    elapsed = 0.0
    worst_sum, worst_oracle = 0.0, 0.0
    for _ in range(1000):
        lo = float(rng.uniform(-10, 10))
        hi = lo + float(rng.uniform(0.1, 20))
        grid = int(rng.integers(1, 31))
        degree = int(rng.integers(1, 21))
        t = float(rng.uniform(lo, hi))
        start = time.perf_counter()
        b = basis_values(make_knots(lo, hi, grid, degree), t)
        elapsed += time.perf_counter() - start
        worst_sum = max(worst_sum, abs(b.sum() - 1.0))
        worst_oracle = max(worst_oracle, np.abs(b - naive_basis_row(lo, hi, grid, degree, t)).max())
    record("spline correctness", worst_sum <= 1e-9 and worst_oracle <= 1e-12,
           f"max |sum-1| {worst_sum:.2e} (tol 1e-9), max oracle diff {worst_oracle:.2e} (tol 1e-12)",
           elapsed, 5.0)


def test_gradient_correctness():
    start = time.perf_counter()
    fractions = []
    for width, seed in (([3, 2, 1], 0), ([5, 3, 1], 1)):
        model = kan_new(KanConfig(width=width, seed=seed))
        rng = np.random.default_rng(seed + 10)
        X = rng.uniform(-0.95, 0.95, size=(20, width[0]))
        y = rng.integers(0, 2, size=20).astype(float)
        _, grads = kan_loss_and_gradients(model, X, y)
        analytic = [g for lg in grads for g in lg.arrays()]
        numeric = central_difference(lambda: kan_loss_and_gradients(model, X, y)[0], model.parameters(), 1e-5)
        fractions.append(float(np.mean(relative_errors(analytic, numeric) < 1e-4)))
    elapsed = time.perf_counter() - start
    record("gradient correctness", min(fractions) >= 0.99,
           f"share within 1e-4 relative: [3,2,1] {fractions[0]:.4f}, [5,3,1] {fractions[1]:.4f} (need >= 0.99)",
           elapsed, 30.0)


def test_learning_capability():
    start = time.perf_counter()
    data = make_spline_boundary(n=1000, dim=30, seed=0)
    balanced, _ = balance(data, seed=0)
    parts = scaled(split(balanced, seed=0))
    model = kan_train(kan_new(heuristic_config(parts.train.n_features)), parts.train, parts.valid)
    probs, _ = kan_predict(model, parts.test.features)
    kan_f1 = compute_metrics(probs, parts.test.labels).f1
    base_f1 = logistic_baseline(parts).f1
    elapsed = time.perf_counter() - start
    record("learning capability", kan_f1 >= 0.90 and kan_f1 - base_f1 >= 0.05,
           f"KAN test F1 {kan_f1:.4f} (need >= 0.90), logistic F1 {base_f1:.4f}, margin {kan_f1 - base_f1:.4f}"
           " (need >= 0.05)", elapsed, 300.0)


def test_decision_rule_discrimination():
    start = time.perf_counter()
    results = []
    for seed in range(5):
        data = make_spline_boundary(n=1000, dim=30, seed=seed)
        real = quick_decision(data, threshold=0.9, seed=seed).report
        null = quick_decision(shuffled_labels(data, seed=seed + 100), threshold=0.9, seed=seed).report
        results.append((real.suitable, null.suitable, real.best_score, null.best_score))
    elapsed = time.perf_counter() - start
    ok = all(r and not n for r, n, _, _ in results)
    detail = ", ".join(f"seed {i}: {rs:.3f}/{ns:.3f}" for i, (_, _, rs, ns) in enumerate(results))
    record("decision-rule discrimination", ok, f"real/shuffled best scores at threshold 0.9: {detail}",
           elapsed, 120.0)


def test_ga_vs_oracle():
    start = time.perf_counter()
    data = make_spline_boundary(n=200, dim=6, seed=0)
    parts = scaled(split(data, seed=0))
    space = SearchSpace((3, 5), (3, 5), (3, 5))
    base = KanConfig(width=[6, 1, 1], seed=0)
    oracle = grid_search(space, parts, base_config=base)
    ga = ga_search(space, GaConfig(seed=0), parts, base_config=base)
    elapsed = time.perf_counter() - start
    best, ga_best = oracle[0].fitness, ga.best.fitness
    record("GA vs oracle", ga_best >= 0.9 * best,
           f"GA best valid F1 {ga_best:.4f} vs exhaustive {best:.4f} (need >= {0.9 * best:.4f})", elapsed, 600.0)


def test_metrics_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 300))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        scores = np.round(rng.uniform(size=n), int(rng.integers(1, 5)))
        worst = max(worst, abs(compute_metrics(scores, labels).auc_roc - pair_count_auc(scores, labels)))
    hand_ok = 0
    for pred, labels, expected in HAND_CASES:
        r = compute_metrics(np.array(pred, dtype=float), np.array(labels))
        got = (r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn, r.precision, r.recall, r.f1, r.accuracy,
               r.fpr, r.tnr)
        hand_ok += all((g is None and w is None) or (g is not None and w is not None and abs(g - w) < 1e-15)
                       for g, w in zip(got, expected))
    elapsed = time.perf_counter() - start
    record("metrics oracle", worst <= 1e-12 and hand_ok == len(HAND_CASES),
           f"max AUC diff {worst:.2e} over 50 sets (tol 1e-12), hand cases {hand_ok}/{len(HAND_CASES)}",
           elapsed, 5.0)


def test_pca_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(31)
    worst_vec = worst_val = worst_var = 0.0
    for _ in range(20):
        X = random_dataset(rng)
        model = pca_fit(X)
        values, comps = oracle_pca(X)
        worst_vec = max(worst_vec, np.abs(model.components - comps).max())
        worst_val = max(worst_val, np.abs(model.eigenvalues - values).max())
        worst_var = max(worst_var, abs(model.eigenvalues.sum() - X.var(axis=0, ddof=1).sum()))
    elapsed = time.perf_counter() - start
    ok = max(worst_vec, worst_val, worst_var) <= 1e-8
    record("PCA oracle", ok,
           f"max component diff {worst_vec:.2e}, eigenvalue diff {worst_val:.2e}, variance gap {worst_var:.2e}"
           " (tol 1e-8)", elapsed, 10.0)


def _run_pipeline(root, files):
    sep, small = str(files["sep"]), str(files["small"])
    codes = [
        cli_main(["assess", "--input", sep, "--seed", "5", "--jobs", "1", "--out-dir", str(root / "assess")]),
        cli_main(["tune", "heuristic", "--input", sep, "--seed", "5", "--out-dir", str(root / "heuristic")]),
        cli_main(["tune", "grid", "--input", small, "--seed", "5", "--budget", "3", "--epochs", "40",
                  "--jobs", "1", "--out-dir", str(root / "grid")]),
        cli_main(["tune", "ga", "--input", small, "--seed", "5", "--epochs", "40", "--population", "4",
                  "--generations", "2", "--width2-range", "3..4", "--k-range", "3..4", "--grid-range", "3..4",
                  "--jobs", "1", "--out-dir", str(root / "ga")]),
        cli_main(["train", "--input", sep, "--seed", "5", "--out-dir", str(root / "model")]),
        cli_main(["evaluate", "--input", sep, "--out-dir", str(root / "model")]),
    ]
    return codes


def _non_timing_artifacts(root):
    import json

    out = {}
    for manifest in sorted(root.rglob("*.manifest.json")):
        doc = json.loads(manifest.read_text())
        for name in doc["artifact_paths"]:
            if name not in doc["timing_artifacts"]:
                path = manifest.parent / name
                out[str(path.relative_to(root))] = path.read_bytes()
    return out


def test_determinism(tmp_path, capsys):
    start = time.perf_counter()
    data = make_spline_boundary(n=1000, dim=30, seed=0)
    files = {"sep": tmp_path / "sep.csv", "small": tmp_path / "small.csv"}
    write_csv(data, files["sep"])
    write_csv(make_spline_boundary(n=200, dim=6, seed=0), files["small"])
    codes_a = _run_pipeline(tmp_path / "a", files)
    codes_b = _run_pipeline(tmp_path / "b", files)
    capsys.readouterr()
    a, b = _non_timing_artifacts(tmp_path / "a"), _non_timing_artifacts(tmp_path / "b")
    differing = sorted(k for k in a if a[k] != b.get(k))
    elapsed = time.perf_counter() - start
    ok = codes_a == codes_b == [0] * 6 and a.keys() == b.keys() and not differing and len(a) >= 15
    record("determinism", ok,
           f"{len(a)} non-timing artifacts compared across reruns, {len(differing)} differ {differing[:3]}",
           elapsed, 600.0)


def test_balancing_protocol():
    cases = [((9000, 300000), (7500, 7500), "cap-7500"), ((97, 200000), (97, 97), "match-minority"),
             ((50, 50), (50, 50), "match-minority")]
    fixtures = []
    for (fraud, nonfraud), _, _ in cases:
        y = np.r_[np.ones(fraud, dtype=np.int64), np.zeros(nonfraud, dtype=np.int64)]
        fixtures.append(Dataset(np.arange(y.size, dtype=np.float64)[:, None], y))
    start = time.perf_counter()
    outcomes = [balance(d, seed=0) for d in fixtures]
    elapsed = time.perf_counter() - start
    ok = all(
        out.class_counts() == kept and rep.kept_counts == kept and rep.rule_applied == rule
        and rep.original_counts == orig
        for (out, rep), (orig, kept, rule) in zip(outcomes, cases)
    )
    detail = ", ".join(f"{o[0]}/{o[1]} -> {r.kept_counts[0]}/{r.kept_counts[1]} {r.rule_applied}"
                       for (o, _, _), (_, r) in zip(cases, outcomes))
    record("balancing protocol", ok, detail, elapsed, 1.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
