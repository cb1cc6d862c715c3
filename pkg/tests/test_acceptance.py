"""
Acceptance suite. Each test prints one ``[ACCEPTANCE n] PASS|FAIL|SKIP`` line
(visible with ``pytest -s`` or in the ``-v`` log) before asserting.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from sdidkit.cli import main
from sdidkit.estimators import estimate
from sdidkit.inference import confidence_interval
from sdidkit.optim import SimplexLSProblem, frank_wolfe_gap, objective, solve_simplex_ls
from sdidkit.panel import demean_pre, growth_transform
from sdidkit.replication import replicate
from sdidkit.simulate import DGPConfig, run_monte_carlo

from conftest import FIXTURE, make_panel
from test_estimators import did_by_hand
from test_optim import grid_optimum

FSO_ENV = "SDIDKIT_FSO_PANEL"


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        with capsys.disabled():
            print(f"\n[ACCEPTANCE {number}] {status}: {detail}")
        return ok

    return emit


def test_1_did_oracle(report):
    rng = np.random.default_rng(1)
    cases = []
    for _ in range(1000):
        n, T = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        cases.append((rng.normal(size=(n, T)) * 100, int(rng.integers(1, n)), int(rng.integers(1, T))))
    start = time.perf_counter()
    atts = [estimate(make_panel(Y, n1, t0), "did").att for Y, n1, t0 in cases]
    elapsed = time.perf_counter() - start
    worst = max(abs(a - did_by_hand(Y, n1, t0)) for a, (Y, n1, t0) in zip(atts, cases))
    ok = worst <= 1e-10 and elapsed < 1.0
    report(1, ok, f"max |did - oracle| = {worst:.2e} (tol 1e-10), {elapsed:.3f}s (< 1s)")
    assert ok


def test_2_solver_optimality(report):
    rng = np.random.default_rng(2)
    problems = []
    for i in range(500):
        n = int(rng.integers(1, 12))
        problems.append(SimplexLSProblem(rng.normal(size=(n, 3)), rng.normal(size=n), 0.0, bool(i % 2)))
    start = time.perf_counter()
    sols = [solve_simplex_ls(p) for p in problems]
    elapsed = time.perf_counter() - start
    excess = max(
        objective(p, w) - grid_optimum(p.design, p.target, p.with_intercept) for p, w in zip(problems, sols)
    )
    gap = max(frank_wolfe_gap(p, w.weights) for p, w in zip(problems, sols))
    ok = excess <= 1e-4 and gap <= 1e-8 and elapsed < 5.0
    report(2, ok, f"max excess over grid = {excess:.2e} (<= 1e-4), max FW gap = {gap:.2e} (<= 1e-8), "
                  f"{elapsed:.3f}s (< 5s)")
    assert ok


def test_3_transform_properties(report):
    rng = np.random.default_rng(3)
    idem = diff = scale = 0.0
    for _ in range(1000):
        n, T = int(rng.integers(2, 7)), int(rng.integers(3, 9))
        t0 = int(rng.integers(2, T))
        Y = rng.uniform(100, 10_000, size=(n, T))
        p = make_panel(Y, 1, t0)
        d = demean_pre(p)
        idem = max(idem, float(np.max(np.abs(demean_pre(d).outcomes - d.outcomes))))
        within = (d.outcomes[:, :, None] - d.outcomes[:, None, :]) - (Y[:, :, None] - Y[:, None, :])
        diff = max(diff, float(np.max(np.abs(within))))
        c = rng.uniform(0.01, 100, size=(n, 1))
        g1, g2 = growth_transform(p).outcomes, growth_transform(make_panel(Y * c, 1, t0)).outcomes
        scale = max(scale, float(np.max(np.abs(g1 - g2))))
    ok = max(idem, diff, scale) <= 1e-9
    report(3, ok, f"idempotence {idem:.1e}, within-unit differences {diff:.1e}, "
                  f"growth scale invariance {scale:.1e} (all <= 1e-9)")
    assert ok


def test_4_interval_reconstruction(report):
    targets = {0.95: (-185, 5257), 0.90: (252, 4820)}
    rows, ok = [], True
    for level, (lo, hi) in targets.items():
        ci = confidence_interval(2536.0, 1388.0, level)
        ok &= abs(ci.lower - lo) <= 1 and abs(ci.upper - hi) <= 1
        rows.append(f"{level:.2f}: ({ci.lower:.2f}, {ci.upper:.2f}) vs ({lo}, {hi})")
    report(4, ok, "; ".join(rows) + " (each endpoint within 1)")
    assert ok


def test_5_monte_carlo_recovery(report):
    cfg = DGPConfig(n_controls=20, n_treated=4, n_pre=8, n_post=1, noise_sd=1.0, true_att=5.0, seed=0)
    start = time.perf_counter()
    s = run_monte_carlo(cfg, kinds=["sdid"], reps=200, placebo_replications=50)["sdid"]
    elapsed = time.perf_counter() - start
    ok = abs(s.mean_estimate - 5.0) <= 0.2 and 0.88 <= s.ci_coverage <= 1.0 and elapsed < 30.0
    report(5, ok, f"mean sdid = {s.mean_estimate:.4f} (5 +/- 0.2), 95% coverage = {s.ci_coverage:.3f} "
                  f"(in [0.88, 1]), {elapsed:.1f}s (< 30s)")
    assert ok


def test_6_golden_replication(report):
    path = os.environ.get(FSO_ENV)
    if not path or not Path(path).is_file():
        report(6, "SKIP", f"set {FSO_ENV} to the FSO July panel CSV to run")
        pytest.skip(f"{FSO_ENV} not set; FSO panel unavailable")
    all_hosts = [replicate(path, "all_hosts", seed) for seed in range(1, 6)]
    main_hosts = replicate(path, "main_hosts", 1)
    att_all = all_hosts[0]["estimate"]["att"]
    att_main = main_hosts["estimate"]["att"]
    est = all_hosts[0]["estimate"]
    w2024 = dict(zip(est["periods"][: est["t0"]], est["time_weights"]["weights"]))[2024]
    se = float(np.mean([b["inference"]["standard_error"] for b in all_hosts]))
    checks = {
        "att all hosts": abs(att_all - 2536) <= 0.05 * 2536,
        "att main hosts": abs(att_main - 3419) <= 0.05 * 3419,
        "2024 weight": abs(w2024 - 0.813) <= 0.05,
        "SE": abs(se - 1388) <= 0.15 * 1388,
    }
    ok = all(checks.values())
    report(6, ok, f"att {att_all:.0f} / {att_main:.0f}, w2024 {w2024:.3f}, SE {se:.0f}; "
                  + ", ".join(f"{k}: {'ok' if v else 'off'}" for k, v in checks.items()))
    assert ok


def test_7_determinism(report, tmp_path, capsys):
    outputs, times = [], []
    for name in ("a.json", "b.json"):
        target = tmp_path / name
        start = time.perf_counter()
        code = main(["replicate", "--input", str(FIXTURE), "--which", "all_hosts", "--output", str(target)])
        times.append(time.perf_counter() - start)
        assert code == 0
        outputs.append(target.read_bytes())
    capsys.readouterr()
    assert json.loads(outputs[0])["inference"]["replications"] == 400
    ok = outputs[0] == outputs[1] and max(times) < 10.0
    report(7, ok, f"byte-identical JSON: {outputs[0] == outputs[1]}, runs {times[0]:.2f}s / {times[1]:.2f}s (< 10s)")
    assert ok
