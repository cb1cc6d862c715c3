import numpy as np
import pytest

from sdidkit.config import AnalysisConfig
from sdidkit.errors import ConfigError, DegenerateOutcomeError
from sdidkit.estimators import (
    EstimateResult,
    estimate,
    noise_level,
    relative_effect,
    treated_pre_mean,
    unit_ridge,
)
from sdidkit.panel import Panel, demean_pre, load_panel

from conftest import make_panel


def did_by_hand(Y, n_treated, t0):
    """Difference of before/after changes in group means, written out with loops."""
    rows = Y.tolist()
    treated, control = rows[len(rows) - n_treated:], rows[: len(rows) - n_treated]

    T = len(rows[0])

    def change(group):
        pre = sum(sum(r[:t0]) for r in group) / (len(group) * t0)
        post = sum(sum(r[t0:]) for r in group) / (len(group) * (T - t0))
        return post - pre

    return change(treated) - change(control)


def test_textbook_two_by_two():
    p = make_panel([[10, 12], [20, 25]], t0=1)
    assert estimate(p, "did").att == pytest.approx(3.0, abs=1e-12)


def test_did_matches_hand_computation():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, T = rng.integers(2, 7), rng.integers(2, 7)
        Y = rng.normal(size=(n, T)) * 10
        n1, t0 = int(rng.integers(1, n)), int(rng.integers(1, T))
        r = estimate(make_panel(Y, n1, t0), "did")
        assert r.att == pytest.approx(did_by_hand(Y, n1, t0), abs=1e-10)


def test_sdid_perfect_match_with_unique_fit():
    # 3 controls, 6 pre-periods: with zeta_omega=0 the treated control is the only perfect fit
    rng = np.random.default_rng(4)
    C = rng.normal(size=(3, 8))
    Y = np.vstack([C, C[1]])
    r = estimate(make_panel(Y, 1, t0=6), "sdid", zeta_omega=0.0)
    assert r.att == pytest.approx(0.0, abs=1e-8)
    np.testing.assert_allclose(r.unit_weights.weights, [0, 1, 0], atol=1e-8)


def test_sdid_parallel_controls_give_zero_effect():
    # every control is a level shift of the treated series: any weights fit, att is 0
    base = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    Y = np.vstack([base + 2, base - 7, base + 0.5, base])
    r = estimate(make_panel(Y, 1, t0=4), "sdid")
    assert r.att == pytest.approx(0.0, abs=1e-8)


def test_sc_and_sdid_agree_when_representable():
    rng = np.random.default_rng(8)
    C = rng.normal(size=(4, 7))
    w = np.array([0.1, 0.6, 0.3, 0.0])
    Y = np.vstack([C, w @ C])
    Y[-1, -1] += 2.0
    p = make_panel(Y, 1, t0=6)
    sc = estimate(p, "sc")
    sdid = estimate(p, "sdid", zeta_omega=0.0)
    assert sc.att == pytest.approx(2.0, abs=1e-7)
    assert sdid.att == pytest.approx(sc.att, abs=1e-7)


def test_sdid_with_uniform_weights_equals_did():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n, T = rng.integers(3, 9), rng.integers(2, 8)
        Y = rng.normal(size=(n, T))
        n1, t0 = int(rng.integers(1, n)), int(rng.integers(1, T))
        p = make_panel(Y, n1, t0)
        pinned = estimate(p, "sdid", unit_weights=np.full(n - n1, 1 / (n - n1)), time_weights=np.full(t0, 1 / t0))
        assert pinned.att == pytest.approx(estimate(p, "did").att, abs=1e-10)


def test_sdid_shift_invariance():
    rng = np.random.default_rng(2)
    for _ in range(20):
        Y = rng.normal(size=(8, 6))
        p = make_panel(Y, 2, t0=4)
        q = make_panel(Y + 1234.5, 2, t0=4)
        assert estimate(q, "sdid").att == pytest.approx(estimate(p, "sdid").att, abs=1e-9)


def test_unit_permutation_invariance():
    rng = np.random.default_rng(3)
    Y = rng.normal(size=(9, 6))
    units = [f"u{i}" for i in range(9)]
    p = Panel(units, range(6), Y, units[-2:], t0=4)
    perm = [4, 0, 6, 2, 1, 5, 3, 7, 8]
    q = Panel([units[i] for i in perm], range(6), Y[perm], units[-2:], t0=4)
    for kind in ("did", "sc", "sdid"):
        a, b = estimate(p, kind), estimate(q, kind)
        assert b.att == pytest.approx(a.att, abs=1e-9)
        wa = dict(zip(a.control_units, a.unit_weights.weights))
        wb = dict(zip(b.control_units, b.unit_weights.weights))
        for u in wa:
            assert wb[u] == pytest.approx(wa[u], abs=1e-8)


def test_result_invariants_and_serialization():
    rng = np.random.default_rng(5)
    p = make_panel(rng.normal(size=(7, 5)), 2, t0=3)
    for kind in ("did", "sc", "sdid"):
        r = estimate(p, kind)
        assert len(r.treated_trajectory) == len(r.synthetic_trajectory) == 5
        assert r.recompute_att() == pytest.approx(r.att, abs=1e-9)
        assert r.unit_weights.is_valid()
        if kind == "sc":
            assert r.time_weights is None
        else:
            assert r.time_weights.is_valid() and len(r.time_weights) == 3
        back = EstimateResult.from_dict(r.to_dict())
        assert back.att == r.att
        assert back.recompute_att() == pytest.approx(r.att, abs=1e-12)


def test_sdid_att_formula_matches_stored_pieces():
    rng = np.random.default_rng(6)
    p = make_panel(rng.normal(size=(10, 6)), 3, t0=4)
    r = estimate(p, "sdid")
    lam = r.time_weights.weights
    tr, sy = r.treated_trajectory, r.synthetic_trajectory
    expected = (tr[4:].mean() - sy[4:].mean()) - lam @ (tr[:4] - sy[:4])
    assert r.att == pytest.approx(expected, abs=1e-9)


def test_ridge_level_follows_noise_of_control_differences():
    rng = np.random.default_rng(9)
    Y = rng.normal(size=(6, 5))
    p = make_panel(Y, 2, t0=3)
    r = estimate(p, "sdid")
    sigma = np.std(np.diff(Y[:4, :3], axis=1).ravel(), ddof=1)
    assert r.diagnostics["noise_level"] == pytest.approx(sigma, rel=1e-12)
    assert r.diagnostics["zeta_omega"] == pytest.approx((2 * 2) ** 0.25 * sigma, rel=1e-12)
    assert unit_ridge(2, 2, sigma) == pytest.approx(r.diagnostics["zeta_omega"])
    assert noise_level(np.ones((3, 1))) == 0.0


def test_multiple_post_periods_average_uniformly():
    Y = np.array([[0.0, 0, 0, 0], [0.0, 0, 2, 4]])
    r = estimate(make_panel(Y, 1, t0=2), "did")
    assert r.att == pytest.approx(3.0)


def test_errors():
    p = make_panel(np.ones((3, 3)), 1)
    with pytest.raises(ConfigError):
        estimate(p, "did")
    with pytest.raises(ConfigError):
        estimate(p.with_t0(2), "nope")
    with pytest.raises(ConfigError):
        estimate(p.with_t0(2), "did", unit_weights=[0.5, 0.5])
    assert estimate(p, "did", AnalysisConfig(t0=2)).t0 == 2


def test_relative_effect():
    r = estimate(make_panel([[10, 12], [20, 25]], t0=1), "did")
    assert relative_effect(r, 150.0) == pytest.approx(0.02)
    with pytest.raises(DegenerateOutcomeError):
        relative_effect(r, 0.0)
    zero = estimate(make_panel([[1, 1], [2, 2]], t0=1), "did")
    assert relative_effect(zero, 123.0) == 0.0


@pytest.mark.parametrize(
    "att, baseline, expected",
    [(2536, 134_249, 0.019), (3419, 216_693, 0.016)],
)
def test_relative_effect_of_published_numbers(att, baseline, expected):
    r = estimate(make_panel([[0, 0], [0, att]], t0=1), "did")
    assert round(relative_effect(r, baseline), 3) == expected


def test_fixture_demeaned_sdid_runs(fixture_csv):
    raw = load_panel(fixture_csv, periods=range(2022, 2026), t0=3)
    p = demean_pre(raw)
    r = estimate(p, "sdid")
    assert r.time_weights.is_valid() and len(r.time_weights) == 3
    assert r.unit_weights.is_valid() and len(r.unit_weights) == 17
    assert treated_pre_mean(raw) > 0
