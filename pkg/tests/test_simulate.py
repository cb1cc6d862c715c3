import json
from dataclasses import replace
from statistics import NormalDist

import numpy as np
import pytest

from sdidkit.estimators import estimate
from sdidkit.simulate import DGPConfig, generate_panel, run_monte_carlo, summary_table

QUIET = dict(unit_effect_sd=0.0, time_effect_sd=0.0, noise_sd=0.0)


def test_degenerate_dgp_is_constant():
    p = generate_panel(DGPConfig(true_att=0.0, **QUIET))
    assert p.shape == (24, 9) and p.t0 == 8
    # the random-walk factor has zero loadings, so every cell is exactly zero
    assert np.all(p.outcomes == 0.0)


def test_effect_lands_only_on_treated_post_cells():
    p = generate_panel(DGPConfig(true_att=5.0, **QUIET))
    expected = np.zeros((24, 9))
    expected[20:, 8:] = 5.0
    np.testing.assert_array_equal(p.outcomes, expected)
    assert p.treated_units == tuple(f"treated_{i:03d}" for i in range(4))


def test_noise_free_monte_carlo_is_exact():
    cfg = DGPConfig(noise_sd=0.0, n_controls=10, n_treated=2, n_pre=5, seed=1)
    out = run_monte_carlo(cfg, reps=10, placebo_replications=20)
    for s in out.values():
        assert s.bias == pytest.approx(0.0, abs=1e-8)
        assert s.rmse == pytest.approx(0.0, abs=1e-8)
        assert s.ci_coverage == 1.0


def test_did_unbiased_without_factor():
    out = run_monte_carlo(DGPConfig(seed=2), kinds=["did"], reps=300, with_inference=False)
    s = out["did"]
    assert abs(s.bias) < 4 * s.sd_estimate / np.sqrt(s.reps)
    assert np.isnan(s.ci_coverage)


def test_sdid_beats_did_under_loading_imbalance():
    cfg = DGPConfig(
        factor_loading_sd=0.5, treated_loading_shift=1.0, factor_drift=0.5, seed=11
    )
    out = run_monte_carlo(cfg, reps=100, with_inference=False)
    assert abs(out["sdid"].bias) <= abs(out["did"].bias)
    assert abs(out["did"].bias) > 1.0


def test_same_seed_same_numbers():
    cfg = DGPConfig(seed=4, n_controls=8, n_treated=2)
    a = run_monte_carlo(cfg, reps=5, placebo_replications=10)
    b = run_monte_carlo(cfg, reps=5, placebo_replications=10)
    assert {k: v.to_dict() for k, v in a.items()} == {k: v.to_dict() for k, v in b.items()}
    assert generate_panel(cfg) == generate_panel(cfg)
    assert generate_panel(cfg) != generate_panel(replace(cfg, seed=5))


@pytest.mark.slow
def test_null_effect_mean_is_zero():
    out = run_monte_carlo(DGPConfig(true_att=0.0, seed=3), kinds=["sdid"], reps=500, with_inference=False)
    s = out["sdid"]
    z = s.mean_estimate / (s.sd_estimate / np.sqrt(s.reps))
    p_value = 2 * (1 - NormalDist().cdf(abs(z)))
    assert p_value > 0.01


def test_single_replication_estimate_matches_direct_call():
    cfg = DGPConfig(seed=8)
    seed = int(np.random.SeedSequence(8).spawn(1)[0].generate_state(2)[0])
    direct = estimate(generate_panel(replace(cfg, seed=seed)), "sdid").att
    out = run_monte_carlo(cfg, kinds=["sdid"], reps=1, with_inference=False)
    assert out["sdid"].mean_estimate == direct


def test_config_files(tmp_path):
    j = tmp_path / "dgp.json"
    j.write_text(json.dumps({"n_controls": 7, "true_att": 2.5}))
    assert DGPConfig.from_file(j) == DGPConfig(n_controls=7, true_att=2.5)
    t = tmp_path / "dgp.toml"
    t.write_text("[dgp]\nn_treated = 3\nnoise_sd = 0.5\n")
    assert DGPConfig.from_file(t) == DGPConfig(n_treated=3, noise_sd=0.5)
    with pytest.raises(TypeError):
        DGPConfig(**{"bogus": 1})
    with pytest.raises(ValueError):
        DGPConfig(n_pre=0)


def test_summary_table_lists_each_estimator():
    out = run_monte_carlo(DGPConfig(seed=1), reps=3, with_inference=False)
    text = summary_table(out, true_att=5.0)
    for kind in ("did", "sc", "sdid"):
        assert kind in text
    assert "true ATT = 5" in text
