"""End-to-end analysis: transform, estimate, placebo inference, intervals."""

from __future__ import annotations

from typing import Optional

from . import __version__
from .config import AnalysisConfig
from .estimators import estimate, relative_effect, treated_pre_mean
from .inference import confidence_interval, placebo_inference
from .panel import Panel, apply_transform, restrict_treated

BUNDLE_SCHEMA_VERSION = 1


def prepare_panel(raw: Panel, config: AnalysisConfig) -> Panel:
    """Attach ``t0`` (default: all periods but the last) and apply the treated subset."""
    t0 = config.t0 if config.t0 is not None else (raw.t0 or len(raw.periods) - 1)
    panel = raw.with_t0(t0)
    if config.treated_subset:
        panel = restrict_treated(panel, config.treated_subset)
    return panel


def run_analysis(raw: Panel, config: AnalysisConfig, *, workers: int = 1, extra: Optional[dict] = None) -> dict:
    """
    Run one configured analysis and return a JSON-ready bundle.

    The bundle holds the estimate, the placebo distribution, one interval per
    requested level, the effect relative to the treated pre-period mean of
    the untransformed outcome (omitted for growth rates), and the config.
    Identical inputs give identical bundles; nothing time-dependent is stored.
    """
    panel = prepare_panel(raw, config)
    transformed = apply_transform(panel, config.transform)
    result = estimate(transformed, config.estimator, config)
    dist = placebo_inference(transformed, config.estimator, config, point_estimate=result.att, workers=workers)
    intervals = [confidence_interval(result.att, dist, level) for level in config.ci_levels]

    baseline = rel = None
    if config.transform != "growth":
        baseline = treated_pre_mean(panel)
        if baseline > 0:
            rel = relative_effect(result, baseline)

    bundle = {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "panel": {
            "n_units": len(transformed.units),
            "n_periods": len(transformed.periods),
            "n_treated": transformed.n_treated,
            "n_controls": transformed.n_controls,
            "periods": list(transformed.periods),
            "t0": transformed.t0,
            "dropped_units": list(raw.dropped_units),
        },
        "config": config.to_dict(),
        "estimate": result.to_dict(),
        "inference": dist.to_dict(),
        "confidence_intervals": [ci.to_dict() for ci in intervals],
        "baseline": baseline,
        "relative_effect": rel,
        "metadata": {"tool": "sdidkit", "version": __version__},
    }
    if extra:
        bundle.update(extra)
    return bundle


def summarize(bundle: dict) -> str:
    """Human-readable summary of an analysis bundle."""
    est = bundle["estimate"]
    inf = bundle["inference"]
    p = bundle["panel"]
    lines = [
        f"estimator: {est['kind']}   transform: {bundle['config']['transform']}",
        f"panel: {p['n_units']} units x {p['n_periods']} periods, "
        f"{p['n_treated']} treated, {p['n_controls']} control, t0={p['t0']}",
        f"ATT: {est['att']:.6g}",
        f"placebo SE: {inf['standard_error']:.6g} ({inf['replications']} replications, "
        f"{inf['failures']} failed)",
    ]
    for ci in bundle["confidence_intervals"]:
        lines.append(f"{ci['level']:.0%} CI: [{ci['lower']:.6g}, {ci['upper']:.6g}]")
    if bundle.get("relative_effect") is not None:
        lines.append(f"relative effect: {bundle['relative_effect']:.2%} of pre-period mean {bundle['baseline']:.6g}")
    tw = est.get("time_weights")
    if tw is not None:
        pre = est["periods"][: est["t0"]]
        lines.append("time weights: " + ", ".join(f"{t}={w:.3f}" for t, w in zip(pre, tw["weights"])))
    if p["dropped_units"]:
        lines.append("dropped (incomplete series): " + ", ".join(p["dropped_units"]))
    return "\n".join(lines)
