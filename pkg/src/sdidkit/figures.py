"""
Figure data and static SVG rendering for an analysis bundle.

The figure has two panels: outcome trajectories (treated, synthetic control,
counterfactual segment, confidence whiskers at the treated period) above a
bar chart of the time weights.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import ParseError

FIGURE_SCHEMA_VERSION = 1
SERIES = ("treated", "synthetic", "counterfactual", "time_weights", "ci")


def figure_data(bundle: dict) -> dict:
    """
    Extract the five plotted series from an estimate bundle.

    ``counterfactual`` joins the time-weighted pre-period average of the
    treated trajectory to the estimated untreated post-period mean; ``ci``
    places one whisker per level around that counterfactual plus the effect.
    """
    try:
        est = bundle["estimate"]
        periods = [int(p) for p in est["periods"]]
        t0 = int(est["t0"])
        att = float(est["att"])
        treated = [float(v) for v in est["treated_trajectory"]]
        synthetic = [float(v) for v in est["synthetic_trajectory"]]
        tw = est.get("time_weights")
        intervals = bundle.get("confidence_intervals", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"not an estimate bundle: {exc}") from exc

    pre, post = periods[:t0], periods[t0:]
    post_x = float(np.mean(post))
    post_mean = float(np.mean(treated[t0:]))
    counterfactual_post = post_mean - att
    if tw is not None:
        lam = [float(w) for w in tw["weights"]]
        anchor_x = float(np.dot(lam, pre))
        anchor_y = float(np.dot(lam, treated[:t0]))
        counterfactual = {"x": [anchor_x, post_x], "y": [anchor_y, counterfactual_post]}
        time_weights = {"x": pre, "y": lam}
    else:
        counterfactual = {"x": [float(p) for p in post], "y": synthetic[t0:]}
        time_weights = {"x": pre, "y": [0.0] * len(pre)}

    whiskers = [
        {
            "level": float(ci["level"]),
            "lower": float(ci["lower"]),
            "upper": float(ci["upper"]),
            "y_lower": counterfactual_post + float(ci["lower"]),
            "y_upper": counterfactual_post + float(ci["upper"]),
        }
        for ci in intervals
    ]
    return {
        "schema_version": FIGURE_SCHEMA_VERSION,
        "kind": est.get("kind"),
        "att": att,
        "t0": t0,
        "unit_intercept": float(est.get("unit_weights", {}).get("intercept", 0.0)),
        "series": {
            "treated": {"x": periods, "y": treated},
            "synthetic": {"x": periods, "y": synthetic},
            "counterfactual": counterfactual,
            "time_weights": time_weights,
            "ci": {"x": post_x, "center": post_mean, "intervals": whiskers},
        },
    }


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(fig: dict, width: int = 720, height: int = 540, title: str = "") -> str:
    """Static two-panel SVG for :func:`figure_data` output."""
    s = fig["series"]
    x_all = s["treated"]["x"]
    ys = list(s["treated"]["y"]) + list(s["synthetic"]["y"]) + list(s["counterfactual"]["y"])
    for w in s["ci"]["intervals"]:
        ys += [w["y_lower"], w["y_upper"]]
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    left, right = 70, width - 20
    top_a, bottom_a = 40, int(height * 0.62)
    top_b, bottom_b = bottom_a + 40, height - 40
    sx = _scale(min(x_all) - 0.5, max(x_all) + 0.5, left, right)
    sy = _scale(y_lo - pad, y_hi + pad, bottom_a, top_a)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')

    def polyline(xs, vals, color, extra=""):
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, vals))
        return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{extra}/>'

    # axes and ticks, upper panel
    out.append(f'<line x1="{left}" y1="{bottom_a}" x2="{right}" y2="{bottom_a}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top_a}" x2="{left}" y2="{bottom_a}" stroke="black"/>')
    for x in x_all:
        out.append(f'<text x="{_fmt(sx(x))}" y="{bottom_a + 15}" text-anchor="middle">{x}</text>')
    for v in np.linspace(y_lo, y_hi, 5):
        out.append(f'<text x="{left - 5}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{v:.4g}</text>')
    t0 = fig["t0"]
    if 0 < t0 < len(x_all):
        xv = sx((x_all[t0 - 1] + x_all[t0]) / 2)
        out.append(
            f'<line x1="{_fmt(xv)}" y1="{top_a}" x2="{_fmt(xv)}" y2="{bottom_a}" stroke="#999" stroke-dasharray="2,3"/>'
        )

    out.append(polyline(s["synthetic"]["x"], s["synthetic"]["y"], "#d62728"))
    out.append(polyline(s["treated"]["x"], s["treated"]["y"], "#1f77b4"))
    out.append(polyline(s["counterfactual"]["x"], s["counterfactual"]["y"], "#d62728", ' stroke-dasharray="6,4"'))
    cx = sx(s["ci"]["x"])
    for k, w in enumerate(s["ci"]["intervals"]):
        xk = cx + 8 * (k + 1)
        y1, y2 = sy(w["y_lower"]), sy(w["y_upper"])
        out.append(f'<line x1="{_fmt(xk)}" y1="{_fmt(y1)}" x2="{_fmt(xk)}" y2="{_fmt(y2)}" stroke="#777" stroke-width="2"/>')
        for yy in (y1, y2):
            out.append(f'<line x1="{_fmt(xk - 3)}" y1="{_fmt(yy)}" x2="{_fmt(xk + 3)}" y2="{_fmt(yy)}" stroke="#777"/>')
    legend = [("#1f77b4", "treated"), ("#d62728", "synthetic control"), ("#777", "confidence intervals")]
    for k, (color, label) in enumerate(legend):
        y = top_a + 12 + 14 * k
        out.append(f'<line x1="{left + 10}" y1="{y - 4}" x2="{left + 30}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + 35}" y="{y}">{escape(label)}</text>')

    # lower panel: time weights
    tw = s["time_weights"]
    sw = _scale(0.0, max([1e-12] + list(tw["y"])), bottom_b, top_b)
    out.append(f'<line x1="{left}" y1="{bottom_b}" x2="{right}" y2="{bottom_b}" stroke="black"/>')
    out.append(f'<text x="{left - 5}" y="{top_b + 4}" text-anchor="end">{max([0.0] + list(tw["y"])):.3f}</text>')
    out.append(f'<text x="{left}" y="{top_b - 8}">time weights</text>')
    bar = 0.6 * (sx(1) - sx(0)) if len(x_all) > 1 else 20
    for x, w in zip(tw["x"], tw["y"]):
        xc, yt = sx(x), sw(w)
        out.append(
            f'<rect x="{_fmt(xc - bar / 2)}" y="{_fmt(yt)}" width="{_fmt(bar)}" '
            f'height="{_fmt(bottom_b - yt)}" fill="#1f77b4" opacity="0.7"/>'
        )
        out.append(f'<text x="{_fmt(xc)}" y="{bottom_b + 15}" text-anchor="middle">{x}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
