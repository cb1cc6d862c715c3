"""
Synthetic panels with a known effect, and a Monte Carlo harness around them.

The data-generating process is

    Y[i, t] = unit[i] + time[t] + loading[i] * factor[t] + noise[i, t]
              + true_att * (i treated and t >= n_pre)

with Gaussian unit/time effects, Gaussian loadings (treated loadings
optionally shifted), a Gaussian random walk ``factor`` with unit-variance
steps and optional drift, and Gaussian noise. A loading shift together with
a drifting factor makes treated and control trends diverge, which biases
plain difference-in-differences.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .config import AnalysisConfig
from .errors import SdidkitError
from .estimators import estimate
from .inference import confidence_interval, placebo_inference
from .panel import Panel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

# Relative round-off allowance when checking whether an interval covers the truth.
COVERAGE_SLACK = 1e-12


@dataclass(frozen=True)
class DGPConfig:
    n_controls: int = 20
    n_treated: int = 4
    n_pre: int = 8
    n_post: int = 1
    unit_effect_sd: float = 1.0
    time_effect_sd: float = 1.0
    noise_sd: float = 1.0
    true_att: float = 5.0
    factor_loading_sd: float = 0.0
    treated_loading_shift: float = 0.0
    factor_drift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_controls", "n_treated", "n_pre", "n_post"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("unit_effect_sd", "time_effect_sd", "noise_sd", "factor_loading_sd"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if int(self.seed) < 0:
            raise ValueError("seed must be a nonnegative integer")

    @classmethod
    def from_file(cls, path) -> "DGPConfig":
        """Read a JSON (``.json``) or TOML (anything else) file of field values."""
        path = Path(path)
        if path.suffix.lower() == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
        else:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        return cls(**data.get("dgp", data))

    def to_dict(self) -> dict:
        return asdict(self)


def generate_panel(config: DGPConfig) -> Panel:
    """Draw one panel; controls come first, then treated units."""
    rng = np.random.default_rng(config.seed)
    n = config.n_controls + config.n_treated
    T = config.n_pre + config.n_post
    unit = rng.normal(0.0, config.unit_effect_sd, size=n)
    time = rng.normal(0.0, config.time_effect_sd, size=T)
    loading = rng.normal(0.0, config.factor_loading_sd, size=n)
    loading[config.n_controls:] += config.treated_loading_shift
    factor = np.cumsum(rng.normal(config.factor_drift, 1.0, size=T))
    noise = rng.normal(0.0, config.noise_sd, size=(n, T))

    Y = unit[:, None] + time[None, :] + np.outer(loading, factor) + noise
    Y[config.n_controls:, config.n_pre:] += config.true_att
    units = [f"control_{i:03d}" for i in range(config.n_controls)]
    units += [f"treated_{i:03d}" for i in range(config.n_treated)]
    return Panel(
        units=units,
        periods=range(1, T + 1),
        outcomes=Y,
        treated_units=units[config.n_controls:],
        t0=config.n_pre,
    )


class ReplicationError(SdidkitError):
    """An estimator error raised inside Monte Carlo replication ``replication``."""

    def __init__(self, replication: int, cause: SdidkitError):
        self.replication = replication
        self.exit_code = cause.exit_code
        super().__init__(f"replication {replication}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class MonteCarloSummary:
    kind: str
    reps: int
    mean_estimate: float
    bias: float
    rmse: float
    sd_estimate: float
    ci_coverage: float
    ci_level: float

    def to_dict(self) -> dict:
        return asdict(self)


def _rep_seeds(seed: int, reps: int):
    for child in np.random.SeedSequence(seed).spawn(reps):
        data_seed, placebo_seed = child.generate_state(2)
        yield int(data_seed), int(placebo_seed)


def run_monte_carlo(
    config: DGPConfig,
    kinds: Iterable[str] = ("did", "sc", "sdid"),
    reps: int = 100,
    *,
    placebo_replications: int = 50,
    level: float = 0.95,
    with_inference: bool = True,
) -> dict:
    """
    Bias, RMSE and placebo-CI coverage of each estimator over ``reps`` panels.

    Replication ``r`` uses seeds spawned from ``config.seed``, so the whole run
    is reproducible and each replication can be recomputed on its own.
    Coverage counts ``true_att`` in ``[lower, upper]`` (inclusive, widened by
    a round-off allowance so noise-free designs with a zero-width interval
    still count as covered); it is NaN when ``with_inference`` is false.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    kinds = list(kinds)
    estimates = {k: np.empty(reps) for k in kinds}
    covered = {k: np.zeros(reps, dtype=bool) for k in kinds}
    for r, (data_seed, placebo_seed) in enumerate(_rep_seeds(config.seed, reps)):
        panel = generate_panel(replace(config, seed=data_seed))
        analysis = AnalysisConfig(replications=placebo_replications, seed=placebo_seed, ci_levels=(level,))
        for kind in kinds:
            try:
                att = estimate(panel, kind, analysis).att
                estimates[kind][r] = att
                if with_inference:
                    dist = placebo_inference(panel, kind, analysis, point_estimate=att)
                    ci = confidence_interval(att, dist, level)
                    slack = COVERAGE_SLACK * max(1.0, abs(config.true_att), abs(att))
                    covered[kind][r] = ci.lower - slack <= config.true_att <= ci.upper + slack
            except SdidkitError as exc:
                raise ReplicationError(r, exc) from exc

    out = {}
    for kind in kinds:
        est = estimates[kind]
        err = est - config.true_att
        out[kind] = MonteCarloSummary(
            kind=kind,
            reps=reps,
            mean_estimate=float(est.mean()),
            bias=float(err.mean()),
            rmse=float(np.sqrt(np.mean(err**2))),
            sd_estimate=float(est.std(ddof=1)) if reps > 1 else 0.0,
            ci_coverage=float(covered[kind].mean()) if with_inference else float("nan"),
            ci_level=level,
        )
    return out


def summary_table(summaries: dict, true_att: Optional[float] = None) -> str:
    """Plain-text table of Monte Carlo summaries."""
    head = f"{'estimator':<10}{'reps':>6}{'mean':>12}{'bias':>12}{'rmse':>12}{'sd':>12}{'coverage':>10}"
    lines = [head, "-" * len(head)]
    for s in summaries.values():
        lines.append(
            f"{s.kind:<10}{s.reps:>6}{s.mean_estimate:>12.4f}{s.bias:>12.4f}"
            f"{s.rmse:>12.4f}{s.sd_estimate:>12.4f}{s.ci_coverage:>10.3f}"
        )
    if true_att is not None:
        lines.append(f"true ATT = {true_att:g}")
    return "\n".join(lines)
