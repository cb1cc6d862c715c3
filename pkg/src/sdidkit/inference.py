"""
Placebo inference for panel ATT estimators.

Each replication relabels a random set of control units (as many as there
are treated units) as pseudo-treated, drops the genuinely treated units, and
re-runs the estimator. The spread of the resulting placebo effects is the
standard error; confidence intervals are Gaussian around the point estimate.

Randomness: replication ``r`` draws from ``default_rng(SeedSequence(seed).spawn(R)[r])``
and samples positions in the lexicographically sorted control list, so the
draws depend only on the seed and the set of control identifiers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional, Union

import numpy as np

from .config import AnalysisConfig
from .errors import ConvergenceError, InferenceError
from .estimators import estimate
from .panel import Panel

MAX_FAILURE_SHARE = 0.10


@dataclass(frozen=True, eq=False)
class PlaceboDistribution:
    """
    Placebo effects from successful replications and the implied standard error.

    ``replications`` counts successful draws; ``failures`` counts draws dropped
    because a weight solve did not converge.
    """

    placebo_atts: np.ndarray
    replications: int
    seed: int
    standard_error: float
    point_estimate: float
    failures: int = 0
    kind: str = "sdid"
    draws: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "replications": self.replications,
            "failures": self.failures,
            "point_estimate": self.point_estimate,
            "standard_error": self.standard_error,
            "placebo_atts": self.placebo_atts.tolist(),
            "draws": [list(d) for d in self.draws],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlaceboDistribution":
        return cls(
            placebo_atts=np.asarray(data["placebo_atts"], dtype=float),
            replications=int(data["replications"]),
            seed=int(data["seed"]),
            standard_error=float(data["standard_error"]),
            point_estimate=float(data["point_estimate"]),
            failures=int(data.get("failures", 0)),
            kind=data.get("kind", "sdid"),
            draws=tuple(tuple(d) for d in data.get("draws", ())),
        )


@dataclass(frozen=True)
class ConfidenceInterval:
    level: float
    lower: float
    upper: float

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {"level": self.level, "lower": self.lower, "upper": self.upper}


def replication_seeds(seed: int, replications: int) -> list:
    return np.random.SeedSequence(seed).spawn(replications)


def draw_pseudo_treated(seed_seq, controls: tuple, n_treated: int) -> tuple:
    """Pseudo-treated subset for one replication, sampled without replacement."""
    rng = np.random.default_rng(seed_seq)
    picks = rng.choice(len(controls), size=n_treated, replace=False)
    return tuple(controls[i] for i in sorted(picks))


def placebo_panel(panel: Panel, pseudo_treated) -> Panel:
    """Controls-only panel (sorted by identifier) with ``pseudo_treated`` marked as treated."""
    controls = tuple(sorted(panel.control_units))
    index = {u: i for i, u in enumerate(panel.units)}
    rows = [index[u] for u in controls]
    return panel._replace(
        units=controls, outcomes=panel.outcomes[rows], treated_units=tuple(pseudo_treated)
    )


def _one_replication(args):
    panel, pseudo_treated, kind, config = args
    try:
        return estimate(placebo_panel(panel, pseudo_treated), kind, config).att
    except ConvergenceError:
        return None


def placebo_inference(
    panel: Panel,
    kind: Optional[str] = None,
    config: Optional[AnalysisConfig] = None,
    *,
    point_estimate: Optional[float] = None,
    workers: int = 1,
) -> PlaceboDistribution:
    """
    Placebo standard error for ``kind`` on ``panel``.

    Parameters
    ----------
    panel : Panel
    kind : {'did', 'sc', 'sdid'}, optional
        Defaults to ``config.estimator``.
    config : AnalysisConfig, optional
        Supplies ``replications``, ``seed``, solver settings and ``t0`` if the
        panel has none.
    point_estimate : float, optional
        ATT on the real assignment; estimated here when omitted.
    workers : int
        Process count for the replications. Results do not depend on it.

    Raises
    ------
    InferenceError
        Too few controls to draw pseudo-treated sets, fewer than two
        successful replications, or more than 10% failed solves.
    """
    config = config or AnalysisConfig()
    kind = kind or config.estimator
    if panel.t0 is None:
        panel = panel.with_t0(config.t0) if config.t0 is not None else panel
    controls = tuple(sorted(panel.control_units))
    n_treated = panel.n_treated
    if len(controls) <= n_treated:
        raise InferenceError(
            f"insufficient controls for placebo: {len(controls)} controls, {n_treated} treated"
        )
    if point_estimate is None:
        point_estimate = estimate(panel, kind, config).att

    reps = int(config.replications)
    draws = [draw_pseudo_treated(s, controls, n_treated) for s in replication_seeds(config.seed, reps)]
    jobs = [(panel, d, kind, config) for d in draws]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_replication, jobs, chunksize=max(1, reps // (4 * workers))))
    else:
        results = [_one_replication(job) for job in jobs]

    kept = [(d, att) for d, att in zip(draws, results) if att is not None]
    failures = reps - len(kept)
    if failures > MAX_FAILURE_SHARE * reps:
        raise InferenceError(
            f"{failures} of {reps} placebo replications failed to converge", failures=failures
        )
    if len(kept) < 2:
        raise InferenceError("need at least two successful placebo replications", failures=failures)
    atts = np.array([att for _, att in kept])
    return PlaceboDistribution(
        placebo_atts=atts,
        replications=len(kept),
        seed=int(config.seed),
        standard_error=float(np.std(atts, ddof=1)),
        point_estimate=float(point_estimate),
        failures=failures,
        kind=kind,
        draws=tuple(d for d, _ in kept),
    )


def normal_quantile(level: float) -> float:
    """Two-sided critical value ``z`` with ``P(|Z| <= z) = level``."""
    return NormalDist().inv_cdf((1.0 + level) / 2.0)


def confidence_interval(
    point: float, dist: Union[PlaceboDistribution, float], level: float = 0.95
) -> ConfidenceInterval:
    """Gaussian interval ``point -/+ z * se`` with ``se`` from ``dist`` (or given directly)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    se = dist.standard_error if isinstance(dist, PlaceboDistribution) else float(dist)
    if not math.isfinite(se) or se < 0:
        raise ValueError(f"standard error must be finite and nonnegative, got {se}")
    half = normal_quantile(level) * se
    return ConfidenceInterval(level=float(level), lower=point - half, upper=point + half)
