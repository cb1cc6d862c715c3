"""
Difference-in-differences, synthetic control and synthetic difference-in-differences.

All three estimators share one representation: unit weights ``omega`` over
control units, optional time weights ``lam`` over pre-treatment periods, and
the ATT

    (treated post mean - omega-weighted control post mean)
      - sum_t lam_t * (treated_t - omega-weighted control_t),   t pre-treatment

with the second term absent for synthetic control. Treated units enter as
their cross-sectional mean trajectory. With several post periods the post
mean is uniform over them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ESTIMATORS, AnalysisConfig
from .errors import ConfigError, DegenerateOutcomeError
from .optim import SimplexLSProblem, SolverSettings, WeightVector, solve_simplex_ls
from .panel import Panel

RESULT_SCHEMA_VERSION = 1
TIME_WEIGHT_JITTER = 1e-6


@dataclass(frozen=True, eq=False)
class EstimateResult:
    """
    Output of one estimation run.

    ``synthetic_trajectory`` is the omega-weighted control average without
    the intercept; ``unit_weights.intercept`` carries the level offset fitted
    over the pre-treatment periods.
    """

    kind: str
    att: float
    periods: tuple
    t0: int
    treated_units: tuple
    control_units: tuple
    unit_weights: WeightVector
    time_weights: Optional[WeightVector]
    treated_trajectory: np.ndarray
    synthetic_trajectory: np.ndarray
    pre_fit_rmse: float
    config: Optional[AnalysisConfig] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_post(self) -> int:
        return len(self.periods) - self.t0

    def recompute_att(self) -> float:
        lam = None if self.time_weights is None else self.time_weights.weights
        return _att(self.treated_trajectory, self.synthetic_trajectory, self.t0, lam)

    def counterfactual_post(self) -> float:
        """Post-period mean the treated units would have had without treatment."""
        return float(self.treated_trajectory[self.t0:].mean() - self.att)

    def to_dict(self) -> dict:
        return {
            "schema_version": RESULT_SCHEMA_VERSION,
            "kind": self.kind,
            "att": self.att,
            "periods": list(self.periods),
            "t0": self.t0,
            "treated_units": list(self.treated_units),
            "control_units": list(self.control_units),
            "unit_weights": self.unit_weights.to_dict(),
            "time_weights": None if self.time_weights is None else self.time_weights.to_dict(),
            "treated_trajectory": self.treated_trajectory.tolist(),
            "synthetic_trajectory": self.synthetic_trajectory.tolist(),
            "pre_fit_rmse": self.pre_fit_rmse,
            "config": None if self.config is None else self.config.to_dict(),
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EstimateResult":
        tw = data.get("time_weights")
        cfg = data.get("config")
        return cls(
            kind=data["kind"],
            att=float(data["att"]),
            periods=tuple(data["periods"]),
            t0=int(data["t0"]),
            treated_units=tuple(data["treated_units"]),
            control_units=tuple(data["control_units"]),
            unit_weights=WeightVector(**data["unit_weights"]),
            time_weights=None if tw is None else WeightVector(**tw),
            treated_trajectory=np.asarray(data["treated_trajectory"], dtype=float),
            synthetic_trajectory=np.asarray(data["synthetic_trajectory"], dtype=float),
            pre_fit_rmse=float(data["pre_fit_rmse"]),
            config=None if cfg is None else AnalysisConfig.from_dict(cfg),
            diagnostics=dict(data.get("diagnostics", {})),
        )


def _att(treated, synthetic, t0, lam) -> float:
    diff = np.asarray(treated) - np.asarray(synthetic)
    att = diff[t0:].mean()
    if lam is not None:
        att -= np.asarray(lam) @ diff[:t0]
    return float(att)


def noise_level(controls_pre: np.ndarray) -> float:
    """Standard deviation (ddof=1) of all first differences of control pre-period outcomes."""
    diffs = np.diff(controls_pre, axis=1).ravel()
    if diffs.size < 2:
        return 0.0
    return float(np.std(diffs, ddof=1))


def unit_ridge(n_treated: int, n_post: int, sigma: float) -> float:
    """Ridge level for SDID unit weights: ``(n_treated * n_post) ** 0.25 * sigma``."""
    return float((n_treated * n_post) ** 0.25 * sigma)


def _pinned(weights, n, what) -> WeightVector:
    if isinstance(weights, WeightVector):
        weights = weights.weights
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise ConfigError(f"{what} weights have length {w.shape[0]}, expected {n}")
    return WeightVector(w)


def estimate(
    panel: Panel,
    kind: Optional[str] = None,
    config: Optional[AnalysisConfig] = None,
    *,
    unit_weights=None,
    time_weights=None,
    zeta_omega: Optional[float] = None,
) -> EstimateResult:
    """
    Estimate the ATT on ``panel``.

    Parameters
    ----------
    panel : Panel
        Must carry ``t0`` or receive it from ``config.t0``.
    kind : {'did', 'sc', 'sdid'}, optional
        Defaults to ``config.estimator``.
    config : AnalysisConfig, optional
    unit_weights, time_weights : array_like, optional
        Pin the weights instead of solving for them (``sdid`` only).
    zeta_omega : float, optional
        Override the data-driven ridge level of the SDID unit weights.

    Returns
    -------
    EstimateResult
    """
    config = config or AnalysisConfig()
    kind = kind or config.estimator
    if kind not in ESTIMATORS:
        raise ConfigError(f"unknown estimator {kind!r}")
    if (unit_weights is not None or time_weights is not None) and kind != "sdid":
        raise ConfigError("weights can only be pinned for the sdid estimator")
    if panel.t0 is None:
        if config.t0 is None:
            raise ConfigError("number of pre-treatment periods (t0) is not set")
        panel = panel.with_t0(config.t0)
    t0 = panel.t0
    n_post = len(panel.periods) - t0
    mask = panel.treated_mask
    if mask.all() or not mask.any():
        raise ConfigError("need at least one treated and one control unit")
    if n_post < 1:
        raise ConfigError("need at least one post-treatment period")

    Y = panel.outcomes
    controls = Y[~mask]
    treated = Y[mask].mean(axis=0)
    n0 = controls.shape[0]
    settings: SolverSettings = config.solver
    diagnostics: dict = {}

    if kind == "did":
        omega = WeightVector.uniform(n0)
        lam = WeightVector.uniform(t0)
    elif kind == "sc":
        omega = solve_simplex_ls(
            SimplexLSProblem(controls[:, :t0].T, treated[:t0], 0.0, False), settings
        )
        lam = None
    else:
        sigma = noise_level(controls[:, :t0])
        if zeta_omega is None:
            zeta_omega = unit_ridge(int(mask.sum()), n_post, sigma)
        zeta_lambda = TIME_WEIGHT_JITTER * sigma
        diagnostics.update(noise_level=sigma, zeta_omega=zeta_omega, zeta_lambda=zeta_lambda)
        if unit_weights is None:
            omega = solve_simplex_ls(
                SimplexLSProblem(controls[:, :t0].T, treated[:t0], zeta_omega, True), settings
            )
        else:
            omega = _pinned(unit_weights, n0, "unit")
        if time_weights is None:
            lam = solve_simplex_ls(
                SimplexLSProblem(controls[:, :t0], controls[:, t0:].mean(axis=1), zeta_lambda, True),
                settings,
            )
        else:
            lam = _pinned(time_weights, t0, "time")

    synthetic = omega.weights @ controls
    resid = treated[:t0] - synthetic[:t0]
    if kind == "did" or unit_weights is not None:
        omega = WeightVector(omega.weights, float(resid.mean()))
    pre_fit_rmse = float(np.sqrt(np.mean((resid - omega.intercept) ** 2)))
    if omega.iterations:
        diagnostics["unit_weight_iterations"] = omega.iterations
    if lam is not None and lam.iterations:
        diagnostics["time_weight_iterations"] = lam.iterations

    att = _att(treated, synthetic, t0, None if lam is None else lam.weights)
    return EstimateResult(
        kind=kind,
        att=att,
        periods=panel.periods,
        t0=t0,
        treated_units=panel.treated_units,
        control_units=panel.control_units,
        unit_weights=omega,
        time_weights=lam,
        treated_trajectory=treated,
        synthetic_trajectory=synthetic,
        pre_fit_rmse=pre_fit_rmse,
        config=config,
        diagnostics=diagnostics,
    )


def treated_pre_mean(panel: Panel) -> float:
    """Mean outcome of treated units over the pre-treatment periods."""
    t0 = panel.require_t0()
    return float(panel.outcomes[panel.treated_mask, :t0].mean())


def relative_effect(result: EstimateResult, baseline: float) -> float:
    """ATT as a fraction of a positive baseline level."""
    if not baseline > 0:
        raise DegenerateOutcomeError(f"baseline must be positive, got {baseline}")
    return float(result.att / baseline)
