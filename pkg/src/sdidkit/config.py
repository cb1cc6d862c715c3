"""Run configuration shared by the estimators, placebo inference and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .optim import SolverSettings
from .panel import TRANSFORMS

ESTIMATORS = ("did", "sc", "sdid")
DEFAULT_SEED = 20250727  # arbitrary; the date of the tournament final
DEFAULT_REPLICATIONS = 400


@dataclass(frozen=True)
class AnalysisConfig:
    estimator: str = "sdid"
    transform: str = "demean_pre"
    t0: Optional[int] = None
    treated_subset: Optional[tuple] = None
    replications: int = DEFAULT_REPLICATIONS
    seed: int = DEFAULT_SEED
    ci_levels: tuple = (0.95, 0.90)
    solver: SolverSettings = field(default_factory=SolverSettings)
    drop_unbalanced: bool = False

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; choose from {ESTIMATORS}")
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.transform!r}; choose from {TRANSFORMS}")
        if self.t0 is not None and int(self.t0) < 1:
            raise ConfigError(f"t0 must be >= 1, got {self.t0}")
        if int(self.replications) < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if int(self.seed) < 0:
            raise ConfigError("seed must be a nonnegative integer")
        levels = tuple(float(x) for x in self.ci_levels)
        if not levels or any(not 0.0 < x < 1.0 for x in levels):
            raise ConfigError(f"ci_levels must be a nonempty list of values in (0, 1), got {levels}")
        object.__setattr__(self, "ci_levels", levels)
        if self.treated_subset is not None:
            object.__setattr__(self, "treated_subset", tuple(self.treated_subset))

    def replace(self, **changes) -> "AnalysisConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "transform": self.transform,
            "t0": self.t0,
            "treated_subset": list(self.treated_subset) if self.treated_subset is not None else None,
            "replications": self.replications,
            "seed": self.seed,
            "ci_levels": list(self.ci_levels),
            "solver": self.solver.to_dict(),
            "drop_unbalanced": self.drop_unbalanced,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisConfig":
        data = dict(data)
        solver = data.pop("solver", None) or {}
        return cls(solver=SolverSettings(**solver), **data)
