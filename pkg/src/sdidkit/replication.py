"""Preconfigured analyses of the host-city overnight-stays panel."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .config import DEFAULT_SEED, AnalysisConfig
from .errors import ConfigError
from .figures import figure_data
from .optim import SolverSettings
from .panel import CsvSchema, load_panel
from .pipeline import run_analysis

VARIANTS = ("all_hosts", "main_hosts", "expanded", "growth")


@lru_cache(maxsize=None)
def _manifest_text() -> str:
    return resources.files("sdidkit").joinpath("data/replication_manifest.json").read_text(encoding="utf-8")


def load_manifest() -> dict:
    return json.loads(_manifest_text())


def variant_config(which: str, seed: int = DEFAULT_SEED, replications: int = 400,
                   solver: SolverSettings | None = None) -> AnalysisConfig:
    manifest = load_manifest()
    if which not in manifest["variants"]:
        raise ConfigError(f"unknown replication variant {which!r}; choose from {VARIANTS}")
    v = manifest["variants"][which]
    return AnalysisConfig(
        estimator=v["estimator"],
        transform=v["transform"],
        t0=v["t0"],
        treated_subset=v["treated_subset"],
        replications=replications,
        seed=seed,
        ci_levels=(0.95, 0.90),
        solver=solver or SolverSettings(),
        drop_unbalanced=v["drop_unbalanced"],
    )


def replicate(source, which: str, seed: int = DEFAULT_SEED, *, replications: int = 400,
              schema: CsvSchema | None = None, workers: int = 1) -> dict:
    """
    Load the panel for variant ``which`` and run its analysis.

    Only the manifest's cities and periods are read from ``source``. With
    ``drop_unbalanced`` set (the ``expanded`` variant) cities lacking any of
    the variant's periods are dropped and listed in the output.

    Raises
    ------
    ConfigError
        If a required period or city is absent, or a city's treated flag in
        the file disagrees with the manifest.
    """
    manifest = load_manifest()
    config = variant_config(which, seed, replications)
    variant = manifest["variants"][which]
    schema = schema or CsvSchema(**manifest["csv_schema"])
    cities = manifest["treated_units"] + manifest["control_units"]
    raw = load_panel(
        source,
        schema,
        periods=variant["periods"],
        units=cities,
        drop_unbalanced=variant["drop_unbalanced"],
    )
    expected = set(manifest["treated_units"]).intersection(raw.units)
    if set(raw.treated_units) != expected:
        raise ConfigError(
            f"treated flags in input {sorted(raw.treated_units)} disagree with manifest {sorted(expected)}"
        )
    bundle = run_analysis(raw, config, workers=workers, extra={"variant": which})
    bundle["figure"] = figure_data(bundle)
    return bundle
