"""
Write the synthetic host-city fixture used by the tests and the README examples.

The numbers are invented. Only the shape mirrors the real July panel: the
same 25 city names, years 2017-2025, host flags, and two control cities
(Wallisellen, Rümlang) whose series start in 2021.
"""

import csv
import sys
from pathlib import Path

import numpy as np

from sdidkit.replication import load_manifest

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "fixture_july_panel.csv"
YEARS = list(range(2017, 2026))
COVID = {2020: 0.55, 2021: 0.75}
LATE_START = {"Wallisellen": 2021, "Rümlang": 2021}


def main(out=OUT):
    manifest = load_manifest()
    treated = manifest["treated_units"]
    controls = manifest["control_units"]
    rng = np.random.default_rng(2025)
    rows = []
    for city in treated + controls:
        is_host = city in treated
        level = rng.uniform(60_000, 400_000) if is_host else rng.uniform(6_000, 90_000)
        trend = rng.normal(0.01, 0.01)
        for k, year in enumerate(YEARS):
            if year < LATE_START.get(city, YEARS[0]):
                continue
            dip = COVID.get(year, 1.0) ** (1.3 if is_host else 1.0)
            value = level * (1 + trend) ** k * dip * (1 + rng.normal(0, 0.02))
            if is_host and year == 2025:
                value *= 1.02
            rows.append((city, year, round(value), int(is_host)))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["unit", "period", "outcome", "treated"])
        writer.writerows(rows)
    return out


if __name__ == "__main__":
    print(main(*sys.argv[1:]))
