from pathlib import Path

import numpy as np
import pytest

from sdidkit.panel import Panel

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "fixture_july_panel.csv"


@pytest.fixture
def fixture_csv():
    return FIXTURE


def make_panel(Y, n_treated=1, t0=None):
    """Panel whose last ``n_treated`` rows are treated."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    units = [f"u{i}" for i in range(n)]
    return Panel(units, range(Y.shape[1]), Y, units[n - n_treated:], t0=t0)


def csv_bytes(rows, header="unit,period,outcome,treated"):
    lines = [header] + [",".join(str(x) for x in r) for r in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")
