"""
Balanced unit x period panels: construction, CSV ingestion and outcome transforms.

A :class:`Panel` is immutable. Every transform returns a new panel and leaves
its input untouched, so panels can be shared freely between threads or
worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    AssignmentError,
    BalanceError,
    ConfigError,
    DegenerateOutcomeError,
    DimensionError,
    DuplicateError,
    ParseError,
)

PANEL_SCHEMA_VERSION = 1

Source = Union[str, os.PathLike, bytes, IO[bytes], IO[str]]


@dataclass(frozen=True)
class CsvSchema:
    """Column names of the long-format CSV."""

    unit: str = "unit"
    period: str = "period"
    outcome: str = "outcome"
    treated: str = "treated"

    def columns(self) -> tuple[str, str, str, str]:
        return (self.unit, self.period, self.outcome, self.treated)


@dataclass(frozen=True, eq=False)
class Panel:
    """
    Balanced outcome panel with block (simultaneous) treatment assignment.

    Parameters
    ----------
    units : sequence of str
        Unit identifiers, unique, in row order of ``outcomes``.
    periods : sequence of int
        Strictly increasing period labels, in column order of ``outcomes``.
    outcomes : array_like, shape (n_units, n_periods)
        Finite outcome values.
    treated_units : iterable of str
        Units that receive treatment after the first ``t0`` periods.
    t0 : int, optional
        Number of leading pre-treatment periods. Left unset by the CSV loader;
        the analysis configuration supplies it.
    dropped_units : sequence of str
        Units removed during ingestion because their series were incomplete.
        Provenance only; not part of the data.
    """

    units: tuple
    periods: tuple
    outcomes: np.ndarray
    treated_units: tuple
    t0: Optional[int] = None
    dropped_units: tuple = field(default=())

    def __post_init__(self):
        units = tuple(str(u) for u in self.units)
        periods = tuple(int(p) for p in self.periods)
        Y = np.array(self.outcomes, dtype=float, copy=True)
        if Y.ndim != 2 or Y.shape != (len(units), len(periods)):
            raise DimensionError(
                f"outcomes has shape {Y.shape}, expected ({len(units)}, {len(periods)})"
            )
        if len(set(units)) != len(units):
            raise DuplicateError(_first_duplicate(units), None)
        if any(b <= a for a, b in zip(periods, periods[1:])):
            raise ConfigError("period labels must be unique and strictly increasing")
        if not np.all(np.isfinite(Y)):
            i, j = np.argwhere(~np.isfinite(Y))[0]
            raise ParseError(f"non-finite outcome for unit {units[i]!r} in period {periods[j]}")
        treated_set = {str(u) for u in self.treated_units}
        unknown = treated_set.difference(units)
        if unknown:
            raise AssignmentError(f"treated units not in panel: {sorted(unknown)}")
        if not treated_set:
            raise AssignmentError("panel has no treated units")
        if len(treated_set) == len(units):
            raise AssignmentError("panel has no control units")
        treated = tuple(u for u in units if u in treated_set)
        if self.t0 is not None:
            t0 = int(self.t0)
            if not 1 <= t0 < len(periods):
                raise ConfigError(
                    f"t0={t0} must satisfy 1 <= t0 < number of periods ({len(periods)})"
                )
            object.__setattr__(self, "t0", t0)
        Y.setflags(write=False)
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "outcomes", Y)
        object.__setattr__(self, "treated_units", treated)
        object.__setattr__(self, "dropped_units", tuple(str(u) for u in self.dropped_units))

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.units == other.units
            and self.periods == other.periods
            and self.treated_units == other.treated_units
            and self.t0 == other.t0
            and np.array_equal(self.outcomes, other.outcomes)
        )

    __hash__ = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.outcomes.shape

    @property
    def treated_mask(self) -> np.ndarray:
        treated = set(self.treated_units)
        return np.array([u in treated for u in self.units])

    @property
    def control_units(self) -> tuple:
        treated = set(self.treated_units)
        return tuple(u for u in self.units if u not in treated)

    @property
    def n_treated(self) -> int:
        return len(self.treated_units)

    @property
    def n_controls(self) -> int:
        return len(self.units) - len(self.treated_units)

    @property
    def n_post(self) -> int:
        return len(self.periods) - self.require_t0()

    def require_t0(self) -> int:
        if self.t0 is None:
            raise ConfigError("number of pre-treatment periods (t0) is not set")
        return self.t0

    def with_t0(self, t0: int) -> "Panel":
        return self._replace(t0=t0)

    def with_treated(self, treated_units: Iterable[str]) -> "Panel":
        return self._replace(treated_units=tuple(treated_units))

    def select_units(self, units: Sequence[str]) -> "Panel":
        """Keep ``units`` (in the given order); treatment flags carry over."""
        index = {u: i for i, u in enumerate(self.units)}
        missing = [u for u in units if u not in index]
        if missing:
            raise ConfigError(f"units not in panel: {missing}")
        rows = [index[u] for u in units]
        treated = set(self.treated_units)
        return self._replace(
            units=tuple(units),
            outcomes=self.outcomes[rows],
            treated_units=tuple(u for u in units if u in treated),
        )

    def _replace(self, **changes) -> "Panel":
        fields = dict(
            units=self.units,
            periods=self.periods,
            outcomes=self.outcomes,
            treated_units=self.treated_units,
            t0=self.t0,
            dropped_units=self.dropped_units,
        )
        fields.update(changes)
        return Panel(**fields)

    def to_dict(self) -> dict:
        return {
            "schema_version": PANEL_SCHEMA_VERSION,
            "units": list(self.units),
            "periods": list(self.periods),
            "outcomes": self.outcomes.tolist(),
            "treated_units": list(self.treated_units),
            "t0": self.t0,
            "dropped_units": list(self.dropped_units),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Panel":
        try:
            version = data.get("schema_version", PANEL_SCHEMA_VERSION)
            if version != PANEL_SCHEMA_VERSION:
                raise ParseError(f"unsupported panel schema_version {version}")
            return cls(
                units=data["units"],
                periods=data["periods"],
                outcomes=np.asarray(data["outcomes"], dtype=float).reshape(
                    len(data["units"]), len(data["periods"])
                ),
                treated_units=data["treated_units"],
                t0=data.get("t0"),
                dropped_units=data.get("dropped_units", ()),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed panel JSON: {exc}") from exc


def _first_duplicate(items):
    seen = set()
    for item in items:
        if item in seen:
            return item
        seen.add(item)
    return None


def _read_text(source: Source) -> str:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    if isinstance(raw, str):
        return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc


def load_panel(
    source: Source,
    schema: Optional[CsvSchema] = None,
    *,
    periods: Optional[Sequence[int]] = None,
    units: Optional[Sequence[str]] = None,
    drop_unbalanced: bool = False,
    t0: Optional[int] = None,
) -> Panel:
    """
    Read a long-format CSV (one row per unit-period) into a balanced panel.

    Parameters
    ----------
    source : path, bytes or file object
        UTF-8 CSV with a header row.
    schema : CsvSchema, optional
        Column mapping; defaults to ``unit,period,outcome,treated``.
    periods : sequence of int, optional
        Keep only these periods. Requested periods absent from the file raise
        :class:`ConfigError`.
    units : sequence of str, optional
        Keep only these units. Units absent from the file raise :class:`ConfigError`.
    drop_unbalanced : bool
        Drop units with incomplete series instead of raising :class:`BalanceError`.
        Dropped units are listed in ``Panel.dropped_units``.
    t0 : int, optional
        Number of pre-treatment periods to attach to the returned panel.

    Returns
    -------
    Panel
        Units ordered by first appearance, periods ascending.
    """
    schema = schema or CsvSchema()
    text = _read_text(source)
    if not text.strip():
        raise ParseError("empty input: expected a CSV header row")

    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in schema.columns() if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {missing}; header is {header}")

    wanted_periods = None if periods is None else {int(p) for p in periods}
    wanted_units = None if units is None else set(units)

    cells: dict[tuple[str, int], float] = {}
    flags: dict[str, int] = {}
    order: list[str] = []
    seen_periods: set[int] = set()
    for lineno, row in enumerate(reader, start=2):
        unit = (row[schema.unit] or "").strip()
        if not unit:
            raise ParseError(f"line {lineno}: empty unit identifier")
        try:
            period = int((row[schema.period] or "").strip())
        except ValueError:
            raise ParseError(
                f"line {lineno}: period {row[schema.period]!r} is not an integer"
            ) from None
        if wanted_periods is not None and period not in wanted_periods:
            continue
        if wanted_units is not None and unit not in wanted_units:
            continue
        try:
            value = float((row[schema.outcome] or "").strip())
        except ValueError:
            raise ParseError(
                f"line {lineno}: outcome {row[schema.outcome]!r} is not a number"
            ) from None
        if not math.isfinite(value):
            raise ParseError(f"line {lineno}: non-finite outcome for {unit!r} in {period}")
        flag_text = (row[schema.treated] or "").strip()
        if flag_text not in ("0", "1"):
            raise ParseError(f"line {lineno}: treated flag {flag_text!r} is not 0 or 1")
        flag = int(flag_text)

        if unit not in flags:
            flags[unit] = flag
            order.append(unit)
        elif flags[unit] != flag:
            raise AssignmentError(f"treated flag changes within unit {unit!r} (line {lineno})")
        if (unit, period) in cells:
            raise DuplicateError(unit, period)
        cells[(unit, period)] = value
        seen_periods.add(period)

    if wanted_periods is not None:
        absent = sorted(wanted_periods - seen_periods)
        if absent:
            raise ConfigError(f"periods absent from input: {absent}")
    if wanted_units is not None:
        absent_units = [u for u in units if u not in flags]
        if absent_units:
            raise ConfigError(f"units absent from input: {absent_units}")
    if not order:
        raise ParseError("input has a header but no data rows")

    all_periods = sorted(seen_periods)
    kept, dropped = [], []
    for unit in order:
        gap = next((p for p in all_periods if (unit, p) not in cells), None)
        if gap is None:
            kept.append(unit)
        elif drop_unbalanced:
            dropped.append(unit)
        else:
            raise BalanceError(unit, gap)

    Y = np.array([[cells[(u, p)] for p in all_periods] for u in kept], dtype=float)
    return Panel(
        units=kept,
        periods=all_periods,
        outcomes=Y.reshape(len(kept), len(all_periods)),
        treated_units=[u for u in kept if flags[u] == 1],
        t0=t0,
        dropped_units=dropped,
    )


def panel_to_csv(panel: Panel, schema: Optional[CsvSchema] = None) -> str:
    """Long-format CSV whose :func:`load_panel` parse equals ``panel`` (t0 aside)."""
    schema = schema or CsvSchema()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(schema.columns())
    treated = set(panel.treated_units)
    for i, unit in enumerate(panel.units):
        flag = 1 if unit in treated else 0
        for j, period in enumerate(panel.periods):
            writer.writerow([unit, period, repr(float(panel.outcomes[i, j])), flag])
    return buf.getvalue()


def demean_pre(panel: Panel) -> Panel:
    """Express each unit's series as deviations from its own pre-treatment mean."""
    t0 = panel.require_t0()
    Y = panel.outcomes
    return panel._replace(outcomes=Y - Y[:, :t0].mean(axis=1, keepdims=True))


def growth_transform(panel: Panel) -> Panel:
    """
    Period-on-period growth rates ``Y[t] / Y[t-1] - 1``.

    The first period is consumed as the base, so the result has one period
    fewer and ``t0`` (when set) drops by one.
    """
    Y = panel.outcomes
    if Y.shape[1] < 2:
        raise ConfigError("growth transform needs at least two periods")
    base = Y[:, :-1]
    zero = np.argwhere(base == 0)
    if zero.size:
        i, j = zero[0]
        raise DegenerateOutcomeError(
            f"zero outcome for unit {panel.units[i]!r} in period {panel.periods[j]} "
            f"cannot serve as growth base for period {panel.periods[j + 1]}"
        )
    t0 = panel.t0
    if t0 is not None:
        t0 -= 1
        if t0 < 1:
            raise ConfigError("growth transform leaves no pre-treatment period (t0 would be 0)")
    return panel._replace(outcomes=Y[:, 1:] / base - 1.0, periods=panel.periods[1:], t0=t0)


def restrict_treated(panel: Panel, keep: Iterable[str]) -> Panel:
    """Keep only the treated units in ``keep``; other treated units leave the panel."""
    keep = list(dict.fromkeys(str(u) for u in keep))
    if not keep:
        raise ConfigError("treated subset is empty")
    treated = set(panel.treated_units)
    bad = [u for u in keep if u not in treated]
    if bad:
        raise ConfigError(f"not treated units of this panel: {bad}")
    drop = treated.difference(keep)
    return panel.select_units([u for u in panel.units if u not in drop])


def apply_transform(panel: Panel, kind: str) -> Panel:
    """Dispatch on a transform name: ``none``, ``demean_pre`` or ``growth``."""
    if kind == "none":
        return panel
    if kind == "demean_pre":
        return demean_pre(panel)
    if kind == "growth":
        return growth_transform(panel)
    raise ConfigError(f"unknown transform {kind!r}")


TRANSFORMS = ("none", "demean_pre", "growth")
