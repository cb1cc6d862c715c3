"""
Command-line interface.

Subcommands: ``validate``, ``estimate``, ``plot-data``, ``replicate``, ``simulate``.
Exit codes: 0 success, 1 data or configuration error, 2 convergence or
inference error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .config import DEFAULT_REPLICATIONS, DEFAULT_SEED, ESTIMATORS, AnalysisConfig
from .errors import ParseError, SdidkitError
from .figures import figure_data, render_svg
from .optim import SolverSettings
from .panel import TRANSFORMS, CsvSchema, Panel, load_panel
from .pipeline import run_analysis, summarize
from .replication import VARIANTS, replicate
from .simulate import DGPConfig, run_monte_carlo, summary_table


def _dumps(obj) -> str:
    return json.dumps(_finite(obj), indent=2, ensure_ascii=False) + "\n"


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def _schema(args) -> CsvSchema:
    return CsvSchema(args.unit_col, args.period_col, args.outcome_col, args.treated_col)


def _load(args) -> Panel:
    path = Path(args.input)
    if path.suffix.lower() == ".json":
        return Panel.from_dict(_read_json(path))
    return load_panel(path, _schema(args), drop_unbalanced=getattr(args, "drop_unbalanced", False))


def _split(values):
    if not values:
        return None
    out = []
    for v in values:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return tuple(out)


def cmd_validate(args) -> int:
    panel = _load(args)
    n_units, n_periods = panel.shape
    print(
        f"{n_units} units × {n_periods} periods, "
        f"{panel.n_treated} treated, {panel.n_controls} control"
    )
    print(f"periods: {panel.periods[0]}-{panel.periods[-1]}; balanced: yes")
    if panel.dropped_units:
        print("dropped (incomplete series): " + ", ".join(panel.dropped_units))
    if args.output:
        _write(_dumps(panel.to_dict()), args.output)
    return 0


def _analysis_config(args) -> AnalysisConfig:
    return AnalysisConfig(
        estimator=args.estimator,
        transform=args.transform,
        t0=args.t0,
        treated_subset=_split(args.treated),
        replications=args.replications,
        seed=args.seed,
        ci_levels=tuple(args.ci_level) if args.ci_level else (0.95, 0.90),
        solver=SolverSettings(max_iterations=args.max_iterations, tolerance=args.tolerance),
        drop_unbalanced=args.drop_unbalanced,
    )


def cmd_estimate(args) -> int:
    config = _analysis_config(args)
    bundle = run_analysis(_load(args), config, workers=args.workers)
    _write(_dumps(bundle), args.output)
    print(summarize(bundle), file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return 0


def cmd_plot_data(args) -> int:
    bundle = _read_json(args.input)
    if "estimate" in bundle:
        fig = figure_data(bundle)
    elif "series" in bundle:
        fig = bundle
    else:
        raise ParseError(f"{args.input}: neither an estimate bundle nor figure data")
    if args.format == "svg":
        _write(render_svg(fig, title=args.title or ""), args.output)
    else:
        _write(_dumps(fig), args.output)
    return 0


def cmd_replicate(args) -> int:
    bundle = replicate(
        Path(args.input), args.which, args.seed, replications=args.replications,
        schema=_schema(args), workers=args.workers,
    )
    _write(_dumps(bundle), args.output)
    if args.svg:
        Path(args.svg).write_text(render_svg(bundle["figure"], title=args.which), encoding="utf-8")
    print(summarize(bundle), file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return 0


def cmd_simulate(args) -> int:
    config = DGPConfig.from_file(args.config) if args.config else DGPConfig()
    if args.seed is not None:
        config = DGPConfig(**{**config.to_dict(), "seed": args.seed})
    kinds = args.estimator or list(ESTIMATORS)
    summaries = run_monte_carlo(
        config, kinds, args.reps,
        placebo_replications=args.placebo_replications,
        with_inference=not args.no_inference,
    )
    doc = {
        "schema_version": 1,
        "dgp": config.to_dict(),
        "reps": args.reps,
        "placebo_replications": args.placebo_replications,
        "summaries": {k: s.to_dict() for k, s in summaries.items()},
    }
    if args.output:
        _write(_dumps(doc), args.output)
    print(summary_table(summaries, config.true_att))
    return 0


def _add_schema_args(p):
    p.add_argument("--unit-col", default="unit")
    p.add_argument("--period-col", default="period")
    p.add_argument("--outcome-col", default="outcome")
    p.add_argument("--treated-col", default="treated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdidkit", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a long-format CSV panel")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="also write the panel as JSON")
    p.add_argument("--drop-unbalanced", action="store_true")
    _add_schema_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("estimate", help="estimate the ATT with placebo inference")
    p.add_argument("--input", required=True, help="long CSV or panel JSON")
    p.add_argument("--output", help="JSON output path (default: stdout)")
    p.add_argument("--estimator", choices=ESTIMATORS, default="sdid")
    p.add_argument("--transform", choices=TRANSFORMS, default="demean_pre")
    p.add_argument("--t0", type=int, help="number of pre-treatment periods (default: all but the last)")
    p.add_argument("--treated", action="append", help="keep only these treated units (repeatable or comma-separated)")
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--ci-level", type=float, action="append")
    p.add_argument("--drop-unbalanced", action="store_true")
    p.add_argument("--max-iterations", type=int, default=SolverSettings.max_iterations)
    p.add_argument("--tolerance", type=float, default=SolverSettings.tolerance)
    p.add_argument("--workers", type=int, default=1)
    _add_schema_args(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("plot-data", help="figure series (json) or a static figure (svg)")
    p.add_argument("--input", required=True, help="output of estimate or replicate")
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "svg"), default="json")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("replicate", help="run a preconfigured host-city analysis")
    p.add_argument("--input", required=True)
    p.add_argument("--which", choices=VARIANTS, default="all_hosts")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--output")
    p.add_argument("--svg", help="also write the figure as SVG")
    p.add_argument("--workers", type=int, default=1)
    _add_schema_args(p)
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("simulate", help="Monte Carlo study on synthetic panels")
    p.add_argument("--config", help="DGP config file (.json or .toml)")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--estimator", choices=ESTIMATORS, action="append")
    p.add_argument("--placebo-replications", type=int, default=50)
    p.add_argument("--no-inference", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SdidkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
