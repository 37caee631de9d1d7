"""Command-line runner: analytic values, bounds, Monte Carlo, figures and validation.

Every subcommand prints one JSON object per curve or point on stdout.
Options may also come from an INI file given with ``--config``; keys in the
``[defaults]`` section and in a section named after the subcommand use the
long flag names without dashes (``threshold-ratio = 2``).  Flags on the
command line win.

Exit codes: 0 success, 2 invalid arguments, 3 convergence failure,
4 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from locoutage.analytic import AllAnchorQuery, allanchor_lop
from locoutage.bounds import (
    DeltaQuery,
    GeometryRatio,
    delta_from_threshold,
    p_delta,
    p_delta_exact,
    threshold_from_delta,
    two_anchor_bounds,
)
from locoutage.errors import ConvergenceError, DomainError
from locoutage.figures import Table, default_settings, figure_tables, write_csv, write_svg
from locoutage.montecarlo import (
    NetworkConfig,
    Selector,
    TrialConfig,
    mc_allanchor_lop,
    mc_q_oracle,
    mc_two_anchor_lop,
)

EXIT_OK, EXIT_ARGS, EXIT_CONVERGENCE, EXIT_VALIDATION = 0, 2, 3, 4


class _ArgError(Exception):
    pass


def _number(text: str) -> float:
    text = text.strip().lower()
    if "pi" in text:
        # accepts forms like pi/12 or 0.5*pi
        num, _, den = text.partition("/")
        factor = float(num.replace("pi", "").replace("*", "") or 1.0)
        return factor * math.pi / (float(den) if den else 1.0)
    return float(text)


def int_grid(text: str) -> list[int]:
    """``"3"``, ``"2,4,8"`` or the inclusive range ``"2..10"``."""
    out = []
    for part in str(text).split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    return out


def float_grid(text: str) -> list[float]:
    try:
        out = [_number(p) for p in str(text).split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    return out


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=False, default=float))


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    opts = {
        "n": dict(type=int_grid, help="anchor counts, e.g. 3 or 2..10 or 3,4,5"),
        "delta": dict(type=float_grid, help="half-widths in radians (pi/12 accepted)"),
        "threshold-ratio": dict(type=float_grid, help="SPEB thresholds in units of P0"),
        "r-over-r": dict(type=float, help="ratio R/r of the communication and uncertainty radii"),
        "trials": dict(type=int, help="Monte Carlo trials"),
        "seed": dict(type=int, help="64-bit seed"),
        "agent-policy": dict(choices=["at-center", "uniform-in-ur"]),
        "speb-policy": dict(choices=["at-agent", "worst-case-over-ur"]),
        "selector": dict(choices=["all", "optimal", "suboptimal"]),
        "out": dict(type=Path, help="output directory for CSV/SVG files"),
        "format": dict(help="comma list of csv,svg"),
        "workers": dict(type=int, help="parallel worker threads"),
    }
    for name in names:
        p.add_argument(f"--{name}", **opts[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locoutage", description="Localization outage probability toolkit")
    parser.add_argument("--config", type=Path, help="INI file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="all-anchor LOP from the random-walk integral")
    _add_common(p, "n", "threshold-ratio", "out")

    p = sub.add_parser("bounds", help="two-anchor LOP bounds and P(delta)")
    _add_common(p, "n", "threshold-ratio", "delta", "r-over-r", "out")

    p = sub.add_parser("mc", help="Monte Carlo LOP estimate")
    _add_common(p, "n", "threshold-ratio", "r-over-r", "trials", "seed", "agent-policy", "speb-policy", "selector", "out", "workers")

    p = sub.add_parser("figure", help="reproduce a figure as CSV and SVG")
    p.add_argument("which", choices=["fig3", "fig4", "fig5"])
    _add_common(p, "n", "threshold-ratio", "r-over-r", "trials", "seed", "agent-policy", "speb-policy", "out", "format", "workers")
    p.add_argument("--linear-y", action="store_true", help="linear instead of logarithmic y axis")

    p = sub.add_parser("q-oracle", help="simulate the Q correction under both radius conventions")
    _add_common(p, "delta", "r-over-r", "trials", "seed", "workers")
    p.add_argument("--theta", type=float_grid, help="included angles at which to evaluate")

    p = sub.add_parser("validate", help="run the acceptance checks")
    _add_common(p, "workers")
    p.add_argument("--criteria", type=int_grid, help="subset of criteria to run")
    return parser


_DEFAULTS = {
    "analytic": {"n": [2], "threshold_ratio": [2.0]},
    "bounds": {"n": [3], "threshold_ratio": None, "delta": None, "r_over_r": 100.0},
    "mc": {
        "n": [3], "threshold_ratio": [2.0], "r_over_r": 100.0, "trials": 100_000, "seed": 0,
        "agent_policy": "at-center", "speb_policy": "at-agent", "selector": "all", "workers": 1,
    },
    "figure": {"format": "csv,svg", "out": Path("."), "workers": 1},
    "q-oracle": {"delta": [math.pi / 6], "theta": [math.pi / 2], "r_over_r": 100.0, "trials": 1_000_000, "seed": 0, "workers": 1},
    "validate": {"workers": 1},
}


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from built-in defaults and then the config file; flags win."""
    values = dict(_DEFAULTS.get(args.command, {}))
    if args.config is not None:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise _ArgError(f"cannot read config file {args.config}")
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        types = {a.dest: a.type for a in sub._actions}  # noqa: SLF001
        for section in ("defaults", args.command):
            if cp.has_section(section):
                for key, raw in cp.items(section):
                    dest = key.replace("-", "_")
                    if dest not in types:
                        raise _ArgError(f"unknown config key {key!r} in [{section}]")
                    conv = types[dest] or str
                    try:
                        values[dest] = conv(raw)
                    except (ValueError, argparse.ArgumentTypeError) as exc:
                        raise _ArgError(f"bad value for {key}: {raw!r}") from exc
    for key, value in values.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _write_table(table: Table, out: Path | None) -> str | None:
    if out is None:
        return None
    out.mkdir(parents=True, exist_ok=True)
    return str(write_csv(table, out))


# --------------------------------------------------------------------------


def cmd_analytic(args) -> int:
    rows = []
    for n in args.n:
        for t in args.threshold_ratio:
            value = allanchor_lop(AllAnchorQuery(n, t))
            rows.append((n, t, value))
            _emit({"kind": "analytic", "N": n, "threshold_ratio": t, "allanchor_lop": value})
    _write_table(Table("analytic", ("N", "threshold_ratio", "allanchor_lop"), rows), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    geom = GeometryRatio(args.r_over_r, 1.0)
    if args.delta is not None and args.threshold_ratio is not None:
        raise _ArgError("give either --delta or --threshold-ratio, not both")
    if args.delta is not None:
        thresholds = [threshold_from_delta(d) for d in args.delta]
    else:
        thresholds = args.threshold_ratio or [2.0]
    rows = []
    for n in args.n:
        if n < 2:
            raise _ArgError("bounds need N >= 2")
        for t in thresholds:
            rep = two_anchor_bounds(n, t, geom)
            record = {"kind": "bounds", "N": n, "threshold_ratio": t, "lower": rep.lower, "upper": rep.upper}
            if t > 1.0:
                delta = delta_from_threshold(t)
                pd = p_delta(DeltaQuery(n, delta))
                record.update(delta=delta, p_delta_lower=pd.lower, p_delta_upper=pd.upper)
                record["p_delta_exact"] = p_delta_exact(DeltaQuery(n, delta)) if n <= 30 else None
            rows.append((n, t, rep.lower, rep.upper))
            _emit(record)
    _write_table(Table("bounds", ("N", "threshold_ratio", "lower_bound", "upper_bound"), rows), args.out)
    return EXIT_OK


def cmd_mc(args) -> int:
    rows = []
    for n in args.n:
        for t in args.threshold_ratio:
            net = NetworkConfig(n, big_r=args.r_over_r, small_r=1.0, threshold_ratio=t)
            cfg = TrialConfig(net, args.trials, args.seed, args.agent_policy, args.speb_policy)
            if args.selector == "all":
                est = mc_allanchor_lop(cfg, args.workers)
            else:
                est = mc_two_anchor_lop(cfg, Selector(args.selector), args.workers)
            rows.append((n, t, est.mean, est.stderr, est.ci95[0], est.ci95[1]))
            _emit({"kind": "mc", "selector": args.selector, "N": n, "threshold_ratio": t, **asdict(est)})
    cols = ("N", "threshold_ratio", "lop", "stderr", "ci95_low", "ci95_high")
    _write_table(Table(f"mc_{args.selector}", cols, rows), args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    formats = {f.strip() for f in args.format.split(",") if f.strip()}
    if not formats <= {"csv", "svg"}:
        raise _ArgError(f"unknown format in {args.format!r}")
    if args.threshold_ratio is not None and args.which != "fig5" and len(args.threshold_ratio) != 1:
        raise _ArgError("this figure takes a single --threshold-ratio")
    overrides = dict(
        n_values=tuple(args.n) if args.n else None,
        r_over_r=args.r_over_r,
        trials=args.trials,
        seed=args.seed,
        agent_policy=args.agent_policy,
        speb_policy=args.speb_policy,
        workers=args.workers,
    )
    if args.threshold_ratio:
        key = "thresholds" if args.which == "fig5" else "threshold_ratio"
        overrides[key] = tuple(args.threshold_ratio) if key == "thresholds" else args.threshold_ratio[0]
    settings = default_settings(args.which, **overrides)
    tables = figure_tables(args.which, settings)
    args.out.mkdir(parents=True, exist_ok=True)
    paths = [write_csv(t, args.out) for t in tables]
    for t, p in zip(tables, paths):
        _emit({"figure": args.which, "curve": t.name, "points": len(t.rows), "csv": str(p), "columns": list(t.columns)})
    if "svg" in formats:
        svg = write_svg(args.which, paths, args.out / f"{args.which}.svg", log_y=not args.linear_y)
        _emit({"figure": args.which, "svg": str(svg)})
    if "csv" not in formats:
        for p in paths:
            p.unlink()
    return EXIT_OK


def cmd_q_oracle(args) -> int:
    from locoutage.bounds import q_delta

    geom = GeometryRatio(args.r_over_r, 1.0)
    for d in args.delta:
        for th in args.theta:
            q = q_delta(th, d, geom)
            for conv in ("R", "R-plus-r"):
                est = mc_q_oracle(d, th, geom, conv, args.trials, args.seed, args.workers)
                z = (est.mean - q) / est.stderr if est.stderr > 0 else (0.0 if est.mean == q else math.inf)
                _emit({
                    "kind": "q-oracle", "delta": d, "theta": th, "convention": conv, "q_expression": q,
                    "mc": est.mean, "stderr": est.stderr, "z": z, "matches": abs(z) <= 3,
                })
    return EXIT_OK


def cmd_validate(args) -> int:
    from locoutage.validation import run_all

    results = run_all(args.workers, args.criteria, echo=lambda line: print(line, file=sys.stderr))
    for r in results:
        _emit({"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail, "seconds": round(r.seconds, 3)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


_COMMANDS = {
    "analytic": cmd_analytic,
    "bounds": cmd_bounds,
    "mc": cmd_mc,
    "figure": cmd_figure,
    "q-oracle": cmd_q_oracle,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        return _COMMANDS[args.command](args)
    except (_ArgError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
