# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

"""
ellipse-rigidity command line.

    ellipse-rigidity sweep --e-min 0 --e-max 0.9 --e-step 0.1 --gamma 3.5 --csv results.csv
    ellipse-rigidity orbit 0.3 5 --json
    ellipse-rigidity kappa 0.3 20
    ellipse-rigidity plot results.csv more.json --output norms.svg
    ellipse-rigidity cache clear
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

from .__about__ import __version__
from .billiard_orbits import build_orbit, closure_residual, max_lazutkin_deviation
from .cache import EccentricityCache, clear_cache, default_cache_dir
from .ellipse_geometry import make_ellipse
from .errors import DomainError, RigidityError
from .isospectral_operator import KAPPA_THRESHOLD, MAXQ
from .plot import plot_norms
from .sweep import build_config, load_config_file, read_results, render_csv, run_sweep

logger = logging.getLogger(__name__)

IO_EXIT_CODE = 4

# argparse dests that map one to one onto SweepConfig keys
_SWEEP_FLAGS = (
    "e_values", "e_min", "e_max", "e_step", "gamma_values", "C_cutoff",
    "kappa_threshold", "maxq", "q_cap", "q_min", "circle_accord", "below_half",
    "workers", "cache_dir", "csv_path", "json_path",
)
_GRID_FLAGS = ("e_min", "e_max", "e_step")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _optional_float(text: str) -> Optional[float]:
    if text.lower() in ("none", "off"):
        return None
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="errors only")
    common.add_argument("--cache-dir", dest="cache_dir", type=Path, default=None,
                        help="overrides $ELLIPSE_RIGIDITY_CACHE")

    parser = argparse.ArgumentParser(
        prog="ellipse-rigidity",
        description="Numerical test of dynamical spectral rigidity for ellipses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="max norm over an e/gamma grid")
    sweep.add_argument("--config", type=Path, help="flat key = value file")
    sweep.add_argument("--e", dest="e_values", type=_float_list, help="comma separated eccentricities")
    sweep.add_argument("--e-min", dest="e_min", type=float)
    sweep.add_argument("--e-max", dest="e_max", type=float)
    sweep.add_argument("--e-step", dest="e_step", type=float)
    sweep.add_argument("--gamma", dest="gamma_values", type=_float_list, help="comma separated, each in (3, 4)")
    sweep.add_argument("--C", dest="C_cutoff", type=int, help="harmonic cutoff J = C q")
    sweep.add_argument("--kappa-threshold", dest="kappa_threshold", type=float)
    sweep.add_argument("--maxq", type=int)
    sweep.add_argument("--q-cap", dest="q_cap", type=int)
    sweep.add_argument("--q-min", dest="q_min", type=int)
    sweep.add_argument("--circle-accord", dest="circle_accord", type=float)
    sweep.add_argument("--below-half", dest="below_half", type=_optional_float,
                       help="threshold, or 'none' to disable")
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--csv", dest="csv_path", type=Path)
    sweep.add_argument("--json", dest="json_path", type=Path)
    sweep.set_defaults(func=cmd_sweep)

    orbit = sub.add_parser("orbit", parents=[common], help="dump the 1/q periodic orbit")
    orbit.add_argument("e", type=float)
    orbit.add_argument("period", type=int)
    orbit.add_argument("--maxq", type=int, default=MAXQ)
    orbit.add_argument("--json", action="store_true", help="JSON instead of text")
    orbit.set_defaults(func=cmd_orbit)

    kappa = sub.add_parser("kappa", parents=[common], help="Marvizi-Melrose coefficients")
    kappa.add_argument("e", type=float)
    kappa.add_argument("J", type=int)
    kappa.add_argument("--threshold", type=float, default=KAPPA_THRESHOLD)
    kappa.add_argument("--maxq", type=int, default=MAXQ)
    kappa.set_defaults(func=cmd_kappa)

    plot = sub.add_parser("plot", parents=[common], help="SVG of max norm vs e")
    plot.add_argument("results", nargs="+", type=Path, help="CSV or JSON sweep results")
    plot.add_argument("-o", "--output", type=Path, default=Path("norms.svg"))
    plot.set_defaults(func=cmd_plot)

    cache = sub.add_parser("cache", help="manage the lambda/kappa cache")
    cache_sub = cache.add_subparsers(dest="cache_command", required=True)
    clear = cache_sub.add_parser("clear", parents=[common], help="remove every cache file")
    clear.set_defaults(func=cmd_cache_clear)
    return parser


def _cache_dir(args: argparse.Namespace) -> Path:
    return args.cache_dir or default_cache_dir()


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    values: Dict[str, Any] = {}
    if args.config is not None:
        values.update(load_config_file(args.config))
    if any(getattr(args, key) is not None for key in _GRID_FLAGS):
        # a grid on the command line replaces a list from the config file
        values.pop("e_values", None)
    for key in _SWEEP_FLAGS:
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    values.setdefault("cache_dir", default_cache_dir())
    config = build_config(values)
    result = run_sweep(config)
    if config.csv_path is None and config.json_path is None:
        out.write(render_csv(result.rows))
    return 0


def cmd_orbit(args: argparse.Namespace, out: TextIO) -> int:
    if args.period > args.maxq:
        raise DomainError(f"q={args.period} exceeds maxq={args.maxq}")
    ellipse = make_ellipse(args.e)
    orbit = build_orbit(ellipse, args.period)
    report: Dict[str, Any] = {
        "eccentricity": ellipse.e,
        "a": ellipse.a,
        "b": ellipse.b,
        "q": orbit.q,
        "lambda": orbit.lambda_q,
        "m_lambda": None if orbit.caustic is None else orbit.caustic.m_lambda,
        "omega": None if orbit.caustic is None else orbit.caustic.omega,
        "length": orbit.length,
        "closure_residual": closure_residual(orbit),
        "reflection_residual": orbit.reflection_residual,
        "lazutkin_deviation": max_lazutkin_deviation(orbit),
        "points": [
            {"n": n, "phi": float(orbit.phi_amp[n]), "x": point[0], "y": point[1],
             "lazutkin": float(orbit.x[n]), "theta": float(orbit.theta[n])}
            for n, point in enumerate(orbit.points)
        ],
    }
    if args.json:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
        return 0
    out.write(f"{ellipse} a={ellipse.a:.12g} b={ellipse.b:.12g} q={orbit.q}\n")
    if orbit.caustic is not None:
        out.write(
            f"lambda={report['lambda']:.17g} m_lambda={report['m_lambda']:.17g} "
            f"omega={report['omega']:.17g}\n"
        )
    out.write("n phi x y lazutkin theta\n")
    for p in report["points"]:
        out.write(
            f"{p['n']} {p['phi']:.12g} {p['x']:.12g} {p['y']:.12g} "
            f"{p['lazutkin']:.12g} {p['theta']:.12g}\n"
        )
    for key in ("length", "closure_residual", "reflection_residual", "lazutkin_deviation"):
        out.write(f"{key} = {report[key]:.6g}\n")
    return 0


def cmd_kappa(args: argparse.Namespace, out: TextIO) -> int:
    if args.J < 1:
        raise DomainError(f"J must be >= 1, got {args.J}")
    ellipse = make_ellipse(args.e)
    cache = EccentricityCache(
        _cache_dir(args), ellipse, maxq=args.maxq, threshold=args.threshold
    )
    table = cache.kappa(args.J)
    out.write("j value status q_at\n")
    for j in range(1, table.J + 1):
        out.write(
            f"{j} {float(table.kappa[j - 1]):.17g} "
            f"{table.status[j - 1].value} {table.q_at[j - 1]}\n"
        )
    return 0


def cmd_plot(args: argparse.Namespace, out: TextIO) -> int:
    rows = []
    for path in args.results:
        rows.extend(read_results(path))
    data_path = plot_norms(rows, args.output)
    out.write(f"{args.output}\n{data_path}\n")
    return 0


def cmd_cache_clear(args: argparse.Namespace, out: TextIO) -> int:
    removed = clear_cache(_cache_dir(args))
    out.write(f"removed {removed} cache files\n")
    return 0


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.WARNING
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except RigidityError as exc:
        logger.debug("command failed", exc_info=exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_EXIT_CODE
