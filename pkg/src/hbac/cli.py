"""Command-line interface: ``hbac {simulate,sweep,optimize-theta,audit,analyze}``.

Numbers are written with 12 significant digits in lowercase scientific
notation. Undefined values are empty CSV fields or JSON ``null``; an infinite
temperature is written as ``inf``. ``--plot`` writes a gnuplot script next to
the output file.

Sweeps run grid points in parallel on up to ``HBAC_THREADS`` threads (default:
all cores) and always write results in ``(gamma, theta)`` order.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from hbac import audit as audit_mod
from hbac.channels import CompressionVariant
from hbac.closedform import optimal_theta
from hbac.engine import RefrigeratorConfig, cooling_power_over_theta, run_cycles
from hbac.expdata import SeriesError, analyze, parse_series

RECORD_HEADER = ("n", "eps1", "eps2_tilde", "eps3_tilde", "Q", "W", "J", "zeta", "T_c", "zeta_C")
ANALYZE_HEADER = ("n", "Q", "sigma_Q", "W", "sigma_W", "J", "sigma_J", "zeta", "sigma_zeta", "zeta_flagged")
AUDIT_HEADER = (
    "formula", "kind", "gamma", "theta", "eps1_0", "eps2_0", "eps3_0", "n",
    "closed_form", "numeric", "abs_delta", "exceeds_tol",
)
OPTIMIZE_HEADER = ("n", "theta_opt", "J_at_theta_opt", "theta_grid", "J_grid_max", "confirmed")
GRID_STEP = 1e-4

_ANGLE = re.compile(r"^\s*(?:(?P<a>[0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*(?P<b>[0-9.eE+-]+))?\s*$")


class CliError(Exception):
    """Failure reported to the user with exit status 1."""


# -- value parsing -----------------------------------------------------------

def _angle(text: str) -> float:
    """A float, or ``pi`` optionally scaled as ``a*pi`` and/or divided as ``pi/b``."""
    m = _ANGLE.match(text)
    if m:
        a = float(m.group("a")) if m.group("a") else 1.0
        b = float(m.group("b")) if m.group("b") else 1.0
        return a * math.pi / b
    return float(text)


def _bounded(lo: float, hi: float, parse=float):
    def convert(text: str) -> float:
        try:
            value = parse(text)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
        if not math.isfinite(value) or not lo <= value <= hi:
            raise argparse.ArgumentTypeError(f"must lie in [{lo:g}, {hi:g}], got {text}")
        return value

    return convert


def _count(minimum: int):
    def convert(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return convert


def _grid(lo: float, hi: float, parse=float):
    item = _bounded(lo, hi, parse)

    def convert(text: str) -> List[float]:
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise argparse.ArgumentTypeError("grid must list at least one value")
        return [item(p) for p in parts]

    return convert


_gamma = _bounded(0.0, 1.0)
_theta = _bounded(0.0, math.pi, _angle)
_eps = _bounded(-1.0, 1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbac", description="Three-qubit algorithmic-cooling refrigerator.")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def common(p, physics=True):
        p.add_argument("--out", type=Path, help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--plot", action="store_true", help="also write a gnuplot script <out>.gp")
        if physics:
            p.add_argument("--eps1", type=_eps, default=0.0, help="initial target polarization")
            p.add_argument("--eps2", type=_eps, default=0.6, help="reset qubit 2 polarization")
            p.add_argument("--eps3", type=_eps, default=0.6, help="reset qubit 3 polarization")

    def cycles(p):
        p.add_argument("--cycles", type=_count(1), default=20)

    def variant(p):
        p.add_argument("--variant", choices=[v.value for v in CompressionVariant], default="random-unitary")

    def precision(p):
        p.add_argument("--precision", type=_count(16), default=None,
                       help="decimal digits of extended-precision arithmetic (default: doubles)")

    p = sub.add_parser("simulate", help="cycle-by-cycle thermodynamic record")
    common(p)
    p.add_argument("--gamma", type=_gamma, default=0.0)
    p.add_argument("--theta", type=_theta, default=math.pi / 2)
    cycles(p)
    variant(p)
    precision(p)

    p = sub.add_parser("sweep", help="simulate every (gamma, theta) grid point")
    common(p)
    p.add_argument("--grid-gamma", type=_grid(0.0, 1.0), required=True)
    p.add_argument("--grid-theta", type=_grid(0.0, math.pi, _angle), required=True)
    cycles(p)
    variant(p)
    precision(p)

    p = sub.add_parser("optimize-theta", help="optimal mixing angle per cycle with grid confirmation")
    common(p)
    p.add_argument("--gamma", type=_gamma, default=0.0, help="damping used for the numeric confirmation")
    p.add_argument("--n", type=_count(0), default=6, help="largest cycle index")

    p = sub.add_parser("audit", help="closed forms against brute-force numerics")
    common(p)
    p.add_argument("--gamma", type=_gamma, default=0.0)
    p.add_argument("--theta", type=_theta, default=math.pi / 2)
    p.add_argument("--grid-gamma", type=_grid(0.0, 1.0), default=None)
    p.add_argument("--grid-theta", type=_grid(0.0, math.pi, _angle), default=None)
    cycles(p)

    p = sub.add_parser("analyze", help="heat, work, power and COP of measured data")
    common(p, physics=False)
    p.add_argument("--data", type=Path, required=True, help="measurement file (n,eps1,sigma_eps1)")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    if args.plot and args.out is None:
        build_parser().error("argument --plot: requires --out")
    if args.plot and args.format != "csv":
        build_parser().error("argument --plot: requires --format csv")
    return args


# -- formatting --------------------------------------------------------------

def fmt(x) -> str:
    """12 significant digits, lowercase exponent; ``''`` for undefined."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.11e}")


def _index(n) -> str:
    return str(int(n)) if math.isfinite(n) else "inf"


def _record_row(r) -> list:
    return [str(r.n), fmt(r.eps1), fmt(r.eps2_tilde), fmt(r.eps3_tilde), fmt(r.Q), fmt(r.W),
            fmt(r.J), fmt(r.zeta), fmt(r.T_c), fmt(r.zeta_carnot)]


def _record_json(r) -> dict:
    values = [r.eps1, r.eps2_tilde, r.eps3_tilde, r.Q, r.W, r.J, r.zeta, r.T_c, r.zeta_carnot]
    return {"n": r.n, **{k: _json_number(v) for k, v in zip(RECORD_HEADER[1:], values)}}


def _csv(header, rows) -> str:
    return "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


# -- verbs -------------------------------------------------------------------

def _config(args, gamma, theta) -> RefrigeratorConfig:
    return RefrigeratorConfig(gamma, theta, args.eps1, args.eps2, args.eps3, args.cycles, args.variant, args.precision)


def _simulate(args) -> str:
    records = run_cycles(_config(args, args.gamma, args.theta))
    if args.format == "json":
        return _dump_json({
            "gamma": _json_number(args.gamma), "theta": _json_number(args.theta),
            "records": [_record_json(r) for r in records],
        })
    return _csv(RECORD_HEADER, [_record_row(r) for r in records])


def thread_count() -> int:
    raw = os.environ.get("HBAC_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"HBAC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise CliError(f"HBAC_THREADS must be a positive integer, got {raw!r}")
    return value


def _sweep(args) -> str:
    points = [(g, t) for g in sorted(set(args.grid_gamma)) for t in sorted(set(args.grid_theta))]
    configs = [_config(args, g, t) for g, t in points]
    with concurrent.futures.ThreadPoolExecutor(max_workers=thread_count()) as pool:
        # map keeps submission order, so the output is independent of scheduling
        results = list(pool.map(run_cycles, configs))
    if args.format == "json":
        return _dump_json([
            {"gamma": _json_number(g), "theta": _json_number(t), "records": [_record_json(r) for r in recs]}
            for (g, t), recs in zip(points, results)
        ])
    blocks = []
    for (g, t), recs in zip(points, results):
        blocks.append(f"# gamma={fmt(g)} theta={fmt(t)}\n" + _csv(RECORD_HEADER, [_record_row(r) for r in recs]))
    # two blank lines separate gnuplot data blocks
    return "\n\n".join(blocks)


def optimize_table(gamma: float, n_max: int, eps1: float, eps2: float, eps3: float) -> list:
    """Rows ``(n, theta_opt, J(theta_opt), theta_grid, max J on grid, confirmed)``."""
    grid = np.arange(0.0, math.pi + GRID_STEP / 2, GRID_STEP)
    grid = grid[grid <= math.pi]
    rows = []
    for n in range(n_max + 1):
        t = optimal_theta(n, eps1, eps2, eps3)
        j_opt = float(cooling_power_over_theta(gamma, [t], eps1, eps2, eps3, n)[0])
        j_grid = cooling_power_over_theta(gamma, grid, eps1, eps2, eps3, n)
        k = int(np.argmax(j_grid))
        rows.append((n, t, j_opt, float(grid[k]), float(j_grid[k]), bool(j_opt >= j_grid[k] - 1e-12)))
    return rows


def _optimize(args) -> str:
    try:
        rows = optimize_table(args.gamma, args.n, args.eps1, args.eps2, args.eps3)
    except ValueError as exc:
        raise CliError(f"--eps1/--eps2/--eps3: {exc}") from None
    if args.format == "json":
        return _dump_json([
            dict(zip(OPTIMIZE_HEADER, (n, _json_number(a), _json_number(b), _json_number(c), _json_number(d), ok)))
            for n, a, b, c, d, ok in rows
        ])
    return _csv(OPTIMIZE_HEADER, [
        [str(n), fmt(a), fmt(b), fmt(c), fmt(d), "true" if ok else "false"] for n, a, b, c, d, ok in rows
    ])


def _audit(args) -> str:
    gammas = args.grid_gamma if args.grid_gamma is not None else [args.gamma]
    thetas = args.grid_theta if args.grid_theta is not None else [args.theta]
    rows = audit_mod.run_audit(gammas, thetas, args.eps1, args.eps2, args.eps3, args.cycles)
    summary = audit_mod.summarize(rows)
    for name, s in summary.items():
        print(f"audit: {name:<30} {s['kind']:<11} rows={s['rows']:<4} exceeding={s['exceeding']:<4} "
              f"max|delta|={s['max_delta']:.3e}", file=sys.stderr)
    if args.format == "json":
        return _dump_json([
            {
                "formula": r.formula, "kind": r.kind,
                **{k: _json_number(getattr(r, k)) for k in ("gamma", "theta", "eps1_0", "eps2_0", "eps3_0")},
                "n": r.n if math.isfinite(r.n) else "inf",
                "closed_form": _json_number(r.closed_form), "numeric": _json_number(r.numeric),
                "abs_delta": _json_number(r.delta), "exceeds_tol": r.exceeds,
            }
            for r in rows
        ])
    return _csv(AUDIT_HEADER, [
        [r.formula, r.kind, fmt(r.gamma), fmt(r.theta), fmt(r.eps1_0), fmt(r.eps2_0), fmt(r.eps3_0),
         _index(r.n), fmt(r.closed_form), fmt(r.numeric), fmt(r.delta), "true" if r.exceeds else "false"]
        for r in rows
    ])


def _analyze(args) -> str:
    try:
        text = args.data.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"--data: cannot read {args.data}: {exc.strerror}") from None
    try:
        records = analyze(parse_series(text))
    except SeriesError as exc:
        raise CliError(f"--data: {exc}") from None
    if args.format == "json":
        return _dump_json([
            {k: (v if k in ("n", "zeta_flagged") else _json_number(v)) for k, v in r.as_dict().items()}
            for r in records
        ])
    return _csv(ANALYZE_HEADER, [
        [str(r.n), fmt(r.Q), fmt(r.sigma_Q), fmt(r.W), fmt(r.sigma_W), fmt(r.J), fmt(r.sigma_J),
         fmt(r.zeta), fmt(r.sigma_zeta), "true" if r.zeta_flagged else "false"]
        for r in records
    ])


# -- plot scripts ------------------------------------------------------------

def plot_script(verb: str, data: str) -> str:
    """gnuplot script drawing the standard panels from ``data``."""
    head = [
        "# gnuplot script",
        "set datafile separator ','",
        "set datafile missing ''",
        "set key off",
        "set xlabel 'cycle n'",
    ]
    if verb == "analyze":
        # columns: n Q sQ W sW J sJ zeta szeta
        panels = [("Q(n)", 2, 3), ("J(n)", 6, 7), ("zeta(n)", 8, 9)]
        body = ["set multiplot layout 1,3"]
        for title, col, err in panels:
            body += [f"set title '{title}'", f"plot '{data}' using 1:{col}:{err} skip 1 with yerrorbars pt 7"]
    else:
        # columns: n eps1 e2t e3t Q W J zeta T_c zeta_C
        body = [
            "set multiplot layout 1,3",
            "set title 'COP zeta(n)'",
            f"plot '{data}' using 1:8 with linespoints pt 7, '' using 1:10 with lines dt 2",
            "set title 'cooling power J(n)'",
            f"plot '{data}' using 1:7 with linespoints pt 7",
            "set title 'target polarization eps1(n)'",
            f"plot '{data}' using 1:2 with linespoints pt 7",
        ]
    return "\n".join(head + body + ["unset multiplot", ""])


# -- entry point -------------------------------------------------------------

VERBS = {
    "simulate": _simulate,
    "sweep": _sweep,
    "optimize-theta": _optimize,
    "audit": _audit,
    "analyze": _analyze,
}


def _write(path: Path, text: str, flag: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{flag}: cannot write {path}: {exc.strerror}") from None


def execute(args: argparse.Namespace) -> int:
    text = VERBS[args.verb](args)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write(args.out, text, "--out")
    if args.plot:
        script = args.out.with_name(args.out.name + ".gp")
        _write(script, plot_script(args.verb, args.out.name), "--plot")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        return execute(args)
    except CliError as exc:
        print(f"hbac: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
