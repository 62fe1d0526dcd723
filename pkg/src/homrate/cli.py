"""Command-line front end.

Packets and mixtures are read from JSON descriptors; angles in files are
always radians. ``--degrees`` converts angle-valued command-line numbers
(ranges, shifts, fit windows) at the boundary. Reports are JSON on stdout or
in ``--output``; sweeps are CSV.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 tolerance failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

from . import dipfit, mixed
from .overlap import ENGINES, p11_pure
from .quadrature import ConvergenceError, QuadratureSpec
from .rate import METHODS, natural_scale, rate
from .wavepacket import DOF_KINDS, packet_from_dict

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_TOLERANCE = 0, 2, 3, 4

ANGLE_KINDS = ("theta", "phi1", "phi2")
TABLE1_KINDS = [f"{p}{n}" for n in (1, 2, 3) for p in ("k0", "sigma", "r0")]
TABLE1_RTOL = {"analytic": 1e-6, "quadrature": 1e-3}
PRODUCT_RTOL = 1e-5

UNITS = {"system": "natural", "hbar": 1, "c": 1, "angles": "rad"}


class ToleranceFailure(Exception):
    """A --strict check failed; carries the report to emit anyway."""

    def __init__(self, report):
        super().__init__("tolerance check failed")
        self.report = report


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise ValueError(f"{path}: {exc.strerror}") from None


def _load_state(path: str):
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: descriptor must be a JSON object")
    if "k0" in data:
        return "pure", packet_from_dict(data)
    return "mixed", mixed.density_from_dict(data)


def _load_packet(path: str):
    kind, state = _load_state(path)
    if kind != "pure":
        raise ValueError(f"{path}: expected a wave-packet descriptor")
    return state


def _quad(args) -> QuadratureSpec:
    if args.nodes is None:
        return QuadratureSpec()
    return QuadratureSpec(args.nodes, max(args.nodes + 4, round(1.5 * args.nodes)))


def _engines(args) -> list[str]:
    return list(ENGINES) if args.engine == "both" else [args.engine]


def _single_engine(args) -> str:
    if args.engine == "both":
        raise ValueError(f"{args.command} needs a single engine, not 'both'")
    return args.engine


def _angle(args, value, is_angle: bool):
    if value is None or not (args.degrees and is_angle):
        return value
    return math.radians(value)


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(report, path):
    with _sink(path) as fh:
        fh.write(json.dumps(report, indent=2) + "\n")


def _rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a - b)


def cmd_p11(args):
    (kind_a, a), (kind_b, b) = _load_state(args.state_a), _load_state(args.state_b)
    if kind_a != kind_b:
        raise ValueError("both states must be wave packets or both density matrices")
    if kind_a == "mixed":
        return {
            "command": "p11", "scenario": "mixed-mixed",
            "p11": mixed.p11_mixed(a, b),
            "purity_a": mixed.purity(a), "purity_b": mixed.purity(b),
        }
    quad = _quad(args)
    results = []
    for engine in _engines(args):
        c = p11_pure(a, b, engine, quad)
        results.append({"engine": engine, "p11": c.probability,
                        "error_estimate": c.error_estimate, "clamped": c.clamped})
    return {"command": "p11", "scenario": "pure-pure", "units": UNITS, "results": results}


def cmd_sweep(args):
    wp = _load_packet(args.packet)
    engine = _single_engine(args)
    is_angle = args.dof in ANGLE_KINDS
    if args.range is None:
        half = 4.0 * natural_scale(wp, args.dof)
        lo, hi = -half, half
    else:
        lo, hi = (_angle(args, v, is_angle) for v in args.range)
    curve = dipfit.sweep(wp, args.dof, lo, hi, args.n, engine, _quad(args))
    with _sink(args.output) as fh:
        dipfit.write_csv(curve, fh)
    return None


def cmd_rate(args):
    wp = _load_packet(args.packet)
    methods = list(METHODS) if args.method == "all" else [args.method]
    quad = _quad(args)
    rows = []
    for method in methods:
        engines = _engines(args) if method == "finite_difference" else [None]
        for engine in engines:
            row = {"method": method, "engine": engine}
            try:
                r = rate(wp, args.dof, method, engine or "analytic", quad)
            except ValueError as exc:
                if args.method != "all":
                    raise
                row["error"] = str(exc)
            else:
                row.update(value=r.value, error_estimate=r.error_estimate)
            rows.append(row)
    return {"command": "rate", "dof": args.dof, "units": UNITS, "results": rows}


def cmd_table1(args):
    wp = _load_packet(args.packet)
    quad = _quad(args)
    coupled = wp.sigma12 is not None
    report = {"command": "table1", "units": UNITS, "coupled": coupled, "rho": wp.rho,
              "engines": {}}
    ok_all = True
    for engine in _engines(args):
        rtol = args.rtol if args.rtol is not None else TABLE1_RTOL[engine]
        cells, fd = [], {}
        for kind in TABLE1_KINDS:
            r = rate(wp, kind, "finite_difference", engine, quad)
            fd[kind] = r.value
            cell = {"dof": kind, "finite_difference": r.value, "fd_error": r.error_estimate,
                    "closed_form": None, "rel_dev": None, "tolerance": rtol, "ok": None,
                    "coupled": coupled and kind in ("sigma1", "sigma2")}
            try:
                cf = rate(wp, kind, "closed_form").value
            except ValueError:
                pass
            else:
                dev = _rel(r.value, cf)
                cell.update(closed_form=cf, rel_dev=dev, ok=dev <= rtol)
                ok_all &= cell["ok"]
            cells.append(cell)
        products = []
        for n in (1, 2, 3):
            prod = fd[f"k0{n}"] * fd[f"r0{n}"]
            checked = not coupled or n == 3
            entry = {"n": n, "finite_difference": prod,
                     "closed_form": 0.25 if checked else None,
                     "rel_dev": _rel(prod, 0.25) if checked else None}
            entry["ok"] = entry["rel_dev"] <= max(PRODUCT_RTOL, rtol) if checked else None
            ok_all &= entry["ok"] is not False
            products.append(entry)
        report["engines"][engine] = {"cells": cells, "products": products}
    report["all_ok"] = ok_all
    if args.strict and not ok_all:
        raise ToleranceFailure(report)
    return report


def cmd_mixed(args):
    data = _load_json(args.state)
    if not isinstance(data, dict):
        raise ValueError(f"{args.state}: descriptor must be a JSON object")
    rho = mixed.density_from_dict(data)
    report = {"command": "mixed", "dim": rho.dim, "purity": mixed.purity(rho),
              "p11_self": mixed.p11_mixed(rho, rho)}
    if args.other:
        kind, other = _load_state(args.other)
        if kind != "mixed":
            raise ValueError(f"{args.other}: expected a density-matrix descriptor")
        report["p11_other"] = mixed.p11_mixed(rho, other)
    if args.vary:
        if args.delta is None:
            raise ValueError("--vary needs --delta")
        mix = mixed.mixture_from_dict(data)
        delta = _angle(args, args.delta, True)
        f0 = getattr(mix, args.vary)
        family = mix.family(args.vary)
        closed = {"alpha": mixed.polarized_case_a, "theta": mixed.polarized_case_b}.get(args.vary)
        r = mixed.rate_mixed(family, f0, strict=False)
        report["variation"] = {
            "parameter": args.vary, "delta": delta,
            "delta_p11": mixed.delta_p11_dof_mixed(family, f0, delta),
            "closed_form": closed(mix.alpha, delta) if closed else None,
            "first_order": r.first_order,
            "rate": r.value,
            "rate_defined": abs(r.first_order) <= mixed.FIRST_ORDER_TOL,
            "degenerate": r.degenerate,
            "series": mixed.mixed_series(family, f0).tolist(),
        }
    return report


def cmd_fit(args):
    with open(args.csv, newline="") as fh:
        curve = dipfit.read_csv(fh, args.dof or "")
    window = _angle(args, args.window, args.dof in ANGLE_KINDS)
    fitted = dipfit.fit_parabola(curve, window, even_only=args.even_only)
    return {"command": "fit", **dipfit.fit_summary(fitted)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", choices=list(ENGINES) + ["both"], default="analytic",
                        help="overlap engine (default: analytic)")
    common.add_argument("--nodes", type=int, default=None,
                        help="quadrature nodes per axis; the check runs at 1.5x")
    common.add_argument("--output", default=None, help="write the result here instead of stdout")
    common.add_argument("--degrees", action="store_true",
                        help="read angle-valued command-line numbers in degrees")
    common.add_argument("--strict", action="store_true",
                        help="exit with status 4 when a tolerance check fails")
    common.add_argument("--window", type=float, default=None,
                        help="half-width of the parabolic fit window (default: automatic)")

    parser = argparse.ArgumentParser(
        prog="homrate",
        description="Hong-Ou-Mandel coincidence probabilities and rates of distinguishability.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("p11", parents=[common], help="coincidence probability of two states")
    p.add_argument("state_a")
    p.add_argument("state_b")
    p.set_defaults(func=cmd_p11)

    p = sub.add_parser("sweep", parents=[common], help="HOM dip as CSV")
    p.add_argument("packet")
    p.add_argument("--dof", choices=DOF_KINDS, required=True)
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--n", type=int, default=201)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rate", parents=[common], help="rate of distinguishability")
    p.add_argument("packet")
    p.add_argument("--dof", choices=DOF_KINDS, required=True)
    p.add_argument("--method", choices=list(METHODS) + ["all"], default="all")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("table1", parents=[common],
                       help="closed-form vs finite-difference rates for k0n, sigma_n, r0n")
    p.add_argument("packet")
    p.add_argument("--rtol", type=float, default=None,
                   help="override the relative tolerance per cell")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("mixed", parents=[common], help="mixed-state coincidences and rates")
    p.add_argument("state")
    p.add_argument("--other", default=None)
    p.add_argument("--vary", choices=("alpha", "theta", "phi"))
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(func=cmd_mixed)

    p = sub.add_parser("fit", parents=[common], help="parabolic fit of a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--dof", choices=DOF_KINDS, default=None)
    p.add_argument("--even-only", action="store_true")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
        if report is not None:
            _emit_json(report, args.output)
        return EXIT_OK
    except ToleranceFailure as exc:
        _emit_json(exc.report, args.output)
        print("homrate: error: tolerance check failed", file=sys.stderr)
        return EXIT_TOLERANCE
    except ConvergenceError as exc:
        print(f"homrate: error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, OSError) as exc:
        print(f"homrate: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
