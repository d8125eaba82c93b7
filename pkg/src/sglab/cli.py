"""``sg-lab`` command line.

Exit codes: 0 success, 2 invalid input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from sglab import hopf
from sglab import io as labio
from sglab.qubit import Direction, Port
from sglab.simulator import MAX_SEED, simulate_chain, sweep_angle
from sglab.witness import U_KIND, W_KIND, build_table, witness_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3

HOPF_NORM_TOL = 1e-6


class InputError(Exception):
    pass


def _fail(code: int, message: str) -> int:
    print(f"sg-lab: error: {message}", file=sys.stderr)
    return code


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number in radians, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _port(text: str) -> Port:
    try:
        return Port.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_simulate(args) -> int:
    try:
        plan = labio.load_plan(args.plan)
    except labio.PlanError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read plan: {exc}")
    record = simulate_chain(plan)
    try:
        labio.write_text(args.out, labio.chain_csv(record))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.steps < 2:
        return _fail(EXIT_INPUT, "--steps must be at least 2")
    if not args.start < args.end:
        return _fail(EXIT_INPUT, "--start must be smaller than --end")
    try:
        prep_dir = Direction(args.prep_theta, args.prep_phi)
    except ValueError as exc:
        return _fail(EXIT_INPUT, f"preparation direction: {exc}")
    angles = np.linspace(args.start, args.end, args.steps)
    rows = sweep_angle((prep_dir, args.prep_port), args.meas_port, angles,
                       n_per_point=args.particles, seed=args.seed)
    try:
        labio.write_text(args.out, labio.sweep_csv(rows))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.tolerance < 0:
        return _fail(EXIT_INPUT, "--tolerance must be non-negative")
    try:
        if args.table is not None:
            table = labio.load_table(args.table, args.kind)
        else:
            preps, n_particles, seed = labio.load_witness_plan(args.from_plans)
            table = labio.quantize_table(build_table(args.kind, preps, n_particles, seed))
    except labio.PlanError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read input: {exc}")
    if args.n_preps is not None and args.n_preps != table.n_preps:
        return _fail(EXIT_INPUT, f"--n-preps is {args.n_preps} but the table has {table.n_preps}")
    try:
        report = witness_report(table, tolerance=args.tolerance)
    except (KeyError, ValueError) as exc:
        return _fail(EXIT_INPUT, f"inconsistent table: {exc}")
    try:
        labio.write_text(args.out, labio.report_json(report))
        if args.table_out is not None:
            labio.write_text(args.table_out, labio.table_csv(table))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    return EXIT_OK


def _round(x: float) -> float:
    # drop trig residue such as cos(pi/2) so printed coordinates stay readable
    if abs(x) < 1e-15:
        return 0.0
    return labio.quantize(x)


def _emit(payload) -> None:
    print(json.dumps(payload))


def _spinor(values: Sequence[float]) -> hopf.SpinorPair:
    a = complex(values[0], values[1])
    b = complex(values[2], values[3])
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if abs(norm - 1.0) > HOPF_NORM_TOL:
        raise InputError(f"spinor (a, b) has norm {norm!r}; expected 1 within {HOPF_NORM_TOL}")
    if abs(norm - 1.0) > hopf.EXACT_TOL:
        print(f"sg-lab: warning: renormalizing spinor of norm {norm!r}", file=sys.stderr)
    return hopf.SpinorPair.normalized(a, b)


def _sphere(values: Sequence[float]) -> hopf.SpherePoint:
    norm = math.sqrt(sum(v * v for v in values))
    if abs(norm - 1.0) > HOPF_NORM_TOL:
        raise InputError(f"point has norm {norm!r}; expected 1 within {HOPF_NORM_TOL}")
    if abs(norm - 1.0) > hopf.EXACT_TOL:
        print(f"sg-lab: warning: renormalizing point of norm {norm!r}", file=sys.stderr)
    return hopf.SpherePoint.normalized(*values)


def _point_json(p: hopf.SpherePoint) -> list:
    return [_round(p.x1), _round(p.x2), _round(p.x3)]


def _complex_json(z: complex) -> dict:
    return {"re": _round(z.real), "im": _round(z.imag)}


def cmd_hopf(args) -> int:
    try:
        if args.hopf_cmd == "project":
            pair = _spinor(args.coords)
            if args.chart == "h":
                point = hopf.stereographic_inverse(hopf.h_map(pair))
            else:
                point = hopf.hopf_projection(pair)
            _emit({"point": _point_json(point)})
        elif args.hopf_cmd == "stereo":
            if args.inverse:
                point = hopf.stereographic_inverse(complex(args.coords[0], args.coords[1]))
                _emit({"point": _point_json(point)})
            else:
                z = hopf.stereographic(_sphere(args.coords))
                _emit({"z": _complex_json(z)})
        else:
            target = _sphere(args.coords)
            pairs = hopf.fiber_sample(target, args.n)
            _emit({
                "target": _point_json(target),
                "pairs": [{"a": _complex_json(p.a), "b": _complex_json(p.b)} for p in pairs],
            })
    except (InputError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sg-lab",
        description="Stern-Gerlach prepare-and-measure lab. Angles are in radians.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a chain of stages from a plan file")
    p.add_argument("--plan", required=True, help="YAML/JSON plan file")
    p.add_argument("--out", required=True, help="chain CSV to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="probability vs angle between preparation and measurement")
    p.add_argument("--prep-theta", type=_finite_float, required=True)
    p.add_argument("--prep-phi", type=_finite_float, required=True)
    p.add_argument("--prep-port", type=_port, default=Port.PLUS)
    p.add_argument("--meas-port", type=_port, default=Port.PLUS)
    p.add_argument("--start", type=_finite_float, required=True)
    p.add_argument("--end", type=_finite_float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--particles", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True, help="sweep CSV to write")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("witness", help="dimension witness report for a probability table")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--table", help="probability table CSV")
    src.add_argument("--from-plans", dest="from_plans",
                     help="YAML/JSON list of preparations to generate the table from")
    p.add_argument("--kind", choices=[U_KIND, W_KIND], required=True)
    p.add_argument("--n-preps", dest="n_preps", type=_positive_int)
    p.add_argument("--tolerance", type=_finite_float, default=1e-9)
    p.add_argument("--out", required=True, help="JSON report to write")
    p.add_argument("--table-out", dest="table_out", help="also write the table used as CSV")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("hopf", help="Hopf fibration coordinates as JSON")
    hsub = p.add_subparsers(dest="hopf_cmd", required=True)
    hp = hsub.add_parser("project", help="project (a_re, a_im, b_re, b_im) onto the sphere")
    hp.add_argument("coords", nargs=4, type=_finite_float, metavar="X")
    hp.add_argument("--chart", choices=["full", "h"], default="full",
                    help="'h' composes the ratio chart with inverse stereographic projection")
    hs = hsub.add_parser("stereo", help="stereographic projection of (x1, x2, x3)")
    hs.add_argument("coords", nargs="+", type=_finite_float, metavar="X")
    hs.add_argument("--inverse", action="store_true", help="map (re, im) back onto the sphere")
    hf = hsub.add_parser("fiber", help="sample the phase circle over (x1, x2, x3)")
    hf.add_argument("coords", nargs=3, type=_finite_float, metavar="X")
    hf.add_argument("--n", type=_positive_int, default=8)
    p.set_defaults(func=cmd_hopf)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "hopf" and args.hopf_cmd == "stereo":
        want = 2 if args.inverse else 3
        if len(args.coords) != want:
            parser.error(f"stereo{' --inverse' if args.inverse else ''} takes {want} numbers")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
