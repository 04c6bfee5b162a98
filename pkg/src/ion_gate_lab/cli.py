"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 when a verification misses
its tolerance. Output is deterministic: no timestamps, fixed precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys

import numpy as np

from . import __version__
from .coupling import (
    CouplingContext,
    PhysicalParams,
    RamanBeams,
    context_from_params,
    rabi_frequency,
)
from .dynamics import JointSpace, StateVector
from .magic import MagicEntry, magic_eta_01, magic_table
from .sequence import (
    Schedule,
    apply_schedule,
    compose_cn,
    default_logical_basis,
    eta_sensitivity,
    reduced_cn_pulse,
    schedule_propagator,
    truth_table,
    verify_eq6,
)
from .serialize import SCHEMA, SchemaError, dumps, load_schedule, matrix_to_pairs, save_schedule

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

_ANGLE_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\*?pi(?:/(\d+(?:\.\d*)?))?$")


class UsageError(Exception):
    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def parse_angle(text: str) -> float:
    """Radians, with ``pi`` allowed as a multiplier: ``0.25pi``, ``-pi``, ``pi/4``."""
    s = text.strip().lower().replace(" ", "")
    match = _ANGLE_RE.match(s)
    if match:
        coef = match.group(1)
        value = (float(coef) if coef not in (None, "+", "-") else (-1.0 if coef == "-" else 1.0)) * math.pi
        if match.group(2):
            value /= float(match.group(2))
        return value
    if s.startswith("-pi") or s.startswith("+pi"):
        return parse_angle(s[0] + "1" + s[1:])
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    return value


def _fmt(x: float, p: int) -> str:
    out = f"{x:.{p}f}"
    return "0." + "0" * p if out == "-0." + "0" * p else out


def _sci(x: float, p: int) -> str:
    return f"{x:.{p}e}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _aligned(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


def _complex(z: complex, p: int) -> str:
    re_, im = _fmt(z.real, p), _fmt(abs(z.imag), p)
    sign = "-" if z.imag < 0 and im != _fmt(0.0, p) else "+"
    return f"{re_}{sign}{im}j"


def _emit(args, fmt_text, fmt_csv, doc):
    if args.format == "structured":
        out = dumps(doc)
    elif args.format == "csv":
        out = fmt_csv()
    else:
        out = fmt_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _check_km(args):
    if args.k < 0:
        raise UsageError("--k", "must be >= 0")
    if args.m < 1:
        raise UsageError("--m", "must be >= 1")
    if args.k >= args.m:
        raise UsageError("--k", f"must be smaller than --m ({args.k} >= {args.m})")


def _entry01(k, m) -> MagicEntry:
    return MagicEntry(n_a=0, n_b=1, k=k, m=m, eta=magic_eta_01(k, m), pulse_area_00=m * math.pi)


# ---------------------------------------------------------------- commands


def cmd_magic_table(args) -> int:
    if args.kmax < 0:
        raise UsageError("--kmax", "must be >= 0")
    if args.mmax < 1:
        raise UsageError("--mmax", "must be >= 1")
    if args.mspan is not None and args.mspan < 1:
        raise UsageError("--mspan", "must be >= 1")
    if not args.search_max > 0:
        raise UsageError("--search-max", "must be positive")
    n_a, n_b = args.pair
    if n_a < 0 or n_b < 0 or n_a == n_b:
        raise UsageError("--pair", "needs two different nonnegative Fock levels")
    entries = magic_table(
        args.kmax,
        args.mmax,
        args.swapped,
        pair=(n_a, n_b),
        m_span=args.mspan,
        search_max=args.search_max,
        magnitude=args.magnitude,
    )
    p = args.precision
    header = ["k", "rotation_b", "m", "rotation_a", "n_a", "n_b", "eta"]
    rows = [
        [e.k, f"{e.rotation_b}pi", e.m, f"{e.rotation_a}pi", e.n_a, e.n_b, _fmt(e.eta, p)]
        for e in entries
    ]
    doc = {
        "schema": SCHEMA,
        "kind": "magic-table",
        "entries": [
            {
                "k": e.k,
                "m": e.m,
                "n_a": e.n_a,
                "n_b": e.n_b,
                "rotation_a_pi": e.rotation_a,
                "rotation_b_pi": e.rotation_b,
                "eta": e.eta,
                "pulse_area_00": e.pulse_area_00,
            }
            for e in entries
        ],
    }
    _emit(args, lambda: _aligned(header, rows), lambda: _csv(header, rows), doc)
    return EXIT_OK


def _rabi_context(args) -> CouplingContext:
    physical = [args.mass, args.trap_frequency, args.wavevector]
    if args.eta is not None:
        if any(v is not None for v in physical):
            raise UsageError("--eta", "give either --eta or physical parameters, not both")
        if not (math.isfinite(args.eta) and args.eta > 0):
            raise UsageError("--eta", "must be positive")
        if not args.g > 0:
            raise UsageError("--g", "must be positive")
        return CouplingContext(eta=args.eta, g=args.g)
    for flag, v in zip(("--mass", "--trap-frequency", "--wavevector"), physical):
        if v is None:
            raise UsageError(flag, "required when --eta is not given")
        if not v > 0:
            raise UsageError(flag, "must be positive")
    if args.rf_drive is not None and not args.rf_drive > args.trap_frequency:
        raise UsageError("--rf-drive", "must exceed --trap-frequency")
    raman = None
    if args.raman is not None:
        if args.raman[2] == 0:
            raise UsageError("--raman", "detuning must be nonzero")
        raman = RamanBeams(*args.raman)
    params = PhysicalParams(
        mass=args.mass,
        trap_frequency=args.trap_frequency,
        internal_splitting=args.internal_splitting,
        wavevector=args.wavevector,
        dipole_coupling=args.g,
        raman=raman,
        rf_drive=args.rf_drive,
    )
    return context_from_params(params)


def cmd_rabi(args) -> int:
    if args.n < 0:
        raise UsageError("--n", "must be >= 0")
    if args.nprime < 0:
        raise UsageError("--nprime", "must be >= 0")
    ctx = _rabi_context(args)
    omega = rabi_frequency(args.n, args.nprime, ctx)
    p = args.precision
    header = ["n", "nprime", "eta", "g", "rabi"]
    row = [args.n, args.nprime, _fmt(ctx.eta, p), _fmt(ctx.g, p), _fmt(omega, p)]
    doc = {"schema": SCHEMA, "kind": "rabi", "n": args.n, "nprime": args.nprime, "eta": ctx.eta, "g": ctx.g, "rabi": omega}
    _emit(args, lambda: _fmt(omega, p) + "\n", lambda: _csv(header, [row]), doc)
    return EXIT_OK


def cmd_gate(args) -> int:
    _check_km(args)
    entry = _entry01(args.k, args.m)
    schedule = Schedule((reduced_cn_pulse(entry, args.phi),), JointSpace(1, 2))
    u = schedule_propagator(schedule)
    report = verify_eq6(schedule, args.k, args.m, args.phi, args.tol, propagator=u)
    p = args.precision
    labels = list(schedule.space.labels())
    ok = report.max_deviation <= args.tol

    def text():
        lines = [f"eta = {_fmt(entry.eta, p)}  pulse_area = {_fmt(entry.pulse_area_00 / math.pi, p)}pi"]
        lines.append("unitary (rows: output, columns: input; basis " + " ".join(labels) + ")")
        lines += ["  ".join(_complex(z, p) for z in row) for row in u.matrix]
        lines.append(f"max_deviation = {_sci(report.max_deviation, p)}")
        lines.append(f"fidelity = {_fmt(report.fidelity, p)}")
        lines.append("PASS" if ok else "FAIL")
        return "\n".join(lines) + "\n"

    def as_csv():
        rows = [[o, i, _fmt(u.matrix[a, b].real, p), _fmt(u.matrix[a, b].imag, p)] for a, o in enumerate(labels) for b, i in enumerate(labels)]
        rows.append(["max_deviation", "", _sci(report.max_deviation, p), ""])
        return _csv(["output", "input", "re", "im"], rows)

    doc = {
        "schema": SCHEMA,
        "kind": "gate",
        "k": args.k,
        "m": args.m,
        "phi": args.phi,
        "eta": entry.eta,
        "basis": labels,
        "unitary": matrix_to_pairs(u.matrix),
        "max_deviation": report.max_deviation,
        "fidelity": report.fidelity,
        "tol": args.tol,
        "passed": ok,
    }
    _emit(args, text, as_csv, doc)
    return EXIT_OK if ok else EXIT_VERIFY


def _ideal_populations(schedule, labels, two_ion, control=0, target=1):
    space = schedule.space
    ideal = {}
    for src in labels:
        n, spins = space.decompose(space.parse_label(src))
        spins = list(spins)
        flip = spins[control] == 1 if two_ion else n == 1
        if flip:
            spins[0 if not two_ion else target] ^= 1
        ideal[src] = space.label(space.index(n, spins))
    return ideal


def cmd_verify(args) -> int:
    _check_km(args)
    entry = _entry01(args.k, args.m)
    if args.two_ion:
        schedule = compose_cn(0, 1, entry, phi=args.phi)
    else:
        schedule = Schedule((reduced_cn_pulse(entry, args.phi),), JointSpace(1, 2))
    if args.save_schedule:
        save_schedule(schedule, args.save_schedule)
    labels = default_logical_basis(schedule.space)
    report = truth_table(schedule, labels)
    ideal = _ideal_populations(schedule, labels, args.two_ion)
    worst = 0.0
    for src in labels:
        pops, _ = report.rows[src]
        for dst in labels:
            worst = max(worst, abs(pops[dst] - (1.0 if ideal[src] == dst else 0.0)))
    if args.two_ion:
        u = schedule_propagator(schedule)
        ns = schedule.space.n_spin
        # motion must end back in |0> for every logical input
        for src in labels:
            col = u.matrix[:, schedule.space.parse_label(src)]
            worst = max(worst, 1.0 - float(np.sum(np.abs(col[:ns]) ** 2)))
    ok = worst <= args.tol
    p = args.precision
    header = ["input"] + labels + ["leakage"]
    rows = [[src] + [_fmt(report.rows[src][0][d], p) for d in labels] + [_sci(report.rows[src][1], p)] for src in labels]

    def text():
        body = _aligned(header, rows)
        return body + f"max_error = {_sci(worst, p)}\n" + ("PASS\n" if ok else "FAIL\n")

    doc = {
        "schema": SCHEMA,
        "kind": "truth-table",
        "k": args.k,
        "m": args.m,
        "phi": args.phi,
        "two_ion": args.two_ion,
        "basis": labels,
        "rows": [{"input": src, "populations": report.rows[src][0], "leakage": report.rows[src][1]} for src in labels],
        "max_leakage": report.max_leakage,
        "max_error": worst,
        "tol": args.tol,
        "passed": ok,
    }
    _emit(args, text, lambda: _csv(header, rows), doc)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sequence(args) -> int:
    try:
        schedule = load_schedule(args.file)
    except OSError as exc:
        raise UsageError("--file", f"cannot read {args.file}: {exc.strerror}") from None
    except (SchemaError, ValueError) as exc:
        raise UsageError("--file", str(exc)) from None
    if args.fock_cutoff is not None:
        if args.fock_cutoff < schedule.space.fock_cutoff:
            raise UsageError("--fock-cutoff", f"must be >= the schedule's {schedule.space.fock_cutoff}")
        schedule = Schedule(schedule.pulses, JointSpace(schedule.space.n_ions, args.fock_cutoff))
    if args.input is None:
        args.input = "0" + "d" * schedule.space.n_ions
    try:
        state = StateVector.basis(schedule.space, args.input)
    except ValueError as exc:
        raise UsageError("--input", str(exc)) from None
    if not args.omega_over_g > 0:
        raise UsageError("--omega-over-g", "must be positive")
    if args.steps < 1:
        raise UsageError("--steps", "must be >= 1")
    out = apply_schedule(schedule, state, args.oracle, args.omega_over_g, args.steps)
    pops = out.populations()
    labels = schedule.space.labels()
    p = args.precision
    shown = [(lbl, pops[i], out.amplitudes[i]) for i, lbl in enumerate(labels) if round(pops[i], p) > 0]
    header = ["state", "population"]
    rows = [[lbl, _fmt(pop, p)] for lbl, pop, _ in shown]
    doc = {
        "schema": SCHEMA,
        "kind": "sequence-result",
        "input": args.input,
        "oracle": args.oracle,
        "omega_over_g": args.omega_over_g if args.oracle else None,
        "basis": labels,
        "amplitudes": [[float(z.real), float(z.imag)] for z in out.amplitudes],
        "populations": {lbl: float(x) for lbl, x in zip(labels, pops)},
        "norm": out.norm(),
    }
    _emit(args, lambda: _aligned(header, rows), lambda: _csv(header, rows), doc)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    _check_km(args)
    entry = _entry01(args.k, args.m)
    for d in args.deltas:
        if not entry.eta + d > 0:
            raise UsageError("--deltas", f"eta + {d} is not positive")
    curve = eta_sensitivity(entry, args.deltas, phi=args.phi)
    p = args.precision
    header = ["delta_eta", "infidelity"]
    rows = [[_sci(d, p), _sci(inf, p)] for d, inf in curve]
    doc = {
        "schema": SCHEMA,
        "kind": "sensitivity",
        "k": args.k,
        "m": args.m,
        "eta": entry.eta,
        "curve": [{"delta_eta": d, "infidelity": inf} for d, inf in curve],
    }
    _emit(args, lambda: _aligned(header, rows), lambda: _csv(header, rows), doc)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_output_flags(p):
    p.add_argument("--format", choices=("text", "csv", "structured"), default="text")
    p.add_argument("--output", metavar="PATH", help="write to PATH instead of standard output")
    p.add_argument("--precision", type=int, default=6, help="decimal digits in text and csv output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ion-gate-lab", description="Single-pulse trapped-ion CN gates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("magic-table", help="magic Lamb-Dicke parameters")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--mmax", type=int, required=True)
    p.add_argument("--pair", type=int, nargs=2, metavar=("NA", "NB"), default=(0, 1), help="no-op and flip Fock levels")
    p.add_argument("--swapped", action="store_true", help="exchange the roles of the two levels")
    p.add_argument("--mspan", type=int, help="keep only m - k <= MSPAN")
    p.add_argument("--search-max", type=float, default=2.0)
    p.add_argument("--magnitude", action="store_true", help="also accept negative Rabi-frequency ratios")
    _add_output_flags(p)
    p.set_defaults(func=cmd_magic_table)

    p = sub.add_parser("rabi", help="Fock-state Rabi frequency")
    p.add_argument("--eta", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nprime", type=int, required=True)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--mass", type=float, help="total ion mass, kg")
    p.add_argument("--trap-frequency", type=float, help="COM angular frequency, rad/s")
    p.add_argument("--wavevector", type=float, help="effective wavevector along the mode, 1/m")
    p.add_argument("--internal-splitting", type=float, default=1.0, help="qubit angular frequency, rad/s")
    p.add_argument("--rf-drive", type=float, help="rf angular frequency, rad/s")
    p.add_argument("--raman", type=float, nargs=3, metavar=("G1", "G2", "DETUNING"))
    _add_output_flags(p)
    p.set_defaults(func=cmd_rabi)

    for name, func, help_ in (
        ("gate", cmd_gate, "simulate the single-pulse gate and compare with the ideal matrix"),
        ("verify", cmd_verify, "truth table of the reduced or two-ion CN"),
        ("sensitivity", cmd_sensitivity, "infidelity versus eta error"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--phi", type=parse_angle, default=0.0, help="phase in radians; 'pi' multiplier allowed")
        if name in ("gate", "verify"):
            p.add_argument("--tol", type=float, default=1e-12)
        if name == "verify":
            p.add_argument("--two-ion", action="store_true", help="three-pulse CN, ion 0 controls ion 1")
            p.add_argument("--save-schedule", metavar="PATH", help="write the schedule document used")
        if name == "sensitivity":
            p.add_argument("--deltas", type=float, nargs="+", required=True)
        _add_output_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("sequence", help="run a schedule document on a basis state")
    p.add_argument("--file", required=True)
    p.add_argument("--input", default=None, help="basis label, e.g. 1d or 0ud (default: first basis state)")
    p.add_argument("--oracle", action="store_true", help="numeric propagator instead of the rotating-wave blocks")
    p.add_argument("--omega-over-g", type=float, default=1000.0)
    p.add_argument("--steps", type=int, default=64, help="RK4 steps per trap period")
    p.add_argument("--fock-cutoff", type=int, help="enlarge the schedule's Fock space")
    _add_output_flags(p)
    p.set_defaults(func=cmd_sequence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "precision", 6) < 0 or getattr(args, "precision", 6) > 17:
        sys.stderr.write("ion-gate-lab: error: --precision: must be between 0 and 17\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"ion-gate-lab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
