"""Pulse schedules for the single-pulse reduced CN and the three-pulse two-ion CN.

Conventions
-----------
* The reduced CN uses the motion as control: the carrier pulse does nothing
  (up to a global sign) on Fock level ``n_a`` and flips the spin on ``n_b``.
* The two-ion CN maps the control spin onto the motion with a red-sideband
  pulse, which moves |up>|0> to |down>|1> and leaves |down>|0> alone. The
  coupled control state is therefore |up>: the target flips iff the control
  ion is up. The unmapping pulse uses phase phi + pi, which inverts the
  forward map on the |1, d> <-> |0, u> block exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingContext, rabi_frequency
from .dynamics import (
    JointSpace,
    Propagator,
    Pulse,
    StateVector,
    numeric_propagator,
    rwa_propagator,
)
from .magic import MagicEntry

LOGICAL_1ION = ("0d", "0u", "1d", "1u")


@dataclass(frozen=True)
class Schedule:
    pulses: tuple[Pulse, ...]
    space: JointSpace

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        for p in self.pulses:
            if p.target_ion >= self.space.n_ions:
                raise ValueError(f"pulse targets ion {p.target_ion} but the space has {self.space.n_ions}")

    def __len__(self):
        return len(self.pulses)


@dataclass
class TruthTableReport:
    """Output populations of each logical input.

    ``rows`` maps an input label to ``(populations, leakage)`` where
    ``populations`` is keyed by the logical labels and ``leakage`` is the
    population left outside them; the two always add up to 1.
    """

    rows: dict[str, tuple[dict[str, float], float]]
    max_leakage: float
    logical_basis: tuple[str, ...] = ()

    def population(self, src: str, dst: str) -> float:
        return self.rows[src][0][dst]

    def matrix(self) -> np.ndarray:
        """Populations as an array indexed [output, input]."""
        labels = self.logical_basis or tuple(self.rows)
        return np.array([[self.rows[i][0][o] for i in labels] for o in labels])


@dataclass
class FidelityReport:
    fidelity: float
    infidelity: float
    target_name: str
    max_deviation: float = float("nan")
    extras: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        return self.max_deviation <= tol


def reduced_cn_pulse(entry: MagicEntry, phi: float = 0.0, g: float = 1.0, ion: int = 0) -> Pulse:
    """Carrier pulse giving Omega_{n_a,n_a} tau = m pi at the entry's eta.

    Equivalently Omega_{n_b,n_b} tau = (k + 1/2) pi, a pi pulse (mod 2 pi) on
    the flip level.
    """
    if abs(entry.residual()) > 1e-9:
        raise ValueError(f"eta={entry.eta!r} does not satisfy the magic condition for {entry}")
    ctx = CouplingContext(eta=entry.eta, g=g)
    omega_a = abs(rabi_frequency(entry.n_a, entry.n_a, ctx))
    omega_0 = abs(rabi_frequency(0, 0, ctx))
    area = entry.m * math.pi * omega_0 / omega_a
    return Pulse(target_ion=ion, sideband_order=0, phase=phi, pulse_area=area, ctx=ctx)


def map_pulse(ion: int, ctx: CouplingContext, phi: float = 0.0, inverse: bool = False) -> Pulse:
    """Red-sideband pi transfer |up>|0> <-> |down>|1> on ``ion``.

    The pulse area Omega_{0,1} tau = pi/2 empties the block completely. The
    inverse uses phase ``phi + pi``.
    """
    phase = phi + math.pi if inverse else phi
    return Pulse(target_ion=ion, sideband_order=-1, phase=phase, pulse_area=math.pi / 2, ctx=ctx)


def compose_cn(
    control_ion: int,
    target_ion: int,
    entry: MagicEntry,
    ctx: CouplingContext | None = None,
    space: JointSpace | None = None,
    phi: float = 0.0,
) -> Schedule:
    """Three-pulse CN: map control onto the motion, reduced CN on target, unmap.

    ``ctx`` supplies the mapping pulses' coupling; its eta must equal the
    entry's because both ions share the COM mode. Default ``space`` is two ions
    with Fock cutoff 3.
    """
    if entry.n_a != 0 or entry.n_b != 1:
        raise ValueError("compose_cn needs an entry with n_a=0, n_b=1")
    ctx = ctx or CouplingContext(entry.eta)
    if abs(ctx.eta - entry.eta) > 1e-12:
        raise ValueError("ctx.eta must match the magic entry's eta")
    space = space or JointSpace(max(2, control_ion + 1, target_ion + 1), 3)
    if control_ion == target_ion:
        raise ValueError("control and target must be different ions")
    if space.n_ions < 2 or space.fock_cutoff < 2:
        raise ValueError("two-ion CN needs >= 2 ions and fock_cutoff >= 2")
    pulses = (
        map_pulse(control_ion, ctx, phi, inverse=False),
        reduced_cn_pulse(entry, phi, ctx.g, ion=target_ion),
        map_pulse(control_ion, ctx, phi, inverse=True),
    )
    return Schedule(pulses, space)


def schedule_propagator(
    schedule: Schedule,
    use_oracle: bool = False,
    omega_over_g: float = 1000.0,
    steps_per_trap_period: int = 64,
) -> Propagator:
    u = Propagator.identity(schedule.space)
    for p in schedule.pulses:
        if use_oracle:
            step = numeric_propagator(p, schedule.space, omega_over_g, steps_per_trap_period)
        else:
            step = rwa_propagator(p, schedule.space)
        u = step @ u
    return u


def apply_schedule(
    schedule: Schedule,
    state: StateVector,
    use_oracle: bool = False,
    omega_over_g: float = 1000.0,
    steps_per_trap_period: int = 64,
) -> StateVector:
    """Apply the pulses of ``schedule`` to ``state`` in order; returns a new state."""
    if state.space != schedule.space:
        raise ValueError(
            f"state dimension {state.space.dim} does not match schedule space {schedule.space.dim}"
        )
    if not schedule.pulses:
        return StateVector(state.space, state.amplitudes.copy())
    u = schedule_propagator(schedule, use_oracle, omega_over_g, steps_per_trap_period)
    return u.apply(state)


def truth_table(
    schedule: Schedule,
    logical_basis=None,
    propagator: Propagator | None = None,
) -> TruthTableReport:
    """Populations of the logical basis after the schedule acts on each logical input."""
    space = schedule.space
    if logical_basis is None:
        logical_basis = default_logical_basis(space)
    idx = [space.parse_label(lbl) for lbl in logical_basis]
    u = propagator or schedule_propagator(schedule)
    rows = {}
    worst = 0.0
    for lbl, j in zip(logical_basis, idx):
        pops = np.abs(u.matrix[:, j]) ** 2
        kept = {dst: float(pops[i]) for dst, i in zip(logical_basis, idx)}
        leak = max(0.0, float(pops.sum()) - sum(kept.values()))
        rows[lbl] = (kept, leak)
        worst = max(worst, leak)
    return TruthTableReport(rows=rows, max_leakage=worst, logical_basis=tuple(logical_basis))


def default_logical_basis(space: JointSpace) -> list[str]:
    """{0d, 0u, 1d, 1u} for one ion; all spin patterns at Fock 0 otherwise."""
    if space.n_ions == 1:
        return list(LOGICAL_1ION)
    return [space.label(code) for code in range(space.n_spin)]


def cn_target(k: int, m: int, phi: float) -> np.ndarray:
    """Ideal single-pulse gate in the {0d, 0u, 1d, 1u} basis, global sign removed.

    The flip block carries ``i exp(+-i phi) (-1)^(k-m)``; (-1)^(k-m) and
    (-1)^(k+m) are the same number.
    """
    sign = -1.0 if (k - m) % 2 else 1.0
    t = np.zeros((4, 4), dtype=complex)
    t[0, 0] = t[1, 1] = 1.0
    t[2, 3] = 1j * cmath.exp(1j * phi) * sign
    t[3, 2] = 1j * cmath.exp(-1j * phi) * sign
    return t


def two_ion_cn_target(control_ion: int, target_ion: int, k: int, m: int, phi: float, space: JointSpace) -> np.ndarray:
    """Ideal three-pulse gate on the Fock-0 logical subspace, global sign removed.

    Same structure as :func:`cn_target` with the control spin in place of the
    Fock number: identity when the control is down, the phased flip when up.
    """
    labels = default_logical_basis(space)
    one = cn_target(k, m, phi)
    t = np.zeros((len(labels), len(labels)), dtype=complex)
    for j, src in enumerate(labels):
        _, sj = space.decompose(space.parse_label(src))
        for i, dst in enumerate(labels):
            _, si = space.decompose(space.parse_label(dst))
            if any(si[q] != sj[q] for q in range(space.n_ions) if q != target_ion):
                continue
            # control bit plays the Fock index of the single-ion gate
            t[i, j] = one[2 * si[control_ion] + si[target_ion], 2 * sj[control_ion] + sj[target_ion]]
    return t


def gate_fidelity(target: np.ndarray, actual: np.ndarray) -> float:
    """|Tr(target^dag actual)| / d, blind to global phase."""
    d = target.shape[0]
    return float(abs(np.trace(target.conj().T @ actual)) / d)


def logical_block(u: Propagator, labels) -> np.ndarray:
    idx = [u.space.parse_label(lbl) for lbl in labels]
    return u.matrix[np.ix_(idx, idx)]


def verify_eq6(
    schedule: Schedule,
    k: int,
    m: int,
    phi: float = 0.0,
    tol: float = 1e-12,
    *,
    propagator: Propagator | None = None,
) -> FidelityReport:
    """Compare a one-ion reduced-CN schedule with the ideal phased CN matrix.

    The simulated unitary is multiplied by (-1)^m before the entrywise
    comparison. The fidelity itself does not depend on global phase.
    """
    space = schedule.space
    if space.n_ions != 1 or space.fock_cutoff < 2:
        raise ValueError("verify_eq6 needs a one-ion space with fock_cutoff >= 2")
    u = propagator or schedule_propagator(schedule)
    block = logical_block(u, LOGICAL_1ION) * (-1.0 if m % 2 else 1.0)
    target = cn_target(k, m, phi)
    fid = gate_fidelity(target, block)
    dev = float(np.max(np.abs(block - target)))
    return FidelityReport(
        fidelity=fid,
        infidelity=1.0 - fid,
        target_name=f"reduced CN k={k} m={m}",
        max_deviation=dev,
        extras={"tol": tol, "passed": dev <= tol, "unitary": block},
    )


def eta_sensitivity(entry: MagicEntry, deltas, ctx: CouplingContext | None = None, phi: float = 0.0):
    """Gate infidelity when the real eta is ``entry.eta + delta``.

    The pulse length stays the one computed for ``entry.eta``; only the Rabi
    frequencies see the perturbed value. Returns ``[(delta, infidelity), ...]``.
    """
    g = ctx.g if ctx is not None else 1.0
    nominal = reduced_cn_pulse(entry, phi, g)
    tau = nominal.duration
    space = JointSpace(1, max(2, entry.n_a + 1, entry.n_b + 1))
    target = cn_target(entry.k, entry.m, phi)
    # no-op level first, flip level second, matching cn_target's layout
    labels = [f"{n}{s}" for n in (entry.n_a, entry.n_b) for s in "du"]
    out = []
    for d in deltas:
        eta = entry.eta + d
        if not eta > 0:
            raise ValueError(f"eta + delta must stay positive, got {eta!r}")
        pctx = CouplingContext(eta=eta, g=g)
        area = abs(rabi_frequency(0, 0, pctx)) * tau
        pulse = Pulse(0, 0, phi, area, pctx)
        block = logical_block(rwa_propagator(pulse, space), labels)
        out.append((d, 1.0 - gate_fidelity(target, block)))
    return out
