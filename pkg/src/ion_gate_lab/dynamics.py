"""Joint spin/motion states and single-pulse propagators.

Basis convention
----------------
A :class:`JointSpace` with ``n_ions`` spins and Fock cutoff ``N`` has
dimension ``2**n_ions * N``. The basis index of Fock level ``n`` with spin
bits ``b_0 .. b_{n_ions-1}`` (down = 0, up = 1) is::

    index = n * 2**n_ions + sum_i b_i 2**i

so spins vary fastest and ion 0 is the least significant bit. For one ion
and ``N = 2`` this is the ordered basis {0d, 0u, 1d, 1u}.

Labels are the Fock number followed by one spin character per ion, ion 0
first: ``"1d"`` is |1>|down>, ``"0ud"`` is |0>|up>_0|down>_1. The arrows
``↓``/``↑`` are accepted in place of ``d``/``u``.

Phase convention
----------------
A pulse with phase phi drives (hbar = 1, rotating frame)::

    H = -g sum_{n,n'} D_{n',n}(eta) e^{-i phi} S_+ |n'><n| + h.c.

where ``D = exp(i eta (a + a^dag))`` and only terms with ``n' - n = s`` are
kept in the rotating-wave limit. The overall minus sign comes from the
dipole interaction -mu.E. On a resonant pair the propagator is
``cos(Omega t) I + i sin(Omega t) (e^{-i phi} |u><d| + e^{i phi} |d><u|)``.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingContext, rabi_frequency
from .specfun import laguerre, sqrt_factorial_ratio

TWO_PI = 2.0 * math.pi

UNITARITY_TOL = 1e-12
NORM_TOL = 1e-12
STEP_HALVING_TOL = 1e-8
LEAKAGE_TOL = 1e-10

# accumulation dtype of the RK4 oracle; rounding otherwise grows with the
# number of trap periods and spoils unitarity at the 1e-12 level
_WIDE = np.clongdouble

_SPIN_CHARS = {"d": 0, "u": 1, "↓": 0, "↑": 1}
_LABEL_RE = re.compile(r"^(\d+)([du↓↑]+)$")


class ConvergenceWarning(RuntimeWarning):
    """Step halving or Fock truncation check of the numeric propagator failed."""


@dataclass(frozen=True)
class JointSpace:
    n_ions: int
    fock_cutoff: int

    def __post_init__(self):
        if not isinstance(self.n_ions, int) or self.n_ions < 1:
            raise ValueError(f"n_ions must be a positive integer, got {self.n_ions!r}")
        if not isinstance(self.fock_cutoff, int) or self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be a positive integer, got {self.fock_cutoff!r}")

    @property
    def n_spin(self) -> int:
        return 1 << self.n_ions

    @property
    def dim(self) -> int:
        return self.n_spin * self.fock_cutoff

    def index(self, n: int, spins) -> int:
        """Basis index of Fock level ``n`` with per-ion spin bits ``spins``."""
        if len(spins) != self.n_ions:
            raise ValueError(f"expected {self.n_ions} spins, got {len(spins)}")
        if not 0 <= n < self.fock_cutoff:
            raise ValueError(f"Fock level {n} outside [0, {self.fock_cutoff})")
        code = sum(int(b) << i for i, b in enumerate(spins))
        return n * self.n_spin + code

    def decompose(self, idx: int) -> tuple[int, tuple[int, ...]]:
        n, code = divmod(idx, self.n_spin)
        return n, tuple((code >> i) & 1 for i in range(self.n_ions))

    def label(self, idx: int) -> str:
        n, spins = self.decompose(idx)
        return f"{n}" + "".join("u" if b else "d" for b in spins)

    def parse_label(self, label: str) -> int:
        match = _LABEL_RE.match(label.strip())
        if match is None:
            raise ValueError(f"malformed basis label {label!r}")
        spins = [_SPIN_CHARS[c] for c in match.group(2)]
        return self.index(int(match.group(1)), spins)

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(self.dim)]


class StateVector:
    """Unit-norm complex amplitudes over a :class:`JointSpace`."""

    def __init__(self, space: JointSpace, amplitudes, *, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (space.dim,):
            raise ValueError(f"expected {space.dim} amplitudes, got {amps.shape[0]}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} differs from 1")
        self.space = space
        self.amplitudes = amps

    @classmethod
    def basis(cls, space: JointSpace, label: str | int) -> "StateVector":
        idx = space.parse_label(label) if isinstance(label, str) else int(label)
        amps = np.zeros(space.dim, dtype=complex)
        amps[idx] = 1.0
        return cls(space, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fock_populations(self) -> np.ndarray:
        """Population of each Fock level, summed over spins."""
        return self.populations().reshape(self.space.fock_cutoff, self.space.n_spin).sum(axis=1)

    def __repr__(self):
        return f"StateVector({self.space!r}, norm={self.norm():.15f})"


@dataclass(frozen=True)
class Pulse:
    """One laser pulse on one ion.

    ``sideband_order`` s: 0 is the carrier, +1 / -1 the blue / red sideband
    coupling |n, d> to |n+s, u>. ``pulse_area`` is Omega_{0,|s|} tau in
    radians, so a carrier pulse of area m pi does m full Rabi cycles on |0>.
    """

    target_ion: int
    sideband_order: int
    phase: float
    pulse_area: float
    ctx: CouplingContext

    def __post_init__(self):
        if not isinstance(self.sideband_order, int):
            raise ValueError("sideband_order must be an integer")
        if not (math.isfinite(self.pulse_area) and self.pulse_area >= 0):
            raise ValueError(f"pulse_area must be finite and >= 0, got {self.pulse_area!r}")
        if not isinstance(self.target_ion, int) or self.target_ion < 0:
            raise ValueError("target_ion must be a nonnegative integer")
        object.__setattr__(self, "phase", math.fmod(self.phase, TWO_PI) % TWO_PI)

    @property
    def reference_rabi(self) -> float:
        """|Omega_{0,|s|}|, the rate that defines ``pulse_area``."""
        return abs(rabi_frequency(0, abs(self.sideband_order), self.ctx))

    @property
    def duration(self) -> float:
        """Pulse length in units of 1/g's time unit (seconds when g is in rad/s)."""
        return self.pulse_area / self.reference_rabi


@dataclass
class Propagator:
    """Complex matrix over a :class:`JointSpace`.

    ``converged``, ``step_change`` and ``leakage`` are only informative for
    propagators produced by :func:`numeric_propagator`.
    """

    matrix: np.ndarray
    space: JointSpace
    converged: bool = True
    step_change: float = 0.0
    leakage: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ValueError("matrix shape does not match the space")

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    def apply(self, state: StateVector) -> StateVector:
        if state.space != self.space:
            raise ValueError("state and propagator live on different spaces")
        return StateVector(self.space, self.matrix @ state.amplitudes)

    def __matmul__(self, other: "Propagator") -> "Propagator":
        if other.space != self.space:
            raise ValueError("propagators live on different spaces")
        return Propagator(
            self.matrix @ other.matrix,
            self.space,
            converged=self.converged and other.converged,
            step_change=max(self.step_change, other.step_change),
            leakage=max(self.leakage, other.leakage),
        )

    @classmethod
    def identity(cls, space: JointSpace) -> "Propagator":
        return cls(np.eye(space.dim, dtype=complex), space)


def _matrix_element(n_to: int, n_from: int, eta: float) -> complex:
    """<n_to| exp(i eta (a + a^dag)) |n_from>."""
    lo, hi = min(n_to, n_from), max(n_to, n_from)
    dn = hi - lo
    x = eta * eta
    mag = math.exp(-x / 2.0) * eta**dn * sqrt_factorial_ratio(lo, hi) * laguerre(lo, dn, x)
    return (1j) ** dn * mag


def displacement_matrix(eta: float, N: int) -> np.ndarray:
    """N x N matrix of <n'| exp(i eta (a + a^dag)) |n> from the closed form.

    These are the exact elements of the infinite-dimensional operator, not of
    the exponential of a truncated generator.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not eta >= 0:
        raise ValueError("eta must be nonnegative")
    out = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(i, N):
            out[i, j] = out[j, i] = _matrix_element(i, j, eta)
    return out


def _two_level(w: complex, tau: float) -> np.ndarray:
    """Propagator of H = -(w |u><d| + w* |d><u|) over ``tau``, basis (d, u)."""
    a = abs(w)
    if a == 0.0 or tau == 0.0:
        return np.eye(2, dtype=complex)
    c, s = math.cos(a * tau), math.sin(a * tau)
    u = w / a
    return np.array([[c, 1j * s * u.conjugate()], [1j * s * u, c]], dtype=complex)


def _block(n: int, pulse: Pulse) -> np.ndarray:
    s = pulse.sideband_order
    # g cancels between the coupling and the duration; work in units of g
    w = _matrix_element(n + s, n, pulse.ctx.eta) * complex(math.cos(pulse.phase), -math.sin(pulse.phase))
    return _two_level(w, pulse.pulse_area / (pulse.reference_rabi / pulse.ctx.g))


def carrier_block_unitary(n: int, pulse: Pulse) -> np.ndarray:
    """2 x 2 carrier propagator on span{|n, d>, |n, u>}."""
    if pulse.sideband_order != 0:
        raise ValueError("carrier_block_unitary needs a carrier pulse (sideband_order 0)")
    if n < 0:
        raise ValueError("Fock level must be nonnegative")
    return _block(n, pulse)


def sideband_block_unitary(n: int, pulse: Pulse, fock_cutoff: int | None = None) -> np.ndarray:
    """Sideband propagator on span{|n, d>, |n+s, u>}.

    The i^|s| phase of the motional matrix element is kept, so the effective
    coupling phase is phi - |s| pi/2 in this module's convention. When n+s is
    negative or not below ``fock_cutoff`` the state has no partner and a 1 x 1
    identity is returned.
    """
    s = pulse.sideband_order
    if s == 0:
        raise ValueError("sideband_block_unitary needs a nonzero sideband order")
    if n < 0:
        raise ValueError("Fock level must be nonnegative")
    if n + s < 0 or (fock_cutoff is not None and n + s >= fock_cutoff):
        return np.eye(1, dtype=complex)
    return _block(n, pulse)


def _check_target(pulse: Pulse, space: JointSpace):
    if pulse.target_ion >= space.n_ions:
        raise ValueError(f"target_ion {pulse.target_ion} out of range for {space.n_ions} ions")


def rwa_propagator(pulse: Pulse, space: JointSpace) -> Propagator:
    """Rotating-wave propagator: a direct sum of resonant 2 x 2 blocks."""
    _check_target(pulse, space)
    s = pulse.sideband_order
    bit = 1 << pulse.target_ion
    ns, N = space.n_spin, space.fock_cutoff
    u = np.eye(space.dim, dtype=complex)
    for n in range(N):
        if not 0 <= n + s < N:
            continue
        b = _block(n, pulse)
        for code in range(ns):
            if code & bit:
                continue
            lo, hi = n * ns + code, (n + s) * ns + (code | bit)
            u[lo, lo], u[lo, hi] = b[0, 0], b[0, 1]
            u[hi, lo], u[hi, hi] = b[1, 0], b[1, 1]
    return Propagator(u, space)


def default_oracle_cutoff(max_level: int) -> int:
    """Fock cutoff used for numeric checks: twice the highest level in play plus 10."""
    return 2 * max_level + 10


def _coefficients(pulse: Pulse, space: JointSpace):
    """Harmonics of the lab-motion coupling: C(t) = sum_d M_d exp(i d omega t)."""
    s = pulse.sideband_order
    bit = 1 << pulse.target_ion
    ns, N = space.n_spin, space.fock_cutoff
    disp = displacement_matrix(pulse.ctx.eta, N)
    phase = complex(math.cos(pulse.phase), -math.sin(pulse.phase))
    mats = {}
    for n in range(N):
        for n2 in range(N):
            d = (n2 - n) - s
            m = mats.setdefault(d, np.zeros((space.dim, space.dim), dtype=complex))
            for code in range(ns):
                if code & bit:
                    continue
                m[n2 * ns + (code | bit), n * ns + code] = -phase * disp[n2, n]
    ds = sorted(mats)
    return np.array(ds, dtype=float), np.stack([mats[d] for d in ds])


def _rk4_segment(harmonics, mats, omega, h, nsteps, dim):
    """Fixed-step RK4 for dU/dt = -i H(t) U from t = 0, returns U(nsteps h)."""
    h = np.longdouble(h)
    times = np.longdouble(0.5) * h * np.arange(2 * nsteps + 1, dtype=np.longdouble)
    arg = np.longdouble(omega) * np.outer(times, harmonics.astype(np.longdouble))
    phases = np.cos(arg) + 1j * np.sin(arg).astype(_WIDE)
    c = np.einsum("td,dij->tij", phases, mats.astype(_WIDE))
    ham = c + np.conj(np.transpose(c, (0, 2, 1)))
    gen = -1j * ham
    u = np.eye(dim, dtype=_WIDE)
    for i in range(nsteps):
        a, mid, b = gen[2 * i], gen[2 * i + 1], gen[2 * i + 2]
        k1 = a @ u
        k2 = mid @ (u + 0.5 * h * k1)
        k3 = mid @ (u + 0.5 * h * k2)
        k4 = b @ (u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def _integrate(pulse, space, omega, steps_per_period, harmonics, mats):
    period = TWO_PI / omega
    tau = pulse.pulse_area / (pulse.reference_rabi / pulse.ctx.g)
    n_periods = int(math.floor(tau / period))
    rem = tau - n_periods * period
    h = period / steps_per_period
    u = np.eye(space.dim, dtype=_WIDE)
    if n_periods:
        u_period = _rk4_segment(harmonics, mats, omega, h, steps_per_period, space.dim)
        u = np.linalg.matrix_power(u_period, n_periods)
    if rem > 0:
        nrem = max(1, int(math.ceil(rem / h - 1e-9)))
        # the Hamiltonian is periodic, so the leftover piece restarts at t = 0
        u = _rk4_segment(harmonics, mats, omega, rem / nrem, nrem, space.dim) @ u
    return u.astype(complex)


def numeric_propagator(
    pulse: Pulse,
    space: JointSpace,
    omega_over_g: float = 1000.0,
    steps_per_trap_period: int = 64,
) -> Propagator:
    """Propagator of the full rotating-frame Hamiltonian, all motional orders kept.

    Integrates ``dU/dt = -i H(t) U`` with classical fixed-step RK4, step equal
    to the trap period over ``steps_per_trap_period``. Time is measured in
    units of 1/g. Because H(t) has the trap period, whole periods are
    integrated once and raised to the needed power; the fractional remainder
    is integrated separately.

    The integration is repeated at half the step. The finer result is returned
    with ``step_change`` set to the largest entrywise difference and
    ``converged`` false if it exceeds 1e-8. ``leakage`` is the largest
    population reaching the two highest Fock levels from any input whose Fock
    level is in play (0 .. max(1, |s|)); it is NaN when the cutoff leaves no
    room above those levels. See :func:`default_oracle_cutoff`.
    """
    _check_target(pulse, space)
    if not omega_over_g > 0:
        raise ValueError("omega_over_g must be positive")
    if not isinstance(steps_per_trap_period, int) or steps_per_trap_period < 1:
        raise ValueError("steps_per_trap_period must be a positive integer")

    harmonics, mats = _coefficients(pulse, space)
    coarse = _integrate(pulse, space, omega_over_g, steps_per_trap_period, harmonics, mats)
    fine = _integrate(pulse, space, omega_over_g, 2 * steps_per_trap_period, harmonics, mats)
    change = float(np.max(np.abs(fine - coarse)))
    converged = change <= STEP_HALVING_TOL

    ns, N = space.n_spin, space.fock_cutoff
    in_play = max(1, abs(pulse.sideband_order))
    if N >= in_play + 3:
        top = np.abs(fine[(N - 2) * ns :, : (in_play + 1) * ns]) ** 2
        leakage = float(top.sum(axis=0).max())
    else:
        leakage = float("nan")
        warnings.warn(
            f"fock_cutoff {N} leaves no margin above level {in_play}; truncation is not monitored",
            ConvergenceWarning,
            stacklevel=2,
        )

    if not converged:
        warnings.warn(f"step halving changed the propagator by {change:.3e}", ConvergenceWarning, stacklevel=2)
    if leakage > LEAKAGE_TOL:
        warnings.warn(f"population {leakage:.3e} reached the Fock cutoff", ConvergenceWarning, stacklevel=2)
    return Propagator(
        fine,
        space,
        converged=converged,
        step_change=change,
        leakage=leakage,
        meta={"omega_over_g": omega_over_g, "steps_per_trap_period": 2 * steps_per_trap_period},
    )
