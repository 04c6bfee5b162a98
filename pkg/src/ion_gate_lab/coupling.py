"""Trap and laser parameters, the Lamb-Dicke parameter and Fock-state Rabi frequencies.

Rabi frequencies follow the convention that a resonant pulse of duration t on
a two-level pair flips population with probability sin^2(Omega t), i.e. the
Bloch-sphere rotation angle is 2 Omega t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import laguerre, sqrt_factorial_ratio

#: Reduced Planck constant in J s (CODATA 2018, exact by SI definition).
HBAR = 1.054571817e-34


@dataclass(frozen=True)
class RamanBeams:
    """Single-beam Rabi frequencies and detuning from the virtual level (rad/s)."""

    g1: float
    g2: float
    detuning: float

    def __post_init__(self):
        if self.detuning == 0:
            raise ValueError("Raman detuning must be nonzero")


@dataclass(frozen=True)
class PhysicalParams:
    """Physical description of one ion (or ion string) and the driving laser.

    Attributes
    ----------
    mass : float
        Total mass of the ion collection, kg.
    trap_frequency : float
        COM mode angular frequency, rad/s.
    internal_splitting : float
        Qubit transition angular frequency, rad/s.
    wavevector : float
        Magnitude of the effective wavevector projected on the motional axis,
        1/m. For Raman beams pass the wavevector difference.
    dipole_coupling : float
        Resonant Rabi frequency without confinement, rad/s. Ignored when
        ``raman`` is given.
    raman : RamanBeams, optional
    rf_drive : float, optional
        Paul-trap rf angular frequency. Leave ``None`` for static confinement.
    """

    mass: float
    trap_frequency: float
    internal_splitting: float
    wavevector: float
    dipole_coupling: float = 1.0
    raman: RamanBeams | None = None
    rf_drive: float | None = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.trap_frequency > 0:
            raise ValueError("trap_frequency must be positive")
        if not self.internal_splitting > 0:
            raise ValueError("internal_splitting must be positive")
        if not self.wavevector >= 0:
            raise ValueError("wavevector must be nonnegative")
        if self.rf_drive is not None and not self.rf_drive > self.trap_frequency:
            raise ValueError("rf_drive must exceed trap_frequency")


@dataclass(frozen=True)
class CouplingContext:
    """Lamb-Dicke parameter ``eta`` and base Rabi frequency ``g`` of one ion.

    ``g = 1`` is the dimensionless mode in which times are pulse areas.
    """

    eta: float
    g: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be finite and positive, got {self.eta!r}")
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValueError(f"g must be finite and positive, got {self.g!r}")


def zero_point_spread(mass: float, trap_frequency: float) -> float:
    """Return z0 = sqrt(hbar / (2 M omega)) in meters."""
    if not mass > 0 or not trap_frequency > 0:
        raise ValueError("mass and trap_frequency must be positive")
    return math.sqrt(HBAR / (2.0 * mass * trap_frequency))


def lamb_dicke(params: PhysicalParams) -> float:
    """Return eta = |k_eff| z0 for the supplied physical parameters."""
    if params.wavevector == 0:
        raise ValueError("wavevector is zero: no coupling to the motion")
    return params.wavevector * zero_point_spread(params.mass, params.trap_frequency)


def raman_effective_g(g1: float, g2: float, detuning: float) -> float:
    """Two-photon Rabi frequency g1 g2 / detuning."""
    if detuning == 0:
        raise ValueError("Raman detuning must be nonzero")
    return g1 * g2 / detuning


def micromotion_corrected_eta(eta: float, trap_frequency: float, rf_drive: float) -> float:
    """Lamb-Dicke parameter dressed by rf micromotion (pseudopotential limit).

    Returns ``eta * (1 - omega / (2 sqrt(2) omega_rf))``. Only meaningful for
    rf confinement of the mode; statically confined modes need no correction.
    """
    if not trap_frequency > 0:
        raise ValueError("trap_frequency must be positive")
    if not rf_drive > trap_frequency:
        raise ValueError("rf_drive must exceed trap_frequency")
    return eta * (1.0 - trap_frequency / (2.0 * math.sqrt(2.0) * rf_drive))


def context_from_params(params: PhysicalParams) -> CouplingContext:
    """Build the (eta, g) context, applying Raman and micromotion substitutions."""
    eta = lamb_dicke(params)
    if params.rf_drive is not None:
        eta = micromotion_corrected_eta(eta, params.trap_frequency, params.rf_drive)
    if params.raman is not None:
        g = raman_effective_g(params.raman.g1, params.raman.g2, params.raman.detuning)
    else:
        g = params.dipole_coupling
    return CouplingContext(eta=eta, g=abs(g))


def rabi_frequency(n_from: int, n_to: int, ctx: CouplingContext) -> float:
    """Rabi frequency coupling |n_from, down> to |n_to, up>.

    ``g exp(-eta^2/2) eta^|dn| sqrt(n_<!/n_>!) L_{n_<}^{|dn|}(eta^2)``

    The value is signed (the Laguerre factor changes sign at large eta); its
    magnitude is the modulus of the motional matrix element
    ``<n_to| exp(i eta (a + a^dag)) |n_from>`` times ``g``. The i^|dn| phase of
    that element is handled in :mod:`ion_gate_lab.dynamics`.
    """
    lo, hi = min(n_from, n_to), max(n_from, n_to)
    dn = hi - lo
    x = ctx.eta * ctx.eta
    return (
        ctx.g
        * math.exp(-x / 2.0)
        * ctx.eta**dn
        * sqrt_factorial_ratio(lo, hi)
        * laguerre(lo, dn, x)
    )
