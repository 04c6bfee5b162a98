"""Magic Lamb-Dicke parameters for single-pulse reduced controlled-NOT gates.

A carrier pulse rotates every Fock level n at its own rate Omega_{n,n}. At a
magic eta the rates on two levels are commensurate: level ``n_a`` completes
2m pi (no net rotation) while level ``n_b`` completes (2k+1) pi (a flip), so
one pulse acts as a CN gate with the motion as control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import laguerre

GRID_STEP = 1e-3
BISECT_TOL = 1e-13


@dataclass(frozen=True, order=True)
class MagicEntry:
    """One single-pulse operating point.

    Attributes
    ----------
    n_a, n_b : int
        Fock levels receiving 2m pi (no-op) and (2k+1) pi (flip).
    k, m : int
    eta : float
    pulse_area_00 : float
        Omega_{0,0} tau for the pulse. Equals m pi whenever ``n_a == 0``.
    """

    n_a: int
    n_b: int
    k: int
    m: int
    eta: float
    pulse_area_00: float

    def __post_init__(self):
        _check_km(self.k, self.m)
        if self.n_a == self.n_b:
            raise ValueError("n_a and n_b must differ")
        if not self.eta > 0:
            raise ValueError("eta must be positive")

    @property
    def ratio(self) -> float:
        """Target value of Omega_{n_b,n_b} / Omega_{n_a,n_a}."""
        return (2 * self.k + 1) / (2 * self.m)

    @property
    def rotation_a(self) -> int:
        """Rotation of level n_a in units of pi."""
        return 2 * self.m

    @property
    def rotation_b(self) -> int:
        """Rotation of level n_b in units of pi."""
        return 2 * self.k + 1

    def residual(self) -> float:
        x = self.eta**2
        return abs(laguerre(self.n_b, 0, x) / laguerre(self.n_a, 0, x)) - self.ratio


def _check_km(k, m):
    for name, v, lo in (("k", k, 0), ("m", m, 1)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
            raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
    if k >= m:
        raise ValueError(f"need k < m, got k={k}, m={m}")


def magic_eta_01(k: int, m: int) -> float:
    """Closed-form magic eta for the |0>, |1> pair: sqrt(1 - (2k+1)/(2m))."""
    _check_km(k, m)
    return math.sqrt(1.0 - (2 * k + 1) / (2 * m))


def _bisect(f, lo, hi, flo):
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def magic_eta_pair(
    n_a: int,
    n_b: int,
    k: int,
    m: int,
    search_max: float = 2.0,
    *,
    magnitude: bool = False,
) -> list[float]:
    """All eta in (0, search_max] with L_{n_b}(eta^2) / L_{n_a}(eta^2) = (2k+1)/(2m).

    Roots are bracketed on a uniform 1e-3 grid and refined by bisection to
    1e-13. The search runs on ``L_{n_b} - r L_{n_a}``, which has no poles; any
    root where L_{n_a} vanishes is dropped. With ``magnitude=True`` the ratio
    may also be ``-(2k+1)/(2m)``: a negative Rabi frequency rotates the other
    way, which is equally a no-op / flip.

    Returns an ascending list, empty when nothing lies in range.
    """
    for name, v in (("n_a", n_a), ("n_b", n_b)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
            raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
    if n_a == n_b:
        raise ValueError("n_a and n_b must differ")
    _check_km(k, m)
    if not search_max > 0:
        raise ValueError("search_max must be positive")

    r = (2 * k + 1) / (2 * m)
    ratios = (r, -r) if magnitude else (r,)
    n_grid = int(math.floor(search_max / GRID_STEP + 1e-9))
    grid = [GRID_STEP * i for i in range(1, n_grid + 1)]
    if not grid or grid[-1] < search_max:
        grid.append(search_max)

    roots = []
    for target in ratios:

        def f(eta, target=target):
            x = eta * eta
            return laguerre(n_b, 0, x) - target * laguerre(n_a, 0, x)

        vals = [f(e) for e in grid]
        for i, (e, v) in enumerate(zip(grid, vals)):
            if v == 0.0:
                roots.append(e)
            elif i + 1 < len(grid) and vals[i + 1] != 0.0 and (v > 0) != (vals[i + 1] > 0):
                roots.append(_bisect(f, e, grid[i + 1], v))

    scale = max(1.0, r)
    roots = [e for e in roots if abs(laguerre(n_a, 0, e * e)) > 1e-9 * scale]
    return sorted(roots)


def _entry(n_a, n_b, k, m, eta):
    return MagicEntry(
        n_a=n_a,
        n_b=n_b,
        k=k,
        m=m,
        eta=eta,
        pulse_area_00=m * math.pi / abs(laguerre(n_a, 0, eta * eta)),
    )


def magic_table(
    k_max: int,
    m_max: int,
    swapped: bool = False,
    *,
    pair: tuple[int, int] = (0, 1),
    m_span: int | None = None,
    search_max: float = 2.0,
    magnitude: bool = False,
) -> list[MagicEntry]:
    """Enumerate magic operating points for every k <= k_max, k < m <= m_max.

    ``pair = (n_a, n_b)`` names the no-op and flip levels; ``swapped`` exchanges
    them. ``m_span`` keeps only m - k <= m_span (``m_span=3`` with
    ``k_max=4, m_max=7`` gives the familiar 15-entry layout). Coincident eta
    values at different (k, m) are kept: they are different pulse lengths.
    """
    if k_max < 0 or m_max < 1:
        raise ValueError("need k_max >= 0 and m_max >= 1")
    n_a, n_b = (pair[1], pair[0]) if swapped else pair
    closed_form = (n_a, n_b) == (0, 1) and not magnitude and search_max >= 1.0

    entries = []
    for k in range(k_max + 1):
        for m in range(k + 1, m_max + 1):
            if m_span is not None and m - k > m_span:
                continue
            if closed_form:
                etas = [magic_eta_01(k, m)]
            else:
                etas = magic_eta_pair(n_a, n_b, k, m, search_max, magnitude=magnitude)
            entries.extend(_entry(n_a, n_b, k, m, eta) for eta in etas)
    entries.sort(key=lambda e: (e.n_a, e.n_b, e.k, e.m, e.eta))
    return entries
