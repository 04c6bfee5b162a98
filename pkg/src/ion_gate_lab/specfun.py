"""Generalized Laguerre polynomials and factorial-ratio helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LaguerreSpec:
    """Degree ``n``, integer order ``alpha`` and argument ``x`` of L_n^alpha(x).

    In this package ``x`` is always the squared Lamb-Dicke parameter.
    """

    n: int
    alpha: int = 0
    x: float = 0.0

    def __post_init__(self):
        _check_nonneg_int("n", self.n)
        _check_nonneg_int("alpha", self.alpha)
        if not (self.x >= 0.0) or not math.isfinite(self.x):
            raise ValueError(f"x must be a finite nonnegative real, got {self.x!r}")


def _check_nonneg_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")


def laguerre(spec: LaguerreSpec | int, alpha: int = 0, x: float | None = None) -> float:
    """Evaluate the generalized Laguerre polynomial L_n^alpha(x).

    Accepts either a :class:`LaguerreSpec` or the triple ``(n, alpha, x)``.
    Uses the upward three-term recurrence

        (j+1) L_{j+1} = (2j + 1 + alpha - x) L_j - (j + alpha) L_{j-1}

    seeded with L_0 = 1 and L_1 = 1 + alpha - x.

    Examples
    --------
    >>> laguerre(2, 0, 0.25)
    0.53125
    >>> laguerre(LaguerreSpec(n=1, alpha=1, x=0.3))
    1.7
    """
    if not isinstance(spec, LaguerreSpec):
        spec = LaguerreSpec(spec, alpha, 0.0 if x is None else float(x))
    n, a, x = spec.n, spec.alpha, spec.x

    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + a - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return cur


def sqrt_factorial_ratio(n_lo: int, n_hi: int) -> float:
    """Return sqrt(n_lo! / n_hi!) for ``n_lo <= n_hi``.

    Built as a running product of 1/sqrt(j) for j in (n_lo, n_hi], so nothing
    overflows even near the double-precision factorial limit (170!).
    """
    _check_nonneg_int("n_lo", n_lo)
    _check_nonneg_int("n_hi", n_hi)
    if n_lo > n_hi:
        raise ValueError(f"need n_lo <= n_hi, got {n_lo} > {n_hi}")
    out = 1.0
    for j in range(n_lo + 1, n_hi + 1):
        out /= math.sqrt(j)
    return out
