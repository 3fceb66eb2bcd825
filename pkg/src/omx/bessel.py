"""Integer-order Bessel functions of the first kind for sideband sums.

Phase-modulation combs need the whole ladder J_0(x) .. J_N(x) at once, so the
values come from Miller's downward recurrence normalized with the identity
J_0 + 2*sum_k J_2k = 1.  For the arguments used here (x <= 20 or so) this is
accurate to ~1e-14 absolute.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["truncation_order", "bessel_j_ladder", "bessel_j_signed"]

_RESCALE = 1e250


def truncation_order(x: float) -> int:
    """Number of sidebands kept on each side for argument ``x``.

    J_n(x) decays super-exponentially once n exceeds x, so ceil(2x) + 20
    covers every ladder used in practice with a wide margin.
    """
    return int(math.ceil(2.0 * abs(x))) + 20


def bessel_j_ladder(x: float, nmax: int) -> np.ndarray:
    """Return ``[J_0(x), J_1(x), ..., J_nmax(x)]``."""
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    x = float(x)
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    if abs(x) < 1e-6:
        # two-term power series; the recurrence's 2k/x overflows for tiny x
        half = 0.5 * x
        term = 1.0
        for n in range(nmax + 1):
            out[n] = term * (1.0 - half * half / (n + 1))
            term *= half / (n + 1)
        return out
    sign = 1.0
    if x < 0:
        # J_n(-x) = (-1)^n J_n(x)
        sign, x = -1.0, -x

    start = max(nmax, int(x)) + 20 + int(10.0 * math.sqrt(max(nmax, x) + 1.0))
    start += start % 2
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = 2.0 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalized J_{k-1}
        if k - 1 <= nmax:
            out[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            out /= _RESCALE
    norm += j_cur  # J_0 term
    out /= norm
    if sign < 0:
        out[1::2] *= -1.0
    return out


def bessel_j_signed(x: float, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Return orders ``-nmax..nmax`` and the matching J_n(x) values."""
    pos = bessel_j_ladder(x, nmax)
    orders = np.arange(-nmax, nmax + 1)
    neg = pos[:0:-1] * np.where(np.arange(nmax, 0, -1) % 2 == 1, -1.0, 1.0)
    return orders, np.concatenate([neg, pos])
