"""Numerically stable special functions for 1-bit likelihood evaluation.

The per-sample likelihood terms contain ratios exp(-a^2)/Q(.) that overflow
when evaluated naively at high SNR; ``ratio_exp_q`` fuses them through the
scaled complementary error function and stays finite for every real input.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sp

__all__ = [
    "KAPPA1_C1",
    "KAPPA1_C2",
    "gaussian_q",
    "log_gaussian_q",
    "bessel_i0",
    "bessel_i1",
    "ratio_exp_q",
    "kappa1",
]

# fit constants of the 1-bit Fisher-information lower bound
KAPPA1_C1 = 4.0360
KAPPA1_C2 = 0.3930

_SQRT2 = np.sqrt(2.0)
# below this argument 2/erfcx(a) would overflow; Q(a*sqrt2) is 1 to ~1e-300 there
_ERFCX_LIMIT = -26.0


def gaussian_q(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * sp.erfc(np.asarray(x, dtype=float) / _SQRT2)


def log_gaussian_q(x):
    """log Q(x), stable far into the tail."""
    return sp.log_ndtr(-np.asarray(x, dtype=float))


def bessel_i0(x):
    """Modified Bessel function of the first kind, order 0."""
    return sp.i0(x)


def bessel_i1(x):
    """Modified Bessel function of the first kind, order 1."""
    return sp.i1(x)


def ratio_exp_q(a):
    """exp(-a^2) / Q(a*sqrt(2)), overflow-free for any real a.

    Identity: Q(a*sqrt(2)) = erfc(a)/2, so the ratio equals 2/erfcx(a).
    For a -> +inf it grows like 2*a*sqrt(pi); for a -> -inf it decays like
    exp(-a^2), evaluated directly once erfcx itself would overflow.
    """
    arr = np.asarray(a, dtype=float)
    out = np.empty_like(arr)
    safe = arr > _ERFCX_LIMIT
    out[safe] = 2.0 / sp.erfcx(arr[safe])
    with np.errstate(under="ignore"):  # underflow to 0 is the correct limit
        out[~safe] = np.exp(-np.square(arr[~safe]))
    return out if out.ndim else float(out)


def kappa1(x):
    """c1 * exp(-c2 x) * (I0(c2 x) + I1(c2 x)), via scaled Bessel functions.

    The scaled forms keep the product finite at arbitrarily large x, where
    the unscaled Bessel functions overflow; kappa1(0) = c1 exactly.
    """
    z = KAPPA1_C2 * np.asarray(x, dtype=float)
    return KAPPA1_C1 * (sp.i0e(z) + sp.i1e(z))
