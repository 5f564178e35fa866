"""Probit-style losses of a normalized margin and their derivatives.

``phi`` is the standard normal upper tail; ``phi_dis`` and ``phi_err`` are the
disagreement and joint-error losses built from it. All functions accept
scalars or arrays and return the same shape.
"""

import math

import numpy as np
from scipy import special

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _checked(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("losses are defined on finite margins only")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def phi(x):
    """Standard normal upper-tail probability, 1/2 - 1/2 erf(x / sqrt 2).

    Evaluated through ``erfc`` so the tail stays accurate for large ``x``
    (no ``1 - cdf`` cancellation).
    """
    arr = _checked(x)
    return _out(0.5 * special.erfc(arr * _INV_SQRT2), x)


def phi_dis(x):
    """Disagreement loss 2 phi(x) phi(-x); even, peaks at 0.5 for x = 0."""
    arr = _checked(x)
    p = 0.5 * special.erfc(arr * _INV_SQRT2)
    q = 0.5 * special.erfc(-arr * _INV_SQRT2)
    return _out(2.0 * p * q, x)


def phi_err(x):
    """Joint-error loss phi(x)**2."""
    arr = _checked(x)
    p = 0.5 * special.erfc(arr * _INV_SQRT2)
    return _out(p * p, x)


def d_phi(x):
    arr = _checked(x)
    return _out(-_INV_SQRT_2PI * np.exp(-0.5 * arr * arr), x)


def d_phi_dis(x):
    # d/dx 2 phi(x) (1 - phi(x)) = 2 phi'(x) (1 - 2 phi(x)); 1 - 2 phi(x) = erf(x / sqrt 2)
    arr = _checked(x)
    dp = -_INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return _out(2.0 * dp * special.erf(arr * _INV_SQRT2), x)


def d_phi_err(x):
    arr = _checked(x)
    p = 0.5 * special.erfc(arr * _INV_SQRT2)
    dp = -_INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return _out(2.0 * p * dp, x)
