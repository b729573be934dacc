"""Vectorized double-double arithmetic.

A value is a pair ``(hi, lo)`` of float64 arrays with ``|lo| <= ulp(hi)/2``,
giving roughly 32 significant digits (products of numbers below about
1e-150 lose the tail to underflow).  Only what the high-order quotients
need is here: the cancellation in ``f(x + h) - f(x) - sum of Taylor terms``
loses about ``n * log10(1/t)`` digits, which plain float64 can't spare.
"""
from __future__ import annotations

import numpy as np

_SPLIT = 134217729.0  # 2^27 + 1

EPS2 = 2.0 ** -104  # unit roundoff of the format


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def from_float(a):
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


def _guard(plain, x):
    """Infinite results keep the float64 value and a zero tail, never NaN."""
    ok = np.isfinite(plain)
    if np.all(ok):
        return x
    return np.where(ok, x[0], plain), np.where(ok, x[1], 0.0)


def add(x, y):
    with np.errstate(invalid="ignore", over="ignore"):
        return _guard(x[0] + y[0], _add(x, y))


def _add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e = e + t
    s, e = _fast_two_sum(s, e)
    e = e + f
    return _fast_two_sum(s, e)


def neg(x):
    return -x[0], -x[1]


def sub(x, y):
    return add(x, neg(y))


def mul(x, y):
    with np.errstate(invalid="ignore", over="ignore"):
        return _guard(x[0] * y[0], _mul(x, y))


def _mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return _fast_two_sum(p, e)


def div(x, y):
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        return _guard(x[0] / y[0], _div(x, y))


def _div(x, y):
    q1 = x[0] / y[0]
    r = sub(x, mul(y, from_float(q1)))
    q2 = r[0] / y[0]
    r = sub(r, mul(y, from_float(q2)))
    q3 = r[0] / y[0]
    q = _fast_two_sum(q1, q2)
    return add(q, from_float(q3))


def ipow(x, k: int):
    """``x**k`` for an integer ``k`` by repeated squaring."""
    if k < 0:
        return div(from_float(np.ones_like(x[0])), ipow(x, -k))
    out = from_float(np.ones_like(x[0]))
    base = x
    while k:
        if k & 1:
            out = mul(out, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return out


def absolute(x):
    sign = np.where(x[0] < 0, -1.0, 1.0)
    return sign * x[0], sign * x[1]


def to_float(x):
    return x[0] + x[1]
