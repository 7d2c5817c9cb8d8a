"""Vectorised double-precision interval arithmetic on numpy arrays.

An interval array is a pair ``(lo, hi)`` of float64 arrays of equal shape.
Every operation rounds in the default (nearest) mode and then moves each
endpoint one ulp outward, which encloses the exact result for + - * /.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .numerics import float_down, float_up

_NEG = -np.inf
_POS = np.inf


def down(a):
    return np.nextafter(a, _NEG)


def up(a):
    return np.nextafter(a, _POS)


def const(q, shape=()) -> tuple[np.ndarray, np.ndarray]:
    """Tight enclosure of the rational ``q`` broadcast to ``shape``."""
    q = Fraction(q)
    return np.full(shape, float_down(q)), np.full(shape, float_up(q))


def add(a, b):
    return down(a[0] + b[0]), up(a[1] + b[1])


def sub(a, b):
    return down(a[0] - b[1]), up(a[1] - b[0])


def neg(a):
    return -a[1], -a[0]


def mul(a, b):
    p1 = a[0] * b[0]
    p2 = a[0] * b[1]
    p3 = a[1] * b[0]
    p4 = a[1] * b[1]
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return down(lo), up(hi)


def contains_zero(a):
    return (a[0] <= 0) & (a[1] >= 0)


def div(a, b):
    """Quotient; entries where ``b`` contains zero come back as NaN."""
    bad = contains_zero(b)
    with np.errstate(all="ignore"):
        q1 = a[0] / b[0]
        q2 = a[0] / b[1]
        q3 = a[1] / b[0]
        q4 = a[1] / b[1]
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    lo = np.where(bad, np.nan, down(lo))
    hi = np.where(bad, np.nan, up(hi))
    return lo, hi


def mag(a):
    return np.maximum(-a[0], a[1])


def mig(a):
    return np.where(a[0] > 0, a[0], np.where(a[1] < 0, -a[1], 0.0))


def absval(a):
    lo = mig(a)
    return lo, mag(a)


def sqr(a):
    m = absval(a)
    return down(m[0] * m[0]), up(m[1] * m[1])


def intersect(a, b):
    """Intersection; ``lo > hi`` marks an empty result."""
    return np.maximum(a[0], b[0]), np.minimum(a[1], b[1])


def is_empty(a):
    return a[0] > a[1]
