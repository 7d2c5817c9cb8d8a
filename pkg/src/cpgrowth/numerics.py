"""Exact rationals and rigorous intervals.

Rationals are :class:`fractions.Fraction`.  An :class:`Interval` stores its
endpoints as exact rationals; when a binary precision ``prec`` is attached,
each endpoint is rounded outward to a ``prec``-bit binary float after every
operation (only when the exact endpoint is not already representable).  With
``prec=None`` the interval is exact-rational and no rounding ever happens.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

DEFAULT_PREC = 53

Number = Union[int, Fraction]


class DivisionByIntervalContainingZero(ZeroDivisionError):
    """Raised when the divisor interval contains zero."""


class Compare(enum.Enum):
    CERTAINLY_LE = "certainly_le"
    CERTAINLY_GT = "certainly_gt"
    UNKNOWN = "unknown"


class TriState(enum.Enum):
    CERTAINLY_YES = "certainly_yes"
    CERTAINLY_NO = "certainly_no"
    UNKNOWN = "unknown"

    def __bool__(self) -> bool:  # pragma: no cover - guard against misuse
        raise TypeError("TriState has no truth value; compare against a member")


def to_rational(value) -> Fraction:
    """Convert ints, Fractions, floats (exactly) and text ("p/q", decimals) to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return to_rational(text)


def round_binary(q: Fraction, prec: int, up: bool) -> Fraction:
    """Round ``q`` to a binary float with ``prec`` significant bits, toward +inf if ``up``."""
    if q == 0:
        return q
    n, d = q.numerator, q.denominator
    a = abs(n)
    e = a.bit_length() - d.bit_length() - prec
    while True:
        if e >= 0:
            m, r = divmod(a, d << e)
        else:
            m, r = divmod(a << -e, d)
        if m >= 1 << prec:
            e += 1
        elif m < 1 << (prec - 1):
            e -= 1
        else:
            break
    if r:
        # magnitude rounding: away from zero when the direction asks for it
        if (n > 0) == up:
            m += 1
    m = m if n > 0 else -m
    return Fraction(m << e) if e >= 0 else Fraction(m, 1 << -e)


def float_down(q: Fraction) -> float:
    """Largest double not above ``q``."""
    f = float(q)
    if Fraction(f) > q:
        f = math.nextafter(f, -math.inf)
    return f


def float_up(q: Fraction) -> float:
    """Smallest double not below ``q``."""
    f = float(q)
    if Fraction(f) < q:
        f = math.nextafter(f, math.inf)
    return f


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _sqrt_bound(q: Fraction, bits: int, up: bool) -> Fraction:
    if q < 0:
        raise ValueError("square root of a negative number")
    scale = 1 << (2 * bits)
    num = q.numerator * scale
    if up:
        s = math.isqrt(-(-num // q.denominator))
        if s * s * q.denominator < num:
            s += 1
    else:
        s = math.isqrt(num // q.denominator)
    return Fraction(s, 1 << bits)


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with exact rational endpoints.

    Every operation returns an enclosure of the exact image.  When ``prec`` is
    an int the endpoints are rounded outward to ``prec`` binary digits.
    """

    lo: Fraction
    hi: Fraction
    prec: int | None = DEFAULT_PREC

    def __init__(self, lo, hi=None, prec: int | None = DEFAULT_PREC):
        lo = to_rational(lo)
        hi = lo if hi is None else to_rational(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        if prec is not None:
            if prec < 2:
                raise ValueError("precision must be at least 2 bits")
            lo = round_binary(lo, prec, up=False)
            hi = round_binary(hi, prec, up=True)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "prec", prec)

    # construction helpers
    @classmethod
    def exact(cls, lo, hi=None) -> Interval:
        return cls(lo, hi, prec=None)

    def _coerce(self, other) -> Interval:
        if isinstance(other, Interval):
            return other
        return Interval(other, prec=None)

    def _make(self, lo, hi, other: Interval | None = None) -> Interval:
        prec = self.prec if other is None else _min_prec(self.prec, other.prec)
        return Interval(lo, hi, prec=prec)

    # arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        return self._make(self.lo + o.lo, self.hi + o.hi, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return self._make(self.lo - o.hi, self.hi - o.lo, o)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Interval(-self.hi, -self.lo, prec=self.prec)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return self._make(min(p), max(p), o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise DivisionByIntervalContainingZero(f"divisor {o} contains 0")
        p = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return self._make(min(p), max(p), o)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        if n == 0:
            return Interval(1, prec=self.prec)
        base = abs(self) if n % 2 == 0 else self
        return Interval(base.lo**n, base.hi**n, prec=self.prec)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi), prec=self.prec)

    def sqrt(self, bits: int | None = None) -> Interval:
        """Enclosure of the square root; ``bits`` fixes the fractional precision
        (defaults to ``prec`` or 128 in exact mode)."""
        if self.lo < 0:
            raise ValueError(f"square root of {self} is not real")
        b = bits or self.prec or 128
        return Interval(_sqrt_bound(self.lo, b, False), _sqrt_bound(self.hi, b, True), prec=self.prec)

    # set operations and queries
    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= to_rational(x) <= self.hi

    def subset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: Interval) -> Interval | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi, prec=None)

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi), prec=_min_prec(self.prec, other.prec))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def mag(self) -> Fraction:
        """max |x| over the interval."""
        return max(-self.lo, self.hi)

    def mig(self) -> Fraction:
        """min |x| over the interval."""
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            return -self.hi
        return Fraction(0)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def with_prec(self, prec: int | None) -> Interval:
        return Interval(self.lo, self.hi, prec=prec)

    def float_bounds(self) -> tuple[float, float]:
        return float_down(self.lo), float_up(self.hi)

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)},{format_rational(self.hi)}]"

    def __repr__(self) -> str:
        return f"Interval('{format_rational(self.lo)}', '{format_rational(self.hi)}', prec={self.prec})"


def parse_interval(text: str, prec: int | None = None) -> Interval:
    """Parse "[lo,hi]"; endpoints may be "p/q", decimals or hex floats."""
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise ValueError(f"not an interval literal: {text!r}")
    lo_s, hi_s = t[1:-1].split(",")
    return Interval(_parse_endpoint(lo_s), _parse_endpoint(hi_s), prec=prec)


def _parse_endpoint(s: str) -> Fraction:
    s = s.strip()
    if "0x" in s.lower():
        return Fraction(float.fromhex(s))
    return to_rational(s)


def iv_mul(a: Interval, b: Interval) -> Interval:
    return a * b


def iv_div(a: Interval, b: Interval) -> Interval:
    return a / b


def _mag(a) -> Fraction:
    return a.mag() if isinstance(a, Interval) else abs(to_rational(a))


def _mig(a) -> Fraction:
    return a.mig() if isinstance(a, Interval) else abs(to_rational(a))


def iv_compare_magnitude(a, b) -> Compare:
    """Decide |a| <= |b| for every choice of points in a and b, if possible."""
    if _mag(a) <= _mig(b):
        return Compare.CERTAINLY_LE
    if _mig(a) > _mag(b):
        return Compare.CERTAINLY_GT
    return Compare.UNKNOWN
