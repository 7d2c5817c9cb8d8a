"""Exact univariate polynomials over Z and Q.

Real roots are isolated by Descartes' rule of signs under Moebius maps
(Vincent-Collins-Akritas bisection) and refined by exact-sign bisection.
Resultants and discriminants of polynomials with polynomial coefficients
come from Bareiss elimination of the Sylvester matrix over Z[g].
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from .numerics import Interval, to_rational


class NotSquarefree(ValueError):
    def __init__(self, gcd: "UniPoly"):
        super().__init__(f"polynomial is not squarefree; gcd(P, P') = {gcd}")
        self.gcd = gcd


class NotDivisible(ArithmeticError):
    def __init__(self, remainder: "UniPoly"):
        super().__init__(f"nonzero remainder {remainder}")
        self.remainder = remainder


class DegenerateMobius(ValueError):
    pass


class LostRoot(ValueError):
    pass


def _trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _norm_coeff(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    if isinstance(v, int):
        return v
    return to_rational(v)


# -- integer polynomial kernels (coefficient lists, ascending) ---------------

_KRONECKER_MIN = 24


def _pack(c: Sequence[int], bits: int) -> int:
    x = 0
    for v in reversed(c):
        x = (x << bits) + v
    return x


def _unpack(x: int, bits: int, n: int) -> list[int]:
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    out = []
    for _ in range(n):
        r = x & mask
        if r >= half:
            r -= 1 << bits
        out.append(r)
        x = (x - r) >> bits
    return out


def _maxbits(c: Sequence[int]) -> int:
    return max((abs(v).bit_length() for v in c), default=0)


def mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of integer coefficient lists (Kronecker substitution when large)."""
    if not a or not b:
        return []
    if min(len(a), len(b)) < _KRONECKER_MIN:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    bits = _maxbits(a) + _maxbits(b) + min(len(a), len(b)).bit_length() + 2
    return _unpack(_pack(a, bits) * _pack(b, bits), bits, len(a) + len(b) - 1)


def _divexact_int(a: list[int], b: list[int]) -> list[int] | None:
    """a / b in Z[x] when exact, else None."""
    a = list(_trim(list(a)))
    b = list(_trim(list(b)))
    if not a:
        return []
    n = len(a) - len(b) + 1
    if n <= 0:
        return None
    if len(b) >= _KRONECKER_MIN and n >= 4:
        norm2 = math.isqrt(sum(v * v for v in a)) + 1
        bits = norm2.bit_length() + n + 3
        A, B = _pack(a, bits), _pack(b, bits)
        q, r = divmod(A, B)
        if r == 0:
            qc = _unpack(q, bits, n)
            if mul_int(qc, b) == a:
                return qc
        # fall through to long division on packing failure
    q = [0] * n
    rem = a[:]
    lb = b[-1]
    for i in range(n - 1, -1, -1):
        c = rem[i + len(b) - 1]
        if c == 0:
            continue
        qi, r = divmod(c, lb)
        if r:
            return None
        q[i] = qi
        for j, bj in enumerate(b):
            rem[i + j] -= qi * bj
    if any(rem):
        return None
    return q


class UniPoly:
    """Univariate polynomial with int/Fraction coefficients in ascending order."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "x"):
        object.__setattr__(self, "coeffs", _trim([_norm_coeff(v) for v in coeffs]))
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @classmethod
    def monomial(cls, degree: int, coeff=1, var: str = "x") -> UniPoly:
        return cls([0] * degree + [coeff], var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "x") -> UniPoly:
        p = cls([1], var)
        for r in roots:
            r = to_rational(r)
            p = p * cls([-r.numerator, r.denominator], var)
        return p

    # basic properties
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integer(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _trim([_norm_coeff(other)])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({list(self.coeffs)!r}, var={self.var!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
            if mono and abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}" + (f"*{mono}" if mono else "")
            parts.append(("-" if c < 0 else "+") + " " + s)
        out = " ".join(parts)
        return out[2:] if out.startswith("+") else "-" + out[2:]

    # arithmetic
    def _wrap(self, c) -> UniPoly:
        return UniPoly(c, self.var)

    def _lift(self, other) -> UniPoly:
        if isinstance(other, UniPoly):
            return other
        return UniPoly([other], self.var)

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        for i, v in enumerate(o.coeffs):
            a[i] += v
        return self._wrap(a)

    __radd__ = __add__

    def __neg__(self):
        return self._wrap([-v for v in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        if self.is_integer() and o.is_integer():
            return self._wrap(mul_int(self.coeffs, o.coeffs))
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return self._wrap([])
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return self._wrap(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = self._wrap([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        """Division with remainder over Q."""
        o = self._lift(other)
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = [Fraction(v) for v in self.coeffs]
        n = len(rem) - len(o.coeffs) + 1
        if n <= 0:
            return self._wrap([]), self
        q = [Fraction(0)] * n
        lb = Fraction(o.lc)
        for i in range(n - 1, -1, -1):
            c = rem[i + o.degree]
            if c:
                qi = c / lb
                q[i] = qi
                for j, bj in enumerate(o.coeffs):
                    rem[i + j] -= qi * bj
        return self._wrap(q), self._wrap(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # evaluation
    def __call__(self, x):
        if isinstance(x, Interval):
            acc = Interval(0, prec=x.prec)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        x = to_rational(x) if not isinstance(x, (int, Fraction)) else x
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x) -> int:
        v = self(to_rational(x))
        return (v > 0) - (v < 0)

    # transformations
    def derivative(self) -> UniPoly:
        return self._wrap([i * c for i, c in enumerate(self.coeffs)][1:])

    def content(self):
        if not self.coeffs:
            return 0
        if self.is_integer():
            g = reduce(math.gcd, self.coeffs)
            return g
        num = reduce(math.gcd, (Fraction(c).numerator for c in self.coeffs))
        den = reduce(math.lcm, (Fraction(c).denominator for c in self.coeffs))
        return Fraction(num, den)

    def primitive(self) -> UniPoly:
        """Integer polynomial with content 1 and positive leading coefficient."""
        if not self.coeffs:
            return self
        c = self.content()
        if self.lc < 0:
            c = -c
        return self._wrap([_norm_coeff(Fraction(v) / c) for v in self.coeffs])

    def monic(self) -> UniPoly:
        lc = Fraction(self.lc)
        return self._wrap([Fraction(v) / lc for v in self.coeffs])

    def taylor_shift(self, a) -> UniPoly:
        """P(x + a)."""
        c = list(self.coeffs)
        n = len(c)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                c[j] += a * c[j + 1]
        return self._wrap(c)

    def scale(self, s) -> UniPoly:
        """P(s x)."""
        out, p = [], 1
        for v in self.coeffs:
            out.append(v * p)
            p *= s
        return self._wrap(out)

    def reverse(self) -> UniPoly:
        """x^deg P(1/x)."""
        return self._wrap(list(reversed(self.coeffs)))

    def with_var(self, var: str) -> UniPoly:
        return UniPoly(self.coeffs, var)


# -- Descartes, Moebius ------------------------------------------------------


def descartes_sign_changes(P: UniPoly) -> int:
    """Sign changes in the nonzero coefficient sequence."""
    signs = [c > 0 for c in P.coeffs if c != 0]
    if not signs:
        raise ValueError("zero polynomial has no sign sequence")
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def mobius_substitute(P: UniPoly, a: int, b: int, c: int, d: int) -> UniPoly:
    """(c t + d)^deg(P) * P((a t + b) / (c t + d))."""
    if a * d - b * c == 0:
        raise DegenerateMobius("a*d - b*c must be nonzero")
    n = P.degree
    if n < 0:
        return P
    num = UniPoly([b, a], P.var)
    den = UniPoly([d, c], P.var)
    num_pows = [UniPoly([1], P.var)]
    den_pows = [UniPoly([1], P.var)]
    for _ in range(n):
        num_pows.append(num_pows[-1] * num)
        den_pows.append(den_pows[-1] * den)
    out = UniPoly([], P.var)
    for i, coef in enumerate(P.coeffs):
        if coef:
            out = out + num_pows[i] * den_pows[n - i] * coef
    return out


# -- gcd and squarefree part ---------------------------------------------------


def gcd(P: UniPoly, Q: UniPoly) -> UniPoly:
    """Primitive gcd over Z[x] (positive leading coefficient) via primitive PRS."""
    a = P.primitive() if P else P
    b = Q.primitive() if Q else Q
    if not a:
        return b
    if not b:
        return a
    if a.degree < b.degree:
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, (r.primitive() if r else r)
    return a.primitive()


def _prem(a: UniPoly, b: UniPoly) -> UniPoly:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) a mod b, kept in Z[x]."""
    r = list(a.coeffs)
    db, lb = b.degree, b.lc
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        r = [v * lb for v in r]
        if c:
            for j, bj in enumerate(b.coeffs):
                r[i - db + j] -= c * bj
        r[i] = 0
    return UniPoly(r[:db] if db > 0 else [], a.var) if db > 0 else UniPoly([], a.var)


def squarefree_part(P: UniPoly) -> UniPoly:
    g = gcd(P, P.derivative())
    if g.degree <= 0:
        return P.primitive()
    return divide_exact(P.primitive(), g).primitive()


def divide_exact(P: UniPoly, Q: UniPoly) -> UniPoly:
    """R with P = Q * R, or :class:`NotDivisible` carrying the remainder."""
    if Q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if P.is_integer() and Q.is_integer():
        q = _divexact_int(list(P.coeffs), list(Q.coeffs))
        if q is not None:
            return UniPoly(q, P.var)
    q, r = divmod(P, Q)
    if r:
        raise NotDivisible(r)
    return q


# -- root isolation ------------------------------------------------------------


def _to_unit_interval(P: UniPoly, a: Fraction, b: Fraction) -> UniPoly:
    """Primitive integer polynomial whose roots in (0, 1) map to roots of P in (a, b)."""
    # P(a + (b - a) t), cleared of denominators
    Q = UniPoly([Fraction(c) for c in P.coeffs], P.var).taylor_shift(a).scale(b - a)
    return Q.primitive()


def _roots_in_01(Q: UniPoly) -> int:
    """Descartes bound for roots in (0, 1): sign changes of (t+1)^d Q(1/(t+1))."""
    T = Q.reverse().taylor_shift(1)
    if T.is_zero():
        return 0
    return descartes_sign_changes(T)


def _halve(Q: UniPoly) -> UniPoly:
    """2^d Q(t / 2)."""
    d = Q.degree
    return UniPoly([c << (d - i) for i, c in enumerate(Q.coeffs)], Q.var)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _endpoint_signs(P: UniPoly, a: Fraction, b: Fraction) -> tuple[int, int]:
    """Signs of P just inside (a, b); uses P' when an endpoint is itself a root."""
    sa, sb = P.sign_at(a), P.sign_at(b)
    dP = P.derivative()
    if sa == 0:
        sa = dP.sign_at(a)
    if sb == 0:
        sb = -dP.sign_at(b)
    return sa, sb


def _shrink_to_sign_change(P: UniPoly, a: Fraction, b: Fraction) -> Interval:
    """Closed sub-interval of (a, b) with non-root endpoints around its single root."""
    sa, sb = _endpoint_signs(P, a, b)
    if sa == 0 or sb == 0 or sa == sb:
        raise LostRoot(f"no sign change of P over ({a}, {b})")
    while P.sign_at(a) == 0 or P.sign_at(b) == 0:
        m = (a + b) / 2
        s = P.sign_at(m)
        if s == 0:
            return Interval(m, m, prec=None)
        if s == sa:
            a = m
        else:
            b = m
    return Interval(a, b, prec=None)


def isolate_real_roots(P: UniPoly, lo, hi, squarefree: str = "divide") -> list[Interval]:
    """Disjoint closed intervals, each holding exactly one real root of P in [lo, hi].

    Every real root in [lo, hi] lies in one of them.  Endpoints of the
    returned intervals are not roots unless the interval is a single point.
    ``squarefree="raise"`` rejects polynomials with repeated factors instead
    of dividing them out.
    """
    lo, hi = to_rational(lo), to_rational(hi)
    if lo > hi:
        raise ValueError("empty range")
    if P.is_zero():
        raise ValueError("zero polynomial has every number as a root")
    P = P.primitive()
    g = gcd(P, P.derivative())
    if g.degree > 0:
        if squarefree == "raise":
            raise NotSquarefree(g)
        P = divide_exact(P, g).primitive()
    out: list[Interval] = []
    for e in {lo, hi}:
        if P.sign_at(e) == 0:
            out.append(Interval(e, e, prec=None))
    if lo == hi or P.degree <= 0:
        return sorted(out, key=lambda iv: iv.lo)
    stack = [(_to_unit_interval(P, lo, hi), lo, hi)]
    while stack:
        Q, a, b = stack.pop()
        v = _roots_in_01(Q)
        if v == 0:
            continue
        m = (a + b) / 2
        if v == 1:
            out.append(_shrink_to_sign_change(P, a, b))
            continue
        if P.sign_at(m) == 0:
            out.append(Interval(m, m, prec=None))
        L = _halve(Q)
        R = L.taylor_shift(1)
        stack.append((R.primitive(), m, b))
        stack.append((L.primitive(), a, m))
    return sorted(out, key=lambda iv: iv.lo)


def count_real_roots(P: UniPoly, lo, hi) -> int:
    """Distinct real roots in [lo, hi]."""
    return len(isolate_real_roots(P, lo, hi))


def refine_root(P: UniPoly, iso: Interval, digits: int) -> Interval:
    """Bisect an isolating interval of a simple root down to width <= 10^-digits."""
    a, b = iso.lo, iso.hi
    if a == b:
        if P.sign_at(a) != 0:
            raise LostRoot(f"{a} is not a root")
        return iso
    sa, sb = _endpoint_signs(P, a, b)
    if sa == 0 or sb == 0 or sa == sb:
        raise LostRoot(f"no sign change of P over [{a}, {b}]")
    tol = Fraction(1, 10**digits)
    while b - a > tol:
        m = (a + b) / 2
        s = P.sign_at(m)
        if s == 0:
            return Interval(m, m, prec=None)
        if s == sa:
            a = m
        else:
            b = m
    return Interval(a, b, prec=None)


def _floor_scaled(q: Fraction, digits: int) -> int:
    return (q.numerator * 10**digits) // q.denominator


def root_digits(P: UniPoly, iso: Interval, digits: int) -> str:
    """Decimal expansion of the root truncated (toward zero) to ``digits`` places."""
    iv = iso
    extra = 5
    while True:
        iv = refine_root(P, iv, digits + extra)
        lo, hi = iv.lo, iv.hi
        neg = hi <= 0
        if neg:
            lo, hi = -hi, -lo
        if lo < 0:
            extra += 5
            continue
        a, b = _floor_scaled(lo, digits), _floor_scaled(hi, digits)
        if a == b and (hi * 10**digits != b or lo == hi):
            s = str(a).rjust(digits + 1, "0")
            text = f"{s[:-digits]}.{s[-digits:]}" if digits else s
            return ("-" if neg else "") + text
        extra += 5


def sturm_count(P: UniPoly, lo, hi) -> int:
    """Distinct roots in (lo, hi] by Sturm's theorem; an independent cross-check."""
    lo, hi = to_rational(lo), to_rational(hi)
    P = squarefree_part(P)
    seq = [P, P.derivative()]
    while seq[-1].degree > 0:
        r = -(seq[-2] % seq[-1])
        if r.is_zero():
            break
        seq.append(r)

    def changes(x):
        s = [_sign(q(x)) for q in seq]
        s = [v for v in s if v]
        return sum(1 for u, w in zip(s, s[1:]) if u != w)

    return changes(lo) - changes(hi)


# -- bivariate polynomials, resultants, discriminants --------------------------


class BiPoly:
    """Polynomial in a main variable whose coefficients are UniPoly in a second variable."""

    __slots__ = ("coeffs", "var", "inner")

    def __init__(self, coeffs: Iterable[UniPoly], var: str = "z", inner: str = "g"):
        cs = [c if isinstance(c, UniPoly) else UniPoly([c], inner) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(c.with_var(inner) for c in cs))
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "inner", inner)

    def __setattr__(self, name, value):
        raise AttributeError("BiPoly is immutable")

    @classmethod
    def from_terms(cls, terms: dict[tuple[int, int], int], var="z", inner="g") -> BiPoly:
        """Build from {(main exponent, inner exponent): coefficient}."""
        dm = max((i for i, _ in terms), default=-1)
        rows = [[0] * (1 + max((j for (i2, j) in terms if i2 == i), default=0)) for i in range(dm + 1)]
        for (i, j), c in terms.items():
            rows[i][j] += c
        return cls([UniPoly(r, inner) for r in rows], var, inner)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> BiPoly:
        return BiPoly([c * i for i, c in enumerate(self.coeffs)][1:], self.var, self.inner)

    def evaluate_inner(self, g) -> UniPoly:
        return UniPoly([c(g) for c in self.coeffs], self.var)

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)


def sylvester_matrix(P: BiPoly, Q: BiPoly) -> list[list[UniPoly]]:
    m, n = P.degree, Q.degree
    size = m + n
    zero = UniPoly([], P.inner)
    rows = []
    pc = list(reversed(P.coeffs))
    qc = list(reversed(Q.coeffs))
    for i in range(n):
        rows.append([zero] * i + pc + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + qc + [zero] * (size - n - 1 - i))
    return rows


def bareiss_det(M: list[list[UniPoly]]) -> UniPoly:
    """Determinant over Z[g] by fraction-free Bareiss elimination (exact divisions only)."""
    a = [row[:] for row in M]
    n = len(a)
    if n == 0:
        return UniPoly([1])
    var = a[0][0].var
    sign = 1
    prev = UniPoly([1], var)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return UniPoly([], var)
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                t = a[i][j] * akk
                if not aik.is_zero() and not a[k][j].is_zero():
                    t = t - aik * a[k][j]
                a[i][j] = divide_exact(t, prev) if prev.degree > 0 or prev.coeffs != (1,) else t
        prev = akk
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


def resultant(P: BiPoly, Q: BiPoly) -> UniPoly:
    """Res_z(P, Q) as a polynomial in the inner variable."""
    if P.degree < 0 or Q.degree < 0:
        return UniPoly([], P.inner)
    if P.degree == 0:
        return P.coeffs[0] ** Q.degree
    if Q.degree == 0:
        return Q.coeffs[0] ** P.degree
    return bareiss_det(sylvester_matrix(P, Q))


def discriminant_wrt(P: BiPoly) -> UniPoly:
    """Disc_z P = (-1)^(d(d-1)/2) Res_z(P, dP/dz) / lc_z(P)."""
    d = P.degree
    if d < 2:
        raise ValueError("discriminant needs degree >= 2 in the main variable")
    R = resultant(P, P.derivative())
    D = divide_exact(R, P.coeffs[-1])
    return -D if (d * (d - 1) // 2) % 2 else D


def discriminant(P: UniPoly) -> int | Fraction:
    """Discriminant of a univariate polynomial (same sign convention)."""
    B = BiPoly([UniPoly([c], "g") for c in P.coeffs], P.var, "g")
    D = discriminant_wrt(B)
    return D.coeffs[0] if D.coeffs else 0
