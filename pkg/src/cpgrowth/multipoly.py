"""Sparse multivariate polynomials over Q and lex Groebner bases.

A :class:`MultiPoly` maps exponent tuples (one entry per named variable) to
nonzero rational coefficients.  Groebner bases come from Buchberger's
algorithm with the coprime and chain criteria, the normal selection
strategy, and hard resource limits.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce as _fold
from typing import Iterable, Mapping, Sequence

from .numerics import Interval, to_rational

Exp = tuple[int, ...]


class ResourceExceeded(RuntimeError):
    def __init__(self, message: str, stats: dict):
        super().__init__(f"{message}; progress: {stats}")
        self.stats = stats


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class MultiPoly:
    """Polynomial in the variables ``vars`` with exact coefficients."""

    __slots__ = ("vars", "terms")

    def __init__(self, terms: Mapping[Exp, object] | None = None, vars: Sequence[str] = ("x",)):
        vs = tuple(vars)
        clean: dict[Exp, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != len(vs):
                raise ValueError(f"exponent {e} does not match variables {vs}")
            c = _norm(c if isinstance(c, (int, Fraction)) else to_rational(c))
            if c:
                clean[e] = _norm(clean.get(e, 0) + c)
                if not clean[e]:
                    del clean[e]
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # constructors
    @classmethod
    def constant(cls, c, vars: Sequence[str]) -> MultiPoly:
        return cls({(0,) * len(vars): c}, vars)

    @classmethod
    def variable(cls, name: str, vars: Sequence[str]) -> MultiPoly:
        vars = tuple(vars)
        e = tuple(1 if v == name else 0 for v in vars)
        if name not in vars:
            raise ValueError(f"unknown variable {name!r}")
        return cls({e: 1}, vars)

    @classmethod
    def parse(cls, text: str, vars: Sequence[str]) -> MultiPoly:
        """Parse expressions such as ``"3/2*x^2*y - y + 1"``."""
        vars = tuple(vars)
        idx = {v: i for i, v in enumerate(vars)}
        s = text.replace(" ", "").replace("**", "^")
        if not s:
            raise ValueError("empty polynomial")
        if s[0] not in "+-":
            s = "+" + s
        pieces = re.findall(r"[+-][^+-]+", s)
        if "".join(pieces) != s:
            raise ValueError(f"cannot parse polynomial {text!r}")
        terms: dict[Exp, Fraction] = {}
        for piece in pieces:
            coeff = Fraction(-1 if piece[0] == "-" else 1)
            exp = [0] * len(vars)
            for factor in piece[1:].split("*"):
                m = re.fullmatch(r"([A-Za-z_]\w*)(?:\^(\d+))?", factor)
                if m:
                    if m.group(1) not in idx:
                        raise ValueError(f"unknown variable {m.group(1)!r}")
                    exp[idx[m.group(1)]] += int(m.group(2) or 1)
                else:
                    try:
                        coeff *= Fraction(factor)
                    except (ValueError, ZeroDivisionError) as err:
                        raise ValueError(f"bad factor {factor!r} in {text!r}") from err
            e = tuple(exp)
            terms[e] = terms.get(e, 0) + coeff
        return cls(terms, vars)

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        i = self.vars.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def involves(self, var: str) -> bool:
        return self.degree_in(var) > 0

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == MultiPoly.constant(other, self.vars)
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MultiPoly({self.format()!r}, vars={self.vars!r})"

    def format(self, order: MonomialOrder | None = None) -> str:
        if not self.terms:
            return "0"
        order = order or MonomialOrder(self.vars)
        parts = []
        for e in sorted(self.terms, key=order.keyfunc(self.vars), reverse=True):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("- " if c < 0 else "+ ") + body)
        out = " ".join(parts)
        return out[2:] if out.startswith("+") else "-" + out[2:]

    __str__ = format

    # arithmetic
    def _lift(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise ValueError("variable lists differ")
            return other
        return MultiPoly.constant(other, self.vars)

    def __add__(self, other):
        o = self._lift(other)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, 0) + c
        return MultiPoly(t, self.vars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({e: -c for e, c in self.terms.items()}, self.vars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        t: dict[Exp, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return MultiPoly(t, self.vars)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = MultiPoly.constant(1, self.vars)
        for _ in range(n):
            out = out * self
        return out

    def mul_term(self, exp: Exp, c) -> MultiPoly:
        return MultiPoly(
            {tuple(a + b for a, b in zip(e, exp)): v * c for e, v in self.terms.items()}, self.vars
        )

    def content(self) -> Fraction:
        cs = [Fraction(c) for c in self.terms.values()]
        if not cs:
            return Fraction(0)
        num = _fold(math.gcd, (c.numerator for c in cs))
        den = _fold(math.lcm, (c.denominator for c in cs))
        return Fraction(num, den)

    def primitive(self, order: MonomialOrder | None = None) -> MultiPoly:
        """Integer coefficients with content 1 and positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if order is not None and self.terms[order.leading(self)] < 0:
            c = -c
        return MultiPoly({e: Fraction(v) / c for e, v in self.terms.items()}, self.vars)

    # evaluation
    def evaluate(self, point: Mapping[str, object]):
        """Exact value at a rational point."""
        vals = [to_rational(point[v]) for v in self.vars]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = Fraction(c)
            for x, k in zip(vals, e):
                if k:
                    term *= x**k
            total += term
        return _norm(total)

    def substitute_order(self, vars: Sequence[str]) -> MultiPoly:
        """Same polynomial over a different variable list (missing variables must not occur)."""
        vars = tuple(vars)
        pos = []
        for v in self.vars:
            pos.append(vars.index(v) if v in vars else None)
        t = {}
        for e, c in self.terms.items():
            ne = [0] * len(vars)
            for i, k in enumerate(e):
                if k:
                    if pos[i] is None:
                        raise ValueError(f"variable {self.vars[i]!r} occurs but is dropped")
                    ne[pos[i]] = k
            t[tuple(ne)] = c
        return MultiPoly(t, vars)


def eval_at_interval_point(f: MultiPoly, point: Mapping[str, Interval | object]) -> Interval:
    """Interval enclosure of f over the box ``point`` (variables not in ``f`` are ignored)."""
    missing = [v for v in f.vars if v not in point and f.involves(v)]
    if missing:
        raise ValueError(f"unbound variables {missing}")
    box = {
        v: (point[v] if isinstance(point[v], Interval) else Interval(point[v], prec=None))
        for v in f.vars
        if v in point
    }
    prec = None
    precs = [iv.prec for iv in box.values() if iv.prec is not None]
    if precs:
        prec = min(precs)
    total = Interval(0, prec=prec)
    powers: dict[tuple[str, int], Interval] = {}
    for e, c in f.terms.items():
        term = Interval(c, prec=prec)
        for v, k in zip(f.vars, e):
            if k:
                key = (v, k)
                if key not in powers:
                    powers[key] = box[v] ** k
                term = term * powers[key]
        total = total + term
    return total


# -- monomial orders ------------------------------------------------------------


@dataclass(frozen=True)
class MonomialOrder:
    """Monomial order over ``priority`` (highest variable first); kind is lex or grevlex."""

    priority: tuple[str, ...]
    kind: str = "lex"

    def __post_init__(self):
        object.__setattr__(self, "priority", tuple(self.priority))
        if self.kind not in ("lex", "grevlex"):
            raise ValueError(f"unknown order kind {self.kind!r}")

    def bind(self, vars: Sequence[str]) -> list[int]:
        vars = tuple(vars)
        if sorted(vars) != sorted(self.priority):
            raise ValueError(f"order {self.priority} does not match variables {vars}")
        return [vars.index(v) for v in self.priority]

    def keyfunc(self, vars: Sequence[str]):
        perm = self.bind(vars)
        if self.kind == "lex":
            return lambda e: tuple(e[i] for i in perm)
        return lambda e: (sum(e),) + tuple(-e[i] for i in reversed(perm))

    def leading(self, f: MultiPoly) -> Exp:
        if not f.terms:
            raise ValueError("zero polynomial has no leading term")
        return max(f.terms, key=self.keyfunc(f.vars))


def _divides(a: Exp, b: Exp) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exp, b: Exp) -> Exp:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub_exp(a: Exp, b: Exp) -> Exp:
    return tuple(x - y for x, y in zip(a, b))


def leading_term(f: MultiPoly, order: MonomialOrder) -> tuple[Exp, object]:
    e = order.leading(f)
    return e, f.terms[e]


# -- reduction -------------------------------------------------------------------


def reduce(f: MultiPoly, G: Sequence[MultiPoly], order: MonomialOrder) -> MultiPoly:
    """Normal form of f modulo G over Q (full reduction of every term)."""
    if not G:
        raise ValueError("G must be nonempty")
    if any(g.is_zero() for g in G):
        raise ValueError("G contains the zero polynomial")
    key = order.keyfunc(f.vars)
    leads = [(order.leading(g), g) for g in G]
    leads = [(e, Fraction(g.terms[e]), g) for e, g in leads]
    p = {e: Fraction(c) for e, c in f.terms.items()}
    rem: dict[Exp, Fraction] = {}
    while p:
        e = max(p, key=key)
        c = p[e]
        for le, lc, g in leads:
            if _divides(le, e):
                shift = _sub_exp(e, le)
                q = c / lc
                for ge, gc in g.terms.items():
                    t = tuple(a + b for a, b in zip(ge, shift))
                    v = p.get(t, 0) - q * gc
                    if v:
                        p[t] = v
                    else:
                        p.pop(t, None)
                break
        else:
            rem[e] = c
            del p[e]
    return MultiPoly(rem, f.vars)


def _reduce_ff(f: dict, leads, key, stats, limits) -> dict:
    """Fraction-free normal form (up to a nonzero integer factor) of integer-coefficient f."""
    p = dict(f)
    rem: dict[Exp, int] = {}
    while p:
        e = max(p, key=key)
        c = p[e]
        for le, lc, g in leads:
            if _divides(le, e):
                shift = _sub_exp(e, le)
                k = math.gcd(c, lc)
                mp, mg = lc // k, c // k
                if mp != 1:
                    p = {t: v * mp for t, v in p.items()}
                    rem = {t: v * mp for t, v in rem.items()}
                for ge, gc in g.items():
                    t = tuple(a + b for a, b in zip(ge, shift))
                    v = p.get(t, 0) - mg * gc
                    if v:
                        p[t] = v
                    else:
                        p.pop(t, None)
                stats["reductions"] += 1
                break
        else:
            rem[e] = c
            del p[e]
        if limits.max_terms and len(p) + len(rem) > limits.max_terms:
            raise ResourceExceeded("term count limit exceeded during reduction", dict(stats))
        limits.check_time(stats)
    return rem


def _primitive_dict(t: dict, key) -> dict:
    if not t:
        return t
    g = _fold(math.gcd, t.values())
    if t[max(t, key=key)] < 0:
        g = -g
    return {e: v // g for e, v in t.items()}


def s_polynomial(f: MultiPoly, g: MultiPoly, order: MonomialOrder) -> MultiPoly:
    ef, cf = leading_term(f, order)
    eg, cg = leading_term(g, order)
    L = _lcm(ef, eg)
    return f.mul_term(_sub_exp(L, ef), Fraction(1) / cf) - g.mul_term(_sub_exp(L, eg), Fraction(1) / cg)


# -- Buchberger ------------------------------------------------------------------


@dataclass
class Limits:
    max_pairs: int | None = 10_000
    max_degree: int | None = None
    max_terms: int | None = 100_000
    max_seconds: float | None = None
    _start: float = field(default_factory=time.monotonic, repr=False)

    def check_time(self, stats):
        if self.max_seconds is not None and time.monotonic() - self._start > self.max_seconds:
            raise ResourceExceeded("time limit exceeded", dict(stats))


def buchberger(
    F: Sequence[MultiPoly], order: MonomialOrder, limits: Limits | None = None, reduced: bool = True
) -> list[MultiPoly]:
    """Groebner basis of <F> for ``order``; ``reduced`` returns the reduced basis."""
    limits = limits or Limits()
    limits._start = time.monotonic()
    F = [f for f in F if not f.is_zero()]
    if not F:
        raise ValueError("F must contain a nonzero polynomial")
    vars = F[0].vars
    key = order.keyfunc(vars)
    stats = {"pairs_processed": 0, "pairs_skipped": 0, "basis_size": 0, "reductions": 0, "max_degree": 0}

    def to_int(f: MultiPoly) -> dict:
        return {e: int(v) for e, v in f.primitive(order).terms.items()}

    G: list[dict] = []
    LM: list[Exp] = []
    pairs: set[tuple[int, int]] = set()

    def add(h: dict):
        G.append(h)
        LM.append(max(h, key=key))
        n = len(G) - 1
        for i in range(n):
            pairs.add((i, n))
        stats["basis_size"] = len(G)
        deg = max(sum(e) for e in h)
        stats["max_degree"] = max(stats["max_degree"], deg)
        if limits.max_degree is not None and deg > limits.max_degree:
            raise ResourceExceeded("degree limit exceeded", dict(stats))

    for f in F:
        add(to_int(f))

    while pairs:
        i, j = min(pairs, key=lambda p: (sum(_lcm(LM[p[0]], LM[p[1]])), key(_lcm(LM[p[0]], LM[p[1]])), p))
        pairs.discard((i, j))
        L = _lcm(LM[i], LM[j])
        # coprime leading monomials: the S-polynomial reduces to zero
        if all(a == 0 or b == 0 for a, b in zip(LM[i], LM[j])):
            stats["pairs_skipped"] += 1
            continue
        # chain criterion: some k with LM_k | lcm whose pairs with i and j are already done
        if any(
            k != i and k != j
            and _divides(LM[k], L)
            and (min(i, k), max(i, k)) not in pairs
            and (min(j, k), max(j, k)) not in pairs
            for k in range(len(G))
        ):
            stats["pairs_skipped"] += 1
            continue
        stats["pairs_processed"] += 1
        if limits.max_pairs is not None and stats["pairs_processed"] > limits.max_pairs:
            raise ResourceExceeded("pair limit exceeded", dict(stats))
        gi, gj = G[i], G[j]
        ci, cj = gi[LM[i]], gj[LM[j]]
        k = math.gcd(ci, cj)
        si, sj = _sub_exp(L, LM[i]), _sub_exp(L, LM[j])
        s: dict[Exp, int] = {}
        for e, v in gi.items():
            t = tuple(a + b for a, b in zip(e, si))
            s[t] = s.get(t, 0) + v * (cj // k)
        for e, v in gj.items():
            t = tuple(a + b for a, b in zip(e, sj))
            s[t] = s.get(t, 0) - v * (ci // k)
        s = {e: v for e, v in s.items() if v}
        leads = [(LM[m], G[m][LM[m]], G[m]) for m in range(len(G))]
        h = _reduce_ff(s, leads, key, stats, limits)
        if h:
            add(_primitive_dict(h, key))
        limits.check_time(stats)

    basis = [MultiPoly(g, vars) for g in G]
    return reduce_basis(basis, order) if reduced else basis


def reduce_basis(G: Sequence[MultiPoly], order: MonomialOrder) -> list[MultiPoly]:
    """Minimal, inter-reduced basis with primitive integer members, sorted by leading monomial."""
    G = [g for g in G if not g.is_zero()]
    key = order.keyfunc(G[0].vars) if G else None
    leads = [order.leading(g) for g in G]
    keep = []
    for i, g in enumerate(G):
        redundant = any(
            j != i and _divides(leads[j], leads[i]) and (leads[j] != leads[i] or j < i)
            for j in range(len(G))
        )
        if not redundant:
            keep.append(g)
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1 :]
        r = reduce(g, others, order) if others else g
        out.append(r.primitive(order))
    return sorted(out, key=lambda g: key(order.leading(g)))


def is_groebner(G: Sequence[MultiPoly], order: MonomialOrder) -> bool:
    """Every S-polynomial of G reduces to zero."""
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if not reduce(s_polynomial(G[i], G[j], order), G, order).is_zero():
                return False
    return True


def eliminate_variable(
    F: Sequence[MultiPoly], var: str, limits: Limits | None = None, rest: Sequence[str] | None = None
) -> list[MultiPoly]:
    """Members of a lex basis (``var`` highest) that do not involve ``var``."""
    vars = F[0].vars
    if var not in vars:
        raise ValueError(f"{var!r} is not a variable of the system")
    rest = tuple(rest) if rest is not None else tuple(v for v in vars if v != var)
    order = MonomialOrder((var,) + rest)
    G = buchberger(F, order, limits)
    return [g for g in G if not g.involves(var)]
