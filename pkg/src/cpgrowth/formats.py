"""Plain-text file formats for matrices and polynomials."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .multipoly import MultiPoly
from .numerics import Interval, format_rational, parse_interval, to_rational
from .unipoly import UniPoly


class FormatError(ValueError):
    pass


def _parse_entry(tok: str):
    if tok.startswith("["):
        return parse_interval(tok, prec=None)
    try:
        return to_rational(tok)
    except (ValueError, ZeroDivisionError) as err:
        raise FormatError(f"bad matrix entry {tok!r}") from err


def parse_matrix(text: str) -> list[list]:
    """First line "n", then n rows of n entries (decimal, "p/q" or "[lo,hi]")."""
    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError as err:
        raise FormatError(f"first line must be the dimension, got {lines[0]!r}") from err
    if n < 1 or len(lines) != n + 1:
        raise FormatError(f"expected {n} rows after the dimension line, got {len(lines) - 1}")
    rows = []
    for l in lines[1:]:
        toks = l.replace(", ", ",").split()
        if len(toks) != n:
            raise FormatError(f"row has {len(toks)} entries, expected {n}: {l!r}")
        rows.append([_parse_entry(t) for t in toks])
    return rows


def format_matrix(A: Sequence[Sequence]) -> str:
    out = [str(len(A))]
    for r in A:
        out.append(" ".join(str(v) if isinstance(v, Interval) else format_rational(v) for v in r))
    return "\n".join(out) + "\n"


def parse_poly(text: str) -> UniPoly:
    """Header "var degree", then one integer (or p/q) coefficient per line, ascending."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines:
        raise FormatError("empty polynomial file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"bad header {lines[0]!r}")
    var, deg = head[0], int(head[1])
    coeffs = [to_rational(c) for c in lines[1:]]
    if len(coeffs) != deg + 1:
        raise FormatError(f"header says degree {deg} but {len(coeffs)} coefficients follow")
    P = UniPoly(coeffs, var)
    if P.degree != deg:
        raise FormatError("leading coefficient is zero")
    return P


def format_poly(P: UniPoly) -> str:
    return "\n".join([f"{P.var} {P.degree}"] + [format_rational(c) for c in P.coeffs]) + "\n"


def parse_mpoly(text: str) -> MultiPoly:
    """Header of variable names, then one term per line "coeff: e1 e2 ... ek"."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines:
        raise FormatError("empty polynomial file")
    vars = tuple(lines[0].split())
    terms: dict[tuple, Fraction] = {}
    for l in lines[1:]:
        if ":" not in l:
            raise FormatError(f"bad term line {l!r}")
        c, e = l.split(":", 1)
        exp = tuple(int(k) for k in e.split())
        if len(exp) != len(vars):
            raise FormatError(f"term {l!r} has {len(exp)} exponents for {len(vars)} variables")
        terms[exp] = terms.get(exp, 0) + to_rational(c)
    return MultiPoly(terms, vars)


def format_mpoly(f: MultiPoly) -> str:
    out = [" ".join(f.vars)]
    for e in sorted(f.terms, reverse=True):
        out.append(f"{format_rational(f.terms[e])}: " + " ".join(map(str, e)))
    return "\n".join(out) + "\n"
