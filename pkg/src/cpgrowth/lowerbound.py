"""The exact n = 5 lower-bound chain and related certified root facts.

The extremal 5x5 matrix has fourteen fixed +-1 entries and ten pivot
equalities in later elimination steps.  Eight of those equalities are solved
by rational substitutions in (x, y, z); the two left over, together with the
growth variable g, give the polynomials p1, p2, p3.  Everything here checks
that chain against the bundled exact data: root isolation, the discriminant
factorization, point ideal membership and the reconstructed matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import elim
from .datasets import load_mpoly, load_poly
from .multipoly import eval_at_interval_point
from .numerics import Interval, TriState, to_rational
from .unipoly import (
    BiPoly,
    UniPoly,
    descartes_sign_changes,
    discriminant_wrt,
    divide_exact,
    isolate_real_roots,
    mobius_substitute,
    refine_root,
    root_digits,
)


class SubstitutionSingular(ZeroDivisionError):
    pass


class RootSelectionError(ValueError):
    pass


# Fixed +-1 entries of the extremal 5x5 matrix, 1-based (i, j) -> sign.
FIXED_ENTRIES: dict[tuple[int, int], int] = {
    (1, 1): 1, (1, 2): 1,
    (2, 4): -1, (2, 5): 1,
    (3, 1): -1, (3, 4): -1, (3, 5): -1,
    (4, 3): 1, (4, 4): 1, (4, 5): 1,
    (5, 2): -1, (5, 3): 1, (5, 4): -1, (5, 5): 1,
}

# Pivot equalities |A^(k)_ij| = p_k, 1-based global (k, i, j) -> sign of A^(k)_ij / A^(k)_kk.
TIGHT_CONSTRAINTS: dict[tuple[int, int, int], int] = {
    (2, 3, 2): 1, (2, 3, 4): -1, (2, 4, 3): 1, (2, 5, 2): -1,
    (3, 3, 5): -1, (3, 4, 3): 1, (3, 5, 4): -1,
    (4, 4, 5): 1, (4, 5, 4): -1, (4, 5, 5): 1,
}

SEEDS = {"x": "-0.617533", "y": "-0.779151", "z": "0.453225", "g": "4.1325"}

PRINTED_MATRIX = (
    ("1.0", "1.0", "0.581691", "-0.453225", "-0.194706"),
    ("-0.617533", "0.835692", "-0.997327", "-1.0", "1.0"),
    ("-1.0", "0.453225", "0.854664", "-1.0", "-1.0"),
    ("-0.779151", "0.635656", "1.0", "1.0", "1.0"),
    ("0.453225", "-1.0", "1.0", "-1.0", "1.0"),
)

PRINTED_GROWTH = "4.13251659953668686"

SUBSTITUTED = ("a22", "a32", "a42", "a13", "a23", "a33", "a14", "a15")
_POSITIONS = {"a22": (2, 2), "a32": (3, 2), "a42": (4, 2), "a13": (1, 3),
              "a23": (2, 3), "a33": (3, 3), "a14": (1, 4), "a15": (1, 5)}


def printed_matrix() -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in r) for r in PRINTED_MATRIX)


def pattern_tight_set(n: int = 5) -> set[tuple[int, int, int]]:
    """Equalities of the pattern as (k, i, j) triples usable by ``is_completely_pivoted``."""
    tight = {(1, i, j) for (i, j) in FIXED_ENTRIES if (i, j) != (1, 1)}
    tight |= set(TIGHT_CONSTRAINTS)
    return tight


def substitution(name: str):
    return load_mpoly(f"subst_{name}_num"), load_mpoly(f"subst_{name}_den")


def reconstruct_matrix(x, y, z, prec: int | None = None) -> tuple[tuple[Interval, ...], ...]:
    """Interval 5x5 matrix with the fixed entries and the substituted a_ij at (x, y, z)."""
    pt = {
        v: (iv if isinstance(iv, Interval) else Interval(iv, prec=None))
        for v, iv in zip("xyz", (x, y, z))
    }
    if prec is not None:
        pt = {v: iv.with_prec(prec) for v, iv in pt.items()}
    A: list[list] = [[None] * 5 for _ in range(5)]
    for (i, j), s in FIXED_ENTRIES.items():
        A[i - 1][j - 1] = Interval(s, prec=None)
    A[1][0], A[3][0], A[4][0] = pt["x"], pt["y"], pt["z"]
    for name in SUBSTITUTED:
        num, den = substitution(name)
        d = eval_at_interval_point(den, pt)
        if d.lo <= 0 <= d.hi:
            raise SubstitutionSingular(f"denominator of {name} may vanish: {d}")
        i, j = _POSITIONS[name]
        A[i - 1][j - 1] = eval_at_interval_point(num, pt) / d
    return tuple(tuple(r) for r in A)


# -- root selection and point certification ------------------------------------


def select_root(P: UniPoly, seed, radius="1/100000", digits: int = 45) -> Interval:
    """Refined enclosure of the only root of P within ``radius`` of ``seed``."""
    s, r = to_rational(seed), to_rational(radius)
    isos = isolate_real_roots(P, s - r, s + r)
    if len(isos) != 1:
        raise RootSelectionError(f"{len(isos)} roots of the {P.var}-polynomial near {seed}")
    return refine_root(P, isos[0], digits)


def p5_root(digits: int = 45) -> Interval:
    P5 = load_poly("p5")
    isos = isolate_real_roots(P5, 4, 5)
    if len(isos) != 1:
        raise RootSelectionError(f"P5 has {len(isos)} roots in (4,5)")
    return refine_root(P5, isos[0], digits)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
               for c in self.checks]
        for k, v in self.values.items():
            out.append(f"{k} = {v}")
        return out


@dataclass
class RootPoint:
    x: Interval
    y: Interval
    z: Interval
    g: Interval
    residuals: dict[str, Interval]
    matrix: tuple
    cp: TriState
    growth: Interval


def certify_root_point(digits: int = 45, prec: int = 256) -> RootPoint:
    """Refine (x, y, z, g), evaluate p1..p3 there and rebuild the extremal matrix."""
    pt = {v: select_root(load_poly(f"{v}61"), SEEDS[v], digits=digits) for v in "xyz"}
    pt["g"] = p5_root(digits)
    residuals = {name: eval_at_interval_point(load_mpoly(name), pt) for name in ("p1", "p2", "p3")}
    A = reconstruct_matrix(pt["x"], pt["y"], pt["z"], prec=prec)
    cp = elim.is_completely_pivoted(A, tight=pattern_tight_set())
    G = elim.growth(A, last_pivot=True, check=False)
    return RootPoint(pt["x"], pt["y"], pt["z"], pt["g"], residuals, A, cp, G)


def midpoint_deviation(A) -> Fraction:
    """max |mid(A_ij) - printed_ij| against the printed 6-digit matrix."""
    P = printed_matrix()
    return max(abs(A[i][j].mid - P[i][j]) for i in range(5) for j in range(5))


# -- verification suites -------------------------------------------------------


def gz_bipoly() -> BiPoly:
    f = load_mpoly("gz")
    iz, ig = f.vars.index("z"), f.vars.index("g")
    return BiPoly.from_terms({(e[iz], e[ig]): c for e, c in f.terms.items()}, "z", "g")


def discriminant_factors() -> tuple[int, list[tuple[UniPoly, int]]]:
    """Expected factorization of Disc_z of the degree-10 factor (unit, [(factor, power)])."""
    g = lambda *c: UniPoly(c, "g")
    return -(2**68), [(g(-6, 1), 1), (g(-4, 1), 32), (g(-2, 1), 6), (g(40, -12, 1), 1), (load_poly("p5"), 1)]


def verify_discriminant(report: Report) -> None:
    D = discriminant_wrt(gz_bipoly())
    unit, factors = discriminant_factors()
    Q = D
    ok = True
    for f, k in factors:
        for _ in range(k):
            try:
                Q = divide_exact(Q, f)
            except ArithmeticError:
                ok = False
                break
    report.add("discriminant: expected factors divide Disc_z exactly", ok)
    report.add("discriminant: cofactor is the constant -2^68", ok and Q == UniPoly([unit], "g"),
               f"cofactor {Q}")
    report.add("discriminant: -2^68 = -295147905179352825856", unit == -295147905179352825856)


def sign_boundary(M: UniPoly) -> int | None:
    """Largest k with coefficients negative on t^0..t^k and positive above (None otherwise)."""
    cs = M.coeffs
    k = 0
    while k < len(cs) and cs[k] < 0:
        k += 1
    if k == 0 or any(c <= 0 for c in cs[k:]):
        return None
    return k - 1


def verify_p5(digits: int = 50, discriminant: bool = True, point: bool = True) -> Report:
    rep = Report()
    P5 = load_poly("p5")
    rep.add("P5 has degree 61", P5.degree == 61)
    isos = isolate_real_roots(P5, 4, 5)
    rep.add("exactly one real root of P5 in (4,5)",
            len(isos) == 1 and P5.sign_at(4) != 0 and P5.sign_at(5) != 0)
    rep.add("no real root of P5 in (-5,0)", not [iv for iv in isolate_real_roots(P5, -5, 0) if iv.hi < 0])
    M = mobius_substitute(P5, 5, 4, 1, 1)
    rep.add("Descartes on P5((5t+4)/(t+1)): one sign change", descartes_sign_changes(M) == 1)
    last_neg = sign_boundary(M)
    rep.add("P5((5t+4)/(t+1)) has a negative head and a positive tail", last_neg is not None)
    rep.values["last negative exponent"] = last_neg
    N = mobius_substitute(P5, 0, -5, 1, 1)
    rep.add("P5(-5/(t+1)) has all-negative coefficients", all(c < 0 for c in N.coeffs))
    if isos:
        rep.values["root"] = root_digits(P5, isos[0], digits)
    if discriminant:
        verify_discriminant(rep)
    if point:
        rp = certify_root_point()
        for name, iv in rp.residuals.items():
            rep.add(f"{name} encloses 0 at the certified point", 0 in iv, f"width {float(iv.width):.1e}")
        rep.add("reconstructed matrix is completely pivoted", rp.cp is TriState.CERTAINLY_YES)
        rep.add("growth enclosure of reconstructed matrix contains the P5 root", rp.g.subset(rp.growth))
        dev = midpoint_deviation(rp.matrix)
        rep.add("reconstructed matrix matches the printed matrix to 5 decimals", dev < Fraction(1, 10**5),
                f"max deviation {float(dev):.1e}")
    return rep


def verify_p7(digits: int = 36) -> Report:
    rep = Report()
    P7 = load_poly("p7")
    pos = isolate_real_roots(P7, 3, 16)
    neg = isolate_real_roots(P7, -16, -3)
    rep.add("exactly one real root of P7 in (3,16)", len(pos) == 1)
    rep.add("no real root of P7 in (-16,-3)", not neg)
    if pos:
        rep.values["root"] = root_digits(P7, pos[0], digits)
    return rep


def case_4e(digits: int = 30) -> Report:
    """The Case 4e octic: its only root in [-1,1] gives g = 2(4+3z)/(2+z) < 4.1325."""
    rep = Report()
    O = load_poly("case4e_octic")
    isos = isolate_real_roots(O, -1, 1)
    rep.add("octic has exactly one root in [-1,1]", len(isos) == 1)
    if isos:
        z = refine_root(O, isos[0], digits)
        g = 2 * (4 + 3 * z) / (2 + z)
        # the printed digits are a truncation: the root lies in their last-digit cell
        cell = Interval("-0.17852433207456909", "-0.17852433207456908", prec=None)
        rep.add("root lies in the truncation cell of -0.17852433207456908", z.subset(cell))
        rep.add("g = 2(4+3z)/(2+z) is provably below 4.1325", g.hi < Fraction("4.1325"),
                f"g <= {float(g.hi):.6f}")
        rep.values["z"] = root_digits(O, isos[0], 20)
        rep.values["g_upper"] = float(g.hi)
    return rep
