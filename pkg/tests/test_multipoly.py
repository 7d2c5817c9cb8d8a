import random
from fractions import Fraction

import pytest
import sympy

from cpgrowth.datasets import load_mpoly
from cpgrowth.lowerbound import certify_root_point
from cpgrowth.multipoly import (
    Limits,
    MonomialOrder,
    MultiPoly,
    ResourceExceeded,
    buchberger,
    eliminate_variable,
    eval_at_interval_point,
    is_groebner,
    reduce,
    s_polynomial,
)
from cpgrowth.numerics import Interval

V = ("x", "y", "z")
LEX = MonomialOrder(V)


def P(text, vars=V):
    return MultiPoly.parse(text, vars)


def _random_poly(r: random.Random, vars=V, terms=3, deg=2):
    out = MultiPoly.constant(0, vars)
    for _ in range(terms):
        e = tuple(r.randint(0, deg) for _ in vars)
        out = out + MultiPoly({e: r.randint(-5, 5)}, vars)
    return out


def _monic(f: MultiPoly, order: MonomialOrder) -> MultiPoly:
    lc = f.terms[order.leading(f)]
    return MultiPoly({e: Fraction(c) / lc for e, c in f.terms.items()}, f.vars)


def test_reduce_examples():
    assert reduce(P("x^2*y"), [P("x^2 - 1")], LEX) == P("y")
    G = [P("x^2 - y"), P("y*z + 1")]
    for g in G:
        assert reduce(g, G, LEX).is_zero()


def test_reduce_construct_then_reduce():
    r = random.Random(1)
    G = buchberger([P("x^2 - y*z"), P("y^2 - z - 1")], LEX)
    leads = [LEX.leading(g) for g in G]
    for _ in range(100):
        rem = _random_poly(r)
        rem = reduce(rem, G, LEX)  # a remainder is already reduced
        assert all(not all(a >= b for a, b in zip(e, l)) for e in rem.terms for l in leads)
        f = rem + sum((_random_poly(r) * g for g in G), MultiPoly.constant(0, V))
        assert reduce(f, G, LEX) == rem


def test_buchberger_examples():
    order = MonomialOrder(("x", "y"))
    G = buchberger([P("x^2 - y", ("x", "y")), P("y - 1", ("x", "y"))], order)
    assert set(G) == {P("y - 1", ("x", "y")), P("x^2 - 1", ("x", "y"))}
    G = buchberger([P("x", ("x", "y")), P("y", ("x", "y"))], order)
    assert set(G) == {P("x", ("x", "y")), P("y", ("x", "y"))}


def test_buchberger_random_systems():
    r = random.Random(2)
    x, y, z = sympy.symbols("x y z")
    done = 0
    while done < 25:
        F = [_random_poly(r, terms=r.randint(2, 3), deg=2) for _ in range(r.randint(2, 3))]
        F = [f for f in F if not f.is_zero()]
        if len(F) < 2:
            continue
        try:
            G = buchberger(F, LEX, Limits(max_pairs=400, max_seconds=20))
        except ResourceExceeded:
            continue
        assert is_groebner(G, LEX)
        for f in F:
            assert reduce(f, G, LEX).is_zero()
        ours = {_monic(g, LEX) for g in G}
        ref = sympy.groebner([sympy.sympify(f.format().replace("^", "**")) for f in F], x, y, z, order="lex")
        theirs = {
            _monic(MultiPoly({e: Fraction(int(c.p), int(c.q)) for e, c in sympy.Poly(g, x, y, z).terms()}, V), LEX)
            for g in ref.exprs
        }
        assert ours == theirs
        done += 1


def test_s_polynomial_cancels_leads():
    f, g = P("x^2*y - 1"), P("x*y^2 - x")
    s = s_polynomial(f, g, LEX)
    assert s.is_zero() or LEX.keyfunc(V)(LEX.leading(s)) < LEX.keyfunc(V)((2, 2, 0))


def test_eliminate_examples():
    out = eliminate_variable([P("x - y^2", ("y", "x")), P("y - 1", ("y", "x"))], "y")
    assert P("x - 1", ("y", "x")) in out
    out = eliminate_variable([P("x^2 + y^2", ("y", "x")), P("x^2 - y^2", ("y", "x"))], "y")
    assert P("x^2", ("y", "x")) in out


def test_limits_raise_with_stats():
    F = [load_mpoly(n) for n in ("p1", "p2", "p3")]
    with pytest.raises(ResourceExceeded) as e:
        buchberger(F, MonomialOrder(("y", "x", "z", "g")), Limits(max_pairs=3, max_seconds=30))
    assert "pairs_processed" in e.value.stats


def test_eval_trivial():
    pt = {"x": Interval(Fraction(1, 3), 2), "y": Interval(-1, Fraction(1, 7)), "z": Interval(0)}
    iv = eval_at_interval_point(MultiPoly.constant(7, V), pt)
    assert (iv.lo, iv.hi) == (7, 7)
    iv = eval_at_interval_point(P("x*y") - P("y*x"), pt)
    assert (iv.lo, iv.hi) == (0, 0)


def test_eval_containment():
    r = random.Random(3)
    for _ in range(500):
        f = _random_poly(r, terms=4, deg=3)
        box, point = {}, {}
        for v in V:
            a = Fraction(r.randint(-20, 20), 8)
            b = a + Fraction(r.randint(0, 16), 8)
            box[v] = Interval(a, b, prec=53)
            point[v] = a + (b - a) * Fraction(r.randint(0, 10), 10)
        assert f.evaluate(point) in eval_at_interval_point(f, box)


def test_p_system_vanishes_at_certified_point():
    rp = certify_root_point(digits=40)
    for name, iv in rp.residuals.items():
        assert 0 in iv and iv.width < Fraction(1, 10**30), name
