"""One test group per acceptance criterion; the terminal summary prints a PASS/FAIL line for each."""

import time
from fractions import Fraction

import numpy as np
import pytest

import test_elim
import test_multipoly
import test_numerics
from cpgrowth.cover import EXTREMAL_3X3, CoverSet, DyadicBox, build_cover, cover_contains, cover_contains_grid
from cpgrowth.datasets import load_poly
from cpgrowth.elim import growth, sylvester_hadamard
from cpgrowth.infeas import (
    VACUOUS_BOUND,
    RankTwoQuery,
    calc_range,
    case_split_bound,
    replay_tree,
    theorem_pipeline,
    verify_leaves,
    worst_p2,
)
from cpgrowth.lowerbound import (
    Report,
    case_4e,
    certify_root_point,
    midpoint_deviation,
    printed_matrix,
    verify_discriminant,
)
from cpgrowth.numerics import TriState
from cpgrowth.search import SearchConfig, extract_pattern, n6_reduced_objective, search_growth
from cpgrowth.unipoly import (
    descartes_sign_changes,
    isolate_real_roots,
    mobius_substitute,
    refine_root,
    root_digits,
)

from oracles import growth3, is_cp
from test_infeas import extremal_boxes

F = Fraction
C = pytest.mark.criterion

# the 200 printed decimals of the P5 root, grouped by ten as printed
PRINTED_ROOT = "4." + "".join(
    """1325170786 3247285422 3346853277 3712699527 9153779908 7694544180 5219674378 3429681764 8258551799 8548302263
    0152515659 8878252716 0955420993 4703653072 2238973129 2506908826 4378769458 9154507591 7179407904 4884836275""".split()
)


# -- 1. P5 root ---------------------------------------------------------------------

C1 = C("1", "P5 root isolation, 200 digits, Descartes/Moebius signs")


@pytest.fixture(scope="module")
def p5_root():
    t = time.perf_counter()
    P5 = load_poly("p5")
    isos = isolate_real_roots(P5, 4, 5)
    digits = root_digits(P5, isos[0], 200)
    enclosure = refine_root(P5, isos[0], 200)
    return P5, isos, digits, enclosure, time.perf_counter() - t


@C1
def test_c1_isolation(p5_root):
    P5, isos, _, _, elapsed = p5_root
    assert len(isos) == 1 and isolate_real_roots(P5, -5, 0) == []
    assert elapsed < 60


@C1
def test_c1_certified_digits(p5_root):
    _, _, digits, enc, _ = p5_root
    assert len(digits) == 202 and enc.width <= F(1, 10**200)
    assert F(digits) <= enc.hi and enc.lo < F(digits) + F(1, 10**200)
    # the printed string agrees with the certified root through decimal 182
    assert digits[:184] == PRINTED_ROOT[:184]


@C1
def test_c1_digits_independent_newton(p5_root):
    """A 260-digit mpmath Newton polish from the printed 30-digit value gives the same 200 decimals."""
    mpmath = pytest.importorskip("mpmath")
    P5, _, digits, _, _ = p5_root
    with mpmath.workdps(260):
        cs = [mpmath.mpf(int(c)) for c in reversed(P5.coeffs)]
        dcs = [mpmath.mpf(int(c) * k) for k, c in reversed(list(enumerate(P5.coeffs)))][:-1]
        x = mpmath.mpf(PRINTED_ROOT[:32])
        for _ in range(12):
            x -= mpmath.polyval(cs, x) / mpmath.polyval(dcs, x)
        text = mpmath.nstr(x, 230, strip_zeros=False)
    assert text[:202] == digits


@C1
@pytest.mark.xfail(strict=True, reason="printed decimals 183-200 disagree with the certified root; see decisions ledger")
def test_c1_printed_200_digits(p5_root):
    assert p5_root[2] == PRINTED_ROOT


@C1
def test_c1_descartes_one_sign_change(p5_root):
    M = mobius_substitute(p5_root[0], 5, 4, 1, 1)
    assert descartes_sign_changes(M) == 1


@C1
@pytest.mark.xfail(strict=True, reason="coefficients are negative through t^8, positive from t^9; see decisions ledger")
def test_c1_negative_through_t9(p5_root):
    cs = mobius_substitute(p5_root[0], 5, 4, 1, 1).coeffs
    assert all(c < 0 for c in cs[:10]) and all(c > 0 for c in cs[10:])


@C1
def test_c1_all_negative_after_minus5(p5_root):
    assert all(c < 0 for c in mobius_substitute(p5_root[0], 0, -5, 1, 1).coeffs)


# -- 2. discriminant identity ----------------------------------------------------

@C("2", "discriminant identity -2^68 (g-6)(g-4)^32 (g-2)^6 (g^2-12g+40) P5")
def test_c2_discriminant_identity():
    t = time.perf_counter()
    rep = Report()
    verify_discriminant(rep)
    assert rep.passed, rep.lines()
    assert -(2**68) == -295147905179352825856
    assert time.perf_counter() - t < 30 * 60


# -- 3. root point -----------------------------------------------------------------

@C("3", "root-point certification and matrix reconstruction")
def test_c3_root_point():
    t = time.perf_counter()
    rp = certify_root_point(digits=45)
    for iv in (rp.x, rp.y, rp.z, rp.g):
        assert iv.width < F(1, 10**40)
    for name, iv in rp.residuals.items():
        assert 0 in iv and iv.width < F(1, 10**30), name
    assert rp.cp is TriState.CERTAINLY_YES
    assert rp.g.subset(rp.growth)
    assert midpoint_deviation(rp.matrix) < F(1, 10**5)
    assert time.perf_counter() - t < 5 * 60


# -- 4. P7, H8, n = 6 ----------------------------------------------------------------

C4 = C("4", "P7 root, growth(H8) = 8, n = 6 reduced objective")


@C4
def test_c4_p7_root():
    P7 = load_poly("p7")
    isos = isolate_real_roots(P7, 3, 16)
    assert len(isos) == 1
    assert root_digits(P7, isos[0], 36) == "6.056953473721059619788033246920631605"


@C4
def test_c4_hadamard_growth():
    assert growth(sylvester_hadamard(8)) == 8


@C4
def test_c4_n6_objective():
    assert n6_reduced_objective(0) == 5
    assert n6_reduced_objective(1) <= 4 and n6_reduced_objective(-1) <= 4


# -- 5. case 4e -------------------------------------------------------------------

@C("5", "Case 4e octic root and g < 4.1325")
def test_c5_case_4e():
    rep = case_4e()
    assert rep.passed, rep.lines()
    O = load_poly("case4e_octic")
    (iso,) = isolate_real_roots(O, -1, 1)
    z = refine_root(O, iso, 14)
    assert z.lo <= F("-0.17852433207456908") <= z.hi
    # the printed value is the 17-decimal truncation of the root
    assert root_digits(O, iso, 17) == "-0.17852433207456908"
    g = 2 * (4 + 3 * z) / (2 + z)
    assert g.hi < F("4.1325")


# -- 6. cover soundness --------------------------------------------------------------

C6 = C("6", "cover S_2.2 at level 3: extremal, sampled and pruned-box soundness")
D = 1 << 12  # sampling grid 2^-12
G22 = F(11, 5)


def _exact_high_growth(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(CP, CP and p3' >= 2.2) for integer matrices M / D with M11 = D, in exact int64 arithmetic.

    With N = D M[1:,1:] - M[1:,:1] M[:1,1:] the Schur complement is N / D^2 and
    p3' = det N / (D^2 N22).
    """
    N = D * M[:, 1:, 1:] - M[:, 1:, :1] * M[:, :1, 1:]
    n22 = N[:, 0, 0]
    cp = (np.abs(M) <= D).all(axis=(1, 2)) & (np.abs(N) <= np.abs(n22)[:, None, None]).all(axis=(1, 2)) & (n22 != 0)
    det = N[:, 0, 0] * N[:, 1, 1] - N[:, 0, 1] * N[:, 1, 0]
    high = cp & (np.abs(det) * G22.denominator >= G22.numerator * D * D * np.abs(n22))
    return cp, high


@pytest.fixture(scope="module")
def s22():
    t = time.perf_counter()
    S = build_cover(G22, 3)
    return S, time.perf_counter() - t


@C6
def test_c6_build_and_extremal(s22):
    S, elapsed = s22
    assert elapsed < 30 * 60
    assert all(cover_contains(S, C) for C in EXTREMAL_3X3)


@C6
def test_c6_rejection_samples_inside(s22):
    S, _ = s22
    rng = np.random.default_rng(6)
    E = np.array([[[int(F(v) * D) for v in row] for row in C] for C in EXTREMAL_3X3], dtype=np.int64)
    kept = []
    total = 0
    while total < 100_000:
        m = 50_000
        w = rng.choice([16, 64, 128, 256], size=(m, 1, 1))
        M = E[rng.integers(0, 3, m)] + np.floor(rng.uniform(-1, 1, (m, 3, 3)) * (w + 1)).astype(np.int64)
        M[:, 0, 0] = D
        M[:, 0, 1:] = np.abs(M[:, 0, 1:])
        M[:, 1:, 0] = np.abs(M[:, 1:, 0])
        M = np.clip(M, -D, D)
        _, high = _exact_high_growth(M)
        kept.append(M[high])
        total += int(high.sum())
    M = np.concatenate(kept)[:100_000]
    # the int64 oracle agrees with rational elimination on a subsample
    for A in M[:: 500]:
        Q = [[F(int(v), D) for v in row] for row in A]
        assert is_cp(Q) and growth3(Q) >= G22
    assert cover_contains_grid(S, M, D).all()


@C6
def test_c6_pruned_boxes_hold_no_high_growth(s22):
    S, _ = s22
    level, h = S.level, D >> S.level
    inside = set(S.boxes)
    rng = np.random.default_rng(66)
    # boxes dropped in the last split are the hardest; add uniform pruned boxes too
    last = [c for c in {tuple(2 * k + d for k, d in zip(b, bits))
                        for b in build_cover(G22, level - 1).boxes
                        for bits in rng.integers(0, 2, (64, 8))} if c not in inside]
    lo_idx = np.array([0, 0, 0, -8, -8, 0, -8, -8])
    uniform = []
    while len(uniform) < 300:
        b = tuple(int(v) for v in rng.integers(lo_idx, 8))
        if b not in inside:
            uniform.append(b)
    pick = [last[i] for i in rng.choice(len(last), 700, replace=False)] + uniform
    assert len(pick) == 1000
    for b in pick:
        box = DyadicBox(level, b)
        M = np.zeros((1000, 3, 3), dtype=np.int64)
        M[:, 0, 0] = D
        for pos, (i, j) in enumerate(((1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3))):
            M[:, i - 1, j - 1] = b[pos] * h + rng.integers(0, h + 1, 1000)
        _, high = _exact_high_growth(M)
        assert not high.any(), f"box {box} holds a point with growth >= 2.2"


# -- 7. infeasibility spot check -------------------------------------------------------

@C("7", "calc_range certifies L > 1 on the 24 extremal level-4 boxes at p3 = 2.15")
def test_c7_extremal_boxes_certified():
    p3 = F(43, 20)
    p2 = worst_p2(p3)
    # p2 encloses 3/2 + sqrt(1/10)
    assert p2.lo > F(3, 2) and (p2.lo - F(3, 2)) ** 2 <= F(1, 10) <= (p2.hi - F(3, 2)) ** 2
    boxes = extremal_boxes(4)
    assert len(boxes) == 24
    for b in boxes:
        box = DyadicBox(4, b)
        r = calc_range(RankTwoQuery(box, p3, p2, budget=10**6))
        assert r.certified and r.lower > 1 and r.leaves <= 10**6
        # independent replay of the recorded leaves
        L, H = replay_tree(r.tree)
        entries = tuple(box.interval(i, j) for i in (1, 2, 3) for j in (1, 2, 3))
        assert verify_leaves(L, H, entries, p3, p2, r.lower, 2).all()


# -- 8. pipeline arithmetic -----------------------------------------------------------

C8 = C("8", "case-split bound max(9/4 g2, g1^2): 4.84, 5.0176, vacuous 81/16")


@C8
def test_c8_bound_arithmetic():
    assert case_split_bound(F("2.2"), F("2.15")) == F("4.84") == max(F(9, 4) * F("2.15"), F("2.2") ** 2)
    assert case_split_bound(F("2.24"), F("2.2")) == F("5.0176")
    assert VACUOUS_BOUND == F(81, 16) == F("5.0625")


@C8
def test_c8_pipeline_bounds():
    boxes = extremal_boxes(4)[:1]
    covers = {g: CoverSet(g, 4, boxes) for g in (F("2.2"), F("2.15"))}
    cert = theorem_pipeline(F("2.2"), F("2.15"), 4, covers=covers)
    assert cert.complete and cert.bound == F("4.84")
    vac = theorem_pipeline(F("2.24"), F("2.2"), 1, budget=1)
    assert not vac.complete and vac.bound == F(81, 16)


# -- 9. search regressions --------------------------------------------------------------

C9 = C("9", "seeded search n = 3, 4, 5 and the n = 5 pattern")


@C9
def test_c9_n3():
    assert search_growth(SearchConfig(3, restarts=100, seed=0)).growth == pytest.approx(2.25, abs=1e-6)


@C9
def test_c9_n4():
    assert search_growth(SearchConfig(4, restarts=100, seed=0)).growth == pytest.approx(4.0, abs=1e-5)


@C9
def test_c9_n5():
    res = search_growth(SearchConfig(5, restarts=200, seed=0))
    print(f"n = 5 seeded regression value: {res.growth!r}")
    assert 4.132 <= res.growth <= 4.1325171 + 1e-6


@C9
def test_c9_pattern():
    p = extract_pattern(printed_matrix(), tol=1e-4)
    assert len(p.fixed) == 14 and p.counts() == {2: 4, 3: 3, 4: 3}


# -- 10. property suites ---------------------------------------------------------------

C10 = C("10", ">= 10^4 containment checks per interval op and for elimination; Buchberger on >= 20 systems")


@C10
@pytest.mark.parametrize("prec", [53, 24, None])
@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_c10_interval_ops(op, prec):
    assert test_numerics.N_PROP >= 10_000
    test_numerics.test_containment_property(op, prec)


@C10
@pytest.mark.parametrize("name", ["add", "sub", "mul", "div", "sqr"])
def test_c10_ivec_ops(name):
    test_numerics.test_ivec_containment(name, np.random.default_rng(10))


@C10
def test_c10_interval_elimination():
    test_elim.test_interval_elimination_encloses_rational()


@C10
def test_c10_buchberger():
    test_multipoly.test_buchberger_random_systems()
