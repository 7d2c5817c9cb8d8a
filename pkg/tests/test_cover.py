import random
from fractions import Fraction

import pytest

from cpgrowth.cover import (
    EXTREMAL_3X3,
    BudgetExceeded,
    CoverSet,
    DyadicBox,
    NotNormalized,
    TestConfig as Checks,
    build_cover,
    check_growth,
    cover_contains,
    project_cover,
    projection_csv,
)

from oracles import growth3, is_cp, random_rational

F = Fraction
I3 = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


@pytest.fixture(scope="module")
def s22():
    return build_cover(F(11, 5), 3)


@pytest.fixture(scope="module")
def s215():
    return build_cover(F(43, 20), 3)


def _box_of(C, level):
    n = 1 << level
    idx = []
    for (i, j) in ((1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)):
        k = (F(C[i - 1][j - 1]) * n).__floor__()
        idx.append(min(k, n - 1))
    return DyadicBox(level, tuple(idx))


def test_dyadic_box_invariants():
    with pytest.raises(ValueError):
        DyadicBox(0, (0,) * 8)
    with pytest.raises(ValueError):
        DyadicBox(2, (-1, 0, 0, 0, 0, 0, 0, 0))  # first row must be >= 0
    with pytest.raises(ValueError):
        DyadicBox(2, (0, 0, 0, 4, 0, 0, 0, 0))
    B = DyadicBox(2, (3, 0, 1, -4, 0, 2, 0, 3))
    assert B.interval(1, 1) == (1, 1)
    assert B.interval(2, 2) == (-1, F(-3, 4))


def test_check_growth_keeps_extremal_boxes():
    for C in EXTREMAL_3X3:
        for level in (2, 4, 6):
            assert check_growth(_box_of(C, level), F(11, 5)) is False


def test_check_growth_t2_alone():
    # C22 in [15/16, 1], C21 C12 in [0, 1/16]: the second pivot stays below 1.1
    B = DyadicBox(4, (15, 0, 0, 15, 0, 0, 0, 0))
    only_t2 = Checks(t1=False, t2=True, t3=False, t4=False)
    assert check_growth(B, F(11, 5), only_t2) is True
    assert check_growth(B, F(11, 5), Checks(False, False, False, False)) is False


def test_check_growth_prunes_low_growth_points():
    r = random.Random(1)
    done = 0
    while done < 50:
        C = [[random_rational(r, -1, 1, 64) for _ in range(3)] for _ in range(3)]
        C[0][0] = F(1)
        for k in (1, 2):
            C[0][k], C[k][0] = abs(C[0][k]), abs(C[k][0])
        try:
            if not is_cp(C) or growth3(C) > F(17, 10):
                continue
        except ZeroDivisionError:
            continue
        assert check_growth(_box_of(C, 10), F(11, 5)) is True
        done += 1


def test_cover_io_roundtrip(s22, tmp_path):
    text = s22.dumps()
    T = CoverSet.loads(text)
    assert T.boxes == s22.boxes and T.dumps() == text
    s22.save(tmp_path / "s.cover")
    assert CoverSet.load(tmp_path / "s.cover").content_hash == s22.content_hash
    head, first, rest = text.split("\n", 2)
    bad = first.split()
    bad[0] = str(int(bad[0]) ^ 1)
    with pytest.raises(ValueError):
        CoverSet.loads("\n".join([head, " ".join(bad), rest]))


def test_contains_extremal_not_identity(s22):
    for C in EXTREMAL_3X3:
        assert cover_contains(s22, C)
    assert not cover_contains(s22, I3)
    with pytest.raises(NotNormalized):
        cover_contains(s22, ((2, 0, 0), (0, 1, 0), (0, 0, 1)))


def test_boundary_points_are_contained(s22):
    r = random.Random(2)
    for idx in r.sample(range(len(s22)), 50):
        B = s22.box(idx)
        for corner in (0, 1):
            C = [[F(1) if (i, j) == (1, 1) else B.interval(i, j)[corner] for j in (1, 2, 3)] for i in (1, 2, 3)]
            assert cover_contains(s22, C)


def test_projection_near_extremal(s22):
    rects = project_cover(s22, ((2, 1), (1, 2)))
    assert len(set(rects)) == len(rects)
    for x, y in ((1, 1), (F(1, 2), 1), (1, F(1, 2))):
        assert any(a <= x <= b and c <= y <= d for a, b, c, d in rects)
    one = CoverSet(s22.g, s22.level, s22.boxes[:1])
    assert len(project_cover(one, ((2, 1), (1, 2)))) == 1
    assert projection_csv(rects).startswith("x_lo,x_hi,y_lo,y_hi\n")


def test_monotone_in_threshold(s22, s215):
    assert set(s22.boxes) <= set(s215.boxes)
    big = set(project_cover(s215, ((2, 2), (3, 3))))
    assert set(project_cover(s22, ((2, 2), (3, 3)))) <= big


def test_refinement_nested(s22):
    coarse = set(build_cover(F(11, 5), 2).boxes)
    for b in s22.boxes:
        assert tuple(k >> 1 for k in b) in coarse


def test_deterministic_across_workers():
    a = build_cover(F(11, 5), 3, workers=1)
    b = build_cover(F(11, 5), 3, workers=2)
    assert a.dumps() == b.dumps()


def test_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck.json"
    a = build_cover(F(43, 20), 2, checkpoint=ck)
    assert ck.exists()
    assert build_cover(F(43, 20), 2, checkpoint=ck).dumps() == a.dumps()


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded) as e:
        build_cover(F(11, 5), 3, budget=100)
    assert e.value.stats["evaluated"] > 100


def test_above_max_growth_is_empty():
    # growth of a 3x3 CP matrix is at most 9/4; the extremal boxes still survive at 9/4
    S = build_cover(F(9, 4), 3)
    assert all(cover_contains(S, C) for C in EXTREMAL_3X3)
    assert len(build_cover(F(23, 10), 3)) == 0
