import numpy as np
import pytest

from cpgrowth.elim import sylvester_hadamard
from cpgrowth.lowerbound import FIXED_ENTRIES, TIGHT_CONSTRAINTS, certify_root_point, printed_matrix
from cpgrowth.search import (
    SearchConfig,
    _free_mask,
    _objective,
    extract_pattern,
    is_feasible,
    n6_reduced_objective,
    pivots_and_violation,
    schur_with_gradient,
    search_growth,
)


def test_config_validation():
    for bad in (dict(n=1), dict(n=3, restarts=0), dict(n=3, tol=0)):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


def test_gradient_matches_finite_differences(rng):
    n = 4
    z = rng.uniform(-1, 1, n * n - 1)
    for mu in (0.0, 1e3):
        f, g = _objective(z, n, mu)
        num = np.zeros_like(z)
        for k in range(len(z)):
            e = np.zeros_like(z)
            e[k] = 1e-6
            num[k] = (_objective(z + e, n, mu)[0] - _objective(z - e, n, mu)[0]) / 2e-6
        assert np.allclose(g, num, rtol=1e-4, atol=1e-4 * max(1.0, np.abs(num).max()))


def test_schur_stages_match_direct(rng):
    A = rng.uniform(-1, 1, (5, 5))
    A[0, 0] = 1.0
    stages = schur_with_gradient(A)
    piv, _ = pivots_and_violation(A)
    assert np.allclose([S[0, 0] for S, _ in stages], piv)
    assert stages[-1][1].shape == (1, 1, 24)


def test_deterministic_and_worker_independent():
    cfg = SearchConfig(3, restarts=6, seed=7)
    a, b = search_growth(cfg), search_growth(cfg)
    c = search_growth(SearchConfig(3, restarts=6, seed=7, workers=2))
    assert a.matrix.tobytes() == b.matrix.tobytes() == c.matrix.tobytes()
    assert a.restart == c.restart and np.array_equal(a.values, c.values, equal_nan=True)


def test_result_is_feasible_and_normalized():
    res = search_growth(SearchConfig(4, restarts=8, seed=1))
    A = res.matrix
    assert A[0, 0] == 1 and (A[0] >= 0).all() and (A[:, 0] >= 0).all() and np.abs(A).max() <= 1
    assert res.violation <= 1e-6 and is_feasible(A)
    assert res.growth == pytest.approx(abs(res.pivots[-1]))


def test_n6_reduced_objective():
    assert n6_reduced_objective(0) == 5
    assert n6_reduced_objective(1) <= 4 and n6_reduced_objective(-1) <= 4
    xs = np.linspace(-1, 1, 2001)
    assert max(n6_reduced_objective(x) for x in xs) == 5


def test_pattern_of_printed_matrix():
    p = extract_pattern(printed_matrix(), tol=1e-4)
    assert p.fixed == FIXED_ENTRIES
    assert p.as_constraints() == TIGHT_CONSTRAINTS
    assert p.counts() == {2: 4, 3: 3, 4: 3}
    text = p.text()
    assert "fixed: 14" in text and "tight per step: {2: 4, 3: 3, 4: 3}" in text
    assert '"fixed"' in p.to_json()


def test_pattern_roundtrip_from_reconstruction():
    rp = certify_root_point(digits=40)
    mid = [[float(v.mid) for v in row] for row in rp.matrix]
    p = extract_pattern(mid, tol=1e-4)
    assert p.fixed == FIXED_ENTRIES and p.as_constraints() == TIGHT_CONSTRAINTS


def test_pattern_hadamard_and_identity():
    p = extract_pattern(sylvester_hadamard(8))
    assert len(p.fixed) == 64
    p = extract_pattern(np.eye(5))
    assert p.fixed == {(i, i): 1 for i in range(1, 6)}
    assert all(i == j for v in p.tight.values() for (i, j, _) in v)
    assert all(v for k, v in p.tight.items() if k < 5)


def test_pattern_reverifies(rng):
    res = search_growth(SearchConfig(4, restarts=4, seed=3))
    p = extract_pattern(res.matrix, tol=1e-4)
    V, k = res.matrix.copy(), 1
    while len(V) > 1:
        V = V[1:, 1:] - np.outer(V[1:, 0], V[0, 1:]) / V[0, 0]
        k += 1
        for (i, j, s) in p.tight.get(k, ()):
            a, piv = V[i - k, j - k], V[0, 0]
            assert abs(a) >= abs(piv) * (1 - 1e-4) and np.sign(a * piv) == s
