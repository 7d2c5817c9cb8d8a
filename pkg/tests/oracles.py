"""Independent exact-arithmetic oracles for the tests (no package code)."""

from fractions import Fraction
import random


def schur_stages(A):
    """All Schur complements of a rational matrix by plain Gaussian elimination."""
    M = [[Fraction(v) for v in row] for row in A]
    out = [M]
    while len(M) > 1:
        p = M[0][0]
        M = [[M[i][j] - M[i][0] * M[0][j] / p for j in range(1, len(M))] for i in range(1, len(M))]
        out.append(M)
    return out


def pivots(A):
    return [abs(S[0][0]) for S in schur_stages(A)]


def is_cp(A) -> bool:
    for S in schur_stages(A):
        p = abs(S[0][0])
        if any(abs(v) > p for row in S for v in row):
            return False
    return True


def growth3(C) -> Fraction:
    """p3' of a normalized 3x3 matrix (C11 = 1)."""
    return pivots(C)[2]


def det_leibniz(M):
    """Cofactor expansion; fine for the small sizes used in tests."""
    n = len(M)
    if n == 1:
        return Fraction(M[0][0])
    return sum((-1) ** j * Fraction(M[0][j]) * det_leibniz([r[:j] + r[j + 1:] for r in M[1:]]) for j in range(n))


def random_rational(r: random.Random, lo=-1, hi=1, den=64) -> Fraction:
    return Fraction(r.randint(lo * den, hi * den), den)


def poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
