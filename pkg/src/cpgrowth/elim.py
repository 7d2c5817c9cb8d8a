"""Gaussian elimination without row/column exchanges, pivots and growth.

Matrices are tuples of row tuples whose entries are all :class:`Fraction`
(rational mode) or all :class:`Interval` (interval mode).  Elimination never
permutes; :func:`complete_pivoting` produces a completely pivoted ordering
of arbitrary input for callers that need one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .numerics import Compare, Interval, TriState, iv_compare_magnitude, to_rational

Matrix = tuple[tuple, ...]


class SingularPivot(ZeroDivisionError):
    pass


class PossiblySingularPivot(ZeroDivisionError):
    pass


class NotCompletelyPivoted(ValueError):
    pass


class ZeroMatrix(ValueError):
    pass


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    """Coerce nested sequences to a square matrix in one scalar mode."""
    rows = [list(r) for r in rows]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("matrix must be square and non-empty")
    if any(isinstance(v, Interval) for r in rows for v in r):
        conv = lambda v: v if isinstance(v, Interval) else Interval(v, prec=None)
    else:
        conv = to_rational
    return tuple(tuple(conv(v) for v in r) for r in rows)


def is_interval_matrix(A: Matrix) -> bool:
    return isinstance(A[0][0], Interval)


def _is_zero_possible(p) -> bool:
    if isinstance(p, Interval):
        return p.lo <= 0 <= p.hi
    return p == 0


def schur_step(M: Matrix) -> Matrix:
    """Schur complement of the top-left entry: B - x y^T / alpha."""
    alpha = M[0][0]
    if _is_zero_possible(alpha):
        exc = PossiblySingularPivot if isinstance(alpha, Interval) else SingularPivot
        raise exc(f"pivot {alpha} is (possibly) zero")
    m = len(M)
    return tuple(
        tuple(M[i][j] - M[i][0] * M[0][j] / alpha for j in range(1, m)) for i in range(1, m)
    )


@dataclass(frozen=True)
class EliminationTrace:
    """Schur complements A^(1)..A^(n) and the pivots of one elimination."""

    schur: tuple[Matrix, ...]

    @property
    def n(self) -> int:
        return len(self.schur)

    @property
    def signed_pivots(self) -> tuple:
        return tuple(S[0][0] for S in self.schur)

    @property
    def pivots(self) -> tuple:
        return tuple(abs(p) for p in self.signed_pivots)


def eliminate(A) -> EliminationTrace:
    A = as_matrix(A)
    stages = [A]
    while len(stages[-1]) > 1:
        stages.append(schur_step(stages[-1]))
    # the last 1x1 stage still needs a usable pivot for the trace to be meaningful
    if _is_zero_possible(stages[-1][0][0]):
        exc = PossiblySingularPivot if is_interval_matrix(A) else SingularPivot
        raise exc(f"last pivot {stages[-1][0][0]} is (possibly) zero")
    return EliminationTrace(tuple(stages))


def _compare(a, b) -> Compare:
    if isinstance(a, Interval) or isinstance(b, Interval):
        return iv_compare_magnitude(a, b)
    return Compare.CERTAINLY_LE if abs(a) <= abs(b) else Compare.CERTAINLY_GT


def is_completely_pivoted(A, tight: Iterable[tuple[int, int, int]] | None = None) -> TriState:
    """Check |A^(k)_ij| <= |A^(k)_kk| for every step k.

    ``tight`` lists 1-based global positions (k, i, j) known to hold with
    equality; in interval mode those comparisons only need to be consistent
    (not certainly violated), since an enclosure can never prove equality.
    """
    A = as_matrix(A)
    tight = set(tight or ())
    n = len(A)
    verdict = TriState.CERTAINLY_YES
    M = A
    for k in range(1, n):
        piv = M[0][0]
        for i, row in enumerate(M):
            for j, v in enumerate(row):
                if i == 0 and j == 0:
                    continue
                c = _compare(v, piv)
                if c is Compare.CERTAINLY_GT:
                    return TriState.CERTAINLY_NO
                if c is Compare.UNKNOWN and (k, k + i, k + j) not in tight:
                    verdict = TriState.UNKNOWN
        if _is_zero_possible(piv):
            if isinstance(piv, Interval):
                raise PossiblySingularPivot(f"pivot {k} = {piv} may vanish")
            # exact zero pivot with an all-zero block: nothing further can fail
            return verdict
        M = schur_step(M)
    return verdict


def _max(values):
    if isinstance(values[0], Interval):
        return Interval(max(v.lo for v in values), max(v.hi for v in values), prec=None)
    return max(values)


def growth(A, last_pivot: bool = False, tight=None, check: bool = True):
    """max_k p_k / p_1 (or p_n / p_1 with ``last_pivot``) of a completely pivoted matrix.

    In interval mode the result is an enclosure.  A certain CP violation
    raises :class:`NotCompletelyPivoted`; an undecided check does not.
    """
    A = as_matrix(A)
    if check and is_completely_pivoted(A, tight) is TriState.CERTAINLY_NO:
        raise NotCompletelyPivoted("matrix is not completely pivoted")
    p = eliminate(A).pivots
    if last_pivot:
        return p[-1] / p[0]
    return _max([pk / p[0] for pk in p])


def normalize(A) -> Matrix:
    """Scale so A11 = 1 = ||A||_max and flip signs so the first row and column are >= 0."""
    A = as_matrix(A)
    if is_interval_matrix(A):
        raise TypeError("normalize works on rational matrices")
    m = max(abs(v) for r in A for v in r)
    if m == 0:
        raise ZeroMatrix("cannot normalize the zero matrix")
    a11 = A[0][0]
    if abs(a11) != m:
        raise NotCompletelyPivoted("A11 is not a largest-magnitude entry")
    n = len(A)
    B = [[v / a11 for v in r] for r in A]
    for i in range(1, n):
        if B[i][0] < 0:
            B[i] = [-v for v in B[i]]
    for j in range(1, n):
        if B[0][j] < 0:
            for i in range(n):
                B[i][j] = -B[i][j]
    return as_matrix(B)


def det(M: Sequence[Sequence]) -> Fraction:
    """Exact determinant by Bareiss fraction-free elimination with row swaps."""
    a = [list(map(to_rational, r)) for r in M]
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _minor(A: Matrix, rows, cols) -> Fraction:
    return det([[A[i][j] for j in cols] for i in rows])


def cp_check_determinantal(A) -> bool:
    """-det(A_{1:k,1:k}) <= det(A_{1:k-1+i, 1:k-1+j}) <= det(A_{1:k,1:k}) for all k, i, j.

    Agrees with :func:`is_completely_pivoted` once pivots are made positive
    (see :func:`make_pivots_positive`).
    """
    A = as_matrix(A)
    if is_interval_matrix(A):
        raise TypeError("determinantal check needs a rational matrix")
    n = len(A)
    for k in range(1, n + 1):
        head = list(range(k - 1))
        d = _minor(A, head + [k - 1], head + [k - 1])
        for i in range(k - 1, n):
            for j in range(k - 1, n):
                m = _minor(A, head + [i], head + [j])
                if not -d <= m <= d:
                    return False
    return True


def make_pivots_positive(A) -> Matrix:
    """Negate rows so every pivot is positive; pivot magnitudes are unchanged."""
    A = as_matrix(A)
    signs = [p < 0 for p in eliminate(A).signed_pivots]
    return tuple(tuple(-v for v in r) if s else r for r, s in zip(A, signs))


def complete_pivoting(A) -> tuple[Matrix, list[int], list[int]]:
    """Return (P A Q, row order, column order) so that P A Q is completely pivoted.

    Ties go to the first maximal entry in row-major order.
    """
    A = as_matrix(A)
    if is_interval_matrix(A):
        raise TypeError("complete pivoting needs a rational matrix")
    n = len(A)
    rows, cols = list(range(n)), list(range(n))
    for k in range(n):
        B = tuple(tuple(A[r][c] for c in cols) for r in rows)
        M = B
        for _ in range(k):
            M = schur_step(M)
        best, bi, bj = Fraction(-1), 0, 0
        for i, r in enumerate(M):
            for j, v in enumerate(r):
                if abs(v) > best:
                    best, bi, bj = abs(v), i, j
        if best == 0:
            break
        rows[k], rows[k + bi] = rows[k + bi], rows[k]
        cols[k], cols[k + bj] = cols[k + bj], cols[k]
    PAQ = tuple(tuple(A[r][c] for c in cols) for r in rows)
    return PAQ, rows, cols


def widen(A, radius) -> Matrix:
    """Replace each rational entry q by the exact interval [q - r, q + r]."""
    r = to_rational(radius)
    A = as_matrix(A)
    return tuple(tuple(Interval(v - r, v + r, prec=None) for v in row) for row in A)


def midpoint(A: Matrix) -> Matrix:
    return tuple(tuple(v.mid if isinstance(v, Interval) else v for v in r) for r in A)


def sylvester_hadamard(n: int) -> Matrix:
    """Sylvester's Hadamard matrix of order n (a power of two)."""
    if n < 1 or n & (n - 1):
        raise ValueError("order must be a power of two")
    H = [[1]]
    while len(H) < n:
        H = [r + r for r in H] + [r + [-v for v in r] for r in H]
    return as_matrix(H)
