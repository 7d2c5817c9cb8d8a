"""Multistart local search for completely pivoted matrices with large growth.

The pivot order is fixed to the diagonal (any CP matrix can be permuted so),
A11 = 1 and every entry lies in [-1, 1], first row and column in [0, 1].
With these normalizations the growth of a CP matrix is its largest pivot, and
the search maximizes the last one, p_n^2, subject to the CP inequalities

    (A^(k)_ij)^2 <= (A^(k)_kk)^2       for i, j >= k

enforced by a quadratic penalty whose weight grows stage by stage.  Each
stage is a bound-constrained quasi-Newton run (L-BFGS-B) with an exact
gradient obtained by differentiating the elimination in forward mode.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .elim import is_completely_pivoted, widen
from .numerics import TriState


@dataclass(frozen=True)
class SearchConfig:
    n: int
    restarts: int = 100
    seed: int = 0
    penalties: tuple[float, ...] = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8)
    max_iter: int = 400
    tol: float = 1e-12
    lattice_fraction: float = 0.3
    lattice_noise: float = 0.15
    feasibility_tol: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SearchResult:
    matrix: np.ndarray
    growth: float
    pivots: tuple[float, ...]
    violation: float
    restart: int
    values: list[float] = field(default_factory=list)


# -- objective -----------------------------------------------------------------------


def _free_mask(n: int) -> np.ndarray:
    m = np.ones((n, n), dtype=bool)
    m[0, 0] = False
    return m


def _unpack(z: np.ndarray, n: int) -> np.ndarray:
    A = np.empty((n, n))
    A[0, 0] = 1.0
    A[_free_mask(n)] = z
    return A


def _bounds(n: int) -> list[tuple[float, float]]:
    lo = -np.ones((n, n))
    lo[0, :] = 0.0
    lo[:, 0] = 0.0
    return [(float(l), 1.0) for l in lo[_free_mask(n)]]


def schur_with_gradient(A: np.ndarray):
    """All Schur complements of A with their derivatives w.r.t. the free entries.

    Returns a list of (S, dS) with S of shape (m, m) and dS of shape (m, m, n*n - 1).
    """
    n = len(A)
    V = A.astype(np.float64).copy()
    D = np.zeros((n, n, n * n - 1))
    D[_free_mask(n)] = np.eye(n * n - 1)
    out = [(V, D)]
    for _ in range(n - 1):
        p, dp = V[0, 0], D[0, 0]
        col, dcol = V[1:, 0], D[1:, 0]
        row, drow = V[0, 1:], D[0, 1:]
        S = V[1:, 1:] - np.outer(col, row) / p
        dS = (
            D[1:, 1:]
            - (dcol[:, None, :] * row[None, :, None] + col[:, None, None] * drow[None, :, :]) / p
            + np.outer(col, row)[:, :, None] * dp[None, None, :] / (p * p)
        )
        V, D = S, dS
        out.append((V, D))
    return out


def _objective(z: np.ndarray, n: int, mu: float) -> tuple[float, np.ndarray]:
    A = _unpack(z, n)
    try:
        with np.errstate(all="raise"):
            stages = schur_with_gradient(A)
    except FloatingPointError:
        return 1e6, np.zeros_like(z)
    S, dS = stages[-1]
    f = -S[0, 0] ** 2
    grad = -2 * S[0, 0] * dS[0, 0]
    for S, dS in stages[1:-1]:
        p2 = S[0, 0] ** 2
        viol = S**2 - p2
        viol[0, 0] = 0.0
        act = viol > 0
        if act.any():
            f += mu * float((viol[act] ** 2).sum())
            # d/dz of (S_ij^2 - S_00^2)^2
            dv = 2 * S[:, :, None] * dS - 2 * S[0, 0] * dS[0, 0][None, None, :]
            grad = grad + mu * (2 * viol[act][:, None] * dv[act]).sum(axis=0)
    if not np.isfinite(f) or not np.isfinite(grad).all():
        return 1e6, np.zeros_like(z)
    return float(f), grad


def pivots_and_violation(A: np.ndarray) -> tuple[tuple[float, ...], float]:
    """Signed pivots and the largest CP excess max(|A^(k)_ij| - |A^(k)_kk|, 0)."""
    A = np.asarray(A, dtype=np.float64)
    piv, worst = [], 0.0
    V = A.copy()
    while True:
        p = V[0, 0]
        piv.append(float(p))
        worst = max(worst, float(np.abs(V).max() - abs(p)))
        if len(V) == 1 or p == 0:
            break
        V = V[1:, 1:] - np.outer(V[1:, 0], V[0, 1:]) / p
    return tuple(piv), worst


def _start(rng: np.random.Generator, cfg: SearchConfig) -> np.ndarray:
    n = cfg.n
    if rng.random() < cfg.lattice_fraction:
        A = rng.choice([-1.0, 1.0], size=(n, n)) * (1 - cfg.lattice_noise * rng.random((n, n)))
    else:
        A = rng.uniform(-1, 1, size=(n, n))
    A[0, :] = np.abs(A[0, :])
    A[:, 0] = np.abs(A[:, 0])
    A[0, 0] = 1.0
    return A


def _local(args) -> tuple[np.ndarray, float, float]:
    cfg, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    n = cfg.n
    z = _start(rng, cfg)[_free_mask(n)]
    bounds = _bounds(n)
    for mu in cfg.penalties:
        res = minimize(_objective, z, args=(n, mu), jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": cfg.max_iter, "ftol": cfg.tol, "gtol": 1e-10})
        z = res.x
    A = _unpack(z, n)
    piv, viol = pivots_and_violation(A)
    return A, abs(piv[-1]), max(viol, 0.0)


def search_growth(cfg: SearchConfig) -> SearchResult:
    """Best feasible local optimum over all restarts; deterministic for a given seed.

    A restart counts only if its CP excess is within ``feasibility_tol``.
    Ties in value go to the lexicographically smallest matrix bytes.
    """
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = [(cfg, s) for s in seqs]
    if cfg.workers > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(_local, jobs))
    else:
        runs = [_local(j) for j in jobs]
    best = None
    values = []
    for r, (A, val, viol) in enumerate(runs):
        values.append(val if viol <= cfg.feasibility_tol else float("nan"))
        if viol > cfg.feasibility_tol:
            continue
        key = (val, [-b for b in A.tobytes()])
        if best is None or key > best[0]:
            best = (key, r, A, viol)
    if best is None:
        raise RuntimeError("no restart reached a feasible point; raise the penalties or restarts")
    _, r, A, viol = best
    piv, _ = pivots_and_violation(A)
    return SearchResult(A, max(abs(p) for p in piv), piv, viol, r, values)


def n6_reduced_objective(x: float) -> float:
    """The one-parameter n = 6 problem: maximize |x^2 - 5| over |x| <= 1."""
    return abs(x * x - 5)


# -- active patterns ----------------------------------------------------------------


@dataclass
class ActivePattern:
    """``fixed`` maps 1-based (i, j) to +-1; ``tight[k]`` holds (i, j, sign) with
    |A^(k)_ij| = p_k, where sign is that of A^(k)_ij A^(k)_kk and (i, j) != (k, k)."""

    n: int
    fixed: dict[tuple[int, int], int]
    tight: dict[int, set[tuple[int, int, int]]]
    tol: float

    def counts(self) -> dict[int, int]:
        return {k: len(v) for k, v in sorted(self.tight.items()) if v}

    def as_constraints(self) -> dict[tuple[int, int, int], int]:
        return {(k, i, j): s for k, v in self.tight.items() for (i, j, s) in v}

    def text(self) -> str:
        """Grid of A: +1/-1 for fixed entries, otherwise '*', with step marks k<sign>."""
        lines = []
        for i in range(1, self.n + 1):
            cells = []
            for j in range(1, self.n + 1):
                c = {1: "+1", -1: "-1"}.get(self.fixed.get((i, j)), " *")
                marks = "".join(f"{k}{'+' if s > 0 else '-'}" for k in sorted(self.tight) for (a, b, s) in self.tight[k] if (a, b) == (i, j))
                cells.append(f"{c}{'[' + marks + ']' if marks else ''}".ljust(12))
            lines.append("".join(cells).rstrip())
        lines.append(f"fixed: {len(self.fixed)}  tight per step: {self.counts()}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "tol": self.tol,
                "fixed": [[i, j, s] for (i, j), s in sorted(self.fixed.items())],
                "tight": {str(k): sorted(map(list, v)) for k, v in sorted(self.tight.items())},
            },
            indent=1,
        ) + "\n"


def extract_pattern(A, tol: float = 1e-4) -> ActivePattern:
    """Fixed +-1 entries and near-equalities |A^(k)_ij| >= p_k (1 - tol) for k >= 2."""
    M = np.array([[float(v) for v in row] for row in A], dtype=np.float64)
    n = len(M)
    fixed = {(i + 1, j + 1): int(np.sign(M[i, j])) for i in range(n) for j in range(n) if abs(M[i, j]) >= 1 - tol}
    tight: dict[int, set] = {}
    V = M
    for k in range(1, n + 1):
        p = V[0, 0]
        if k >= 2:
            hits = set()
            for a in range(len(V)):
                for b in range(len(V)):
                    if (a, b) != (0, 0) and abs(V[a, b]) >= abs(p) * (1 - tol):
                        hits.add((a + k, b + k, int(np.sign(V[a, b] * p))))
            tight[k] = hits
        if len(V) == 1 or p == 0:
            break
        V = V[1:, 1:] - np.outer(V[1:, 0], V[0, 1:]) / p
    return ActivePattern(n, fixed, tight, tol)


def is_feasible(A, radius: float = 1e-6) -> bool:
    """The matrix widened by ``radius`` is not certainly violating complete pivoting."""
    W = widen([[Fraction(float(v)) for v in row] for row in np.asarray(A)], Fraction(radius))
    return is_completely_pivoted(W) is not TriState.CERTAINLY_NO
