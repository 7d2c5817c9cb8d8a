"""Dyadic-box covers of the normalized completely pivoted 3x3 matrices with large growth.

A box fixes C11 = 1 and gives each of the eight other entries a dyadic
interval.  Coordinates follow row-major order without C11:
C12, C13, C21, C22, C23, C31, C32, C33.  First-row and first-column entries
live in [0, 1], the others in [-1, 1].

``build_cover`` bisects from the root box, always splitting the widest
coordinate (lowest index on ties), and discards boxes that ``check_growth``
proves free of matrices with third pivot >= g.  Surviving boxes of side
2^-level form the cover.
"""

from __future__ import annotations

import bisect
import hashlib
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import ivec
from .numerics import _sqrt_bound, float_down, float_up, format_rational, to_rational

FREE = ((1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3))
NONNEG = (0, 1, 2, 5)
_POS = {e: k for k, e in enumerate(FREE)}


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, stats: dict):
        super().__init__(f"{message}; progress: {stats}")
        self.stats = stats


class NotNormalized(ValueError):
    pass


@dataclass(frozen=True, order=True)
class DyadicBox:
    """Entry (i, j) ranges over [k 2^-level, (k+1) 2^-level] for its index k."""

    level: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if len(self.indices) != 8:
            raise ValueError("a box has eight free entries")
        n = 1 << self.level
        for pos, k in enumerate(self.indices):
            lo = 0 if pos in NONNEG else -n
            if not lo <= k <= n - 1:
                raise ValueError(f"index {k} out of range for entry {FREE[pos]}")

    def interval(self, i: int, j: int) -> tuple[Fraction, Fraction]:
        if (i, j) == (1, 1):
            return Fraction(1), Fraction(1)
        k = self.indices[_POS[(i, j)]]
        h = Fraction(1, 1 << self.level)
        return k * h, (k + 1) * h

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.array(self.indices, dtype=np.int64)
        return k, k + 1

    def contains(self, C) -> bool:
        for (i, j) in FREE:
            lo, hi = self.interval(i, j)
            if not lo <= to_rational(C[i - 1][j - 1]) <= hi:
                return False
        return to_rational(C[0][0]) == 1


@dataclass(frozen=True)
class TestConfig:
    """Which pruning tests run; ``t5`` is an optional extra sound test on interval arrays."""

    t1: bool = True
    t2: bool = True
    t3: bool = True
    t4: bool = True
    t5: Callable | None = None

    @property
    def name(self) -> str:
        parts = [f"T{k}" for k, on in ((1, self.t1), (2, self.t2), (3, self.t3), (4, self.t4)) if on]
        if self.t5 is not None:
            parts.append("T5:" + getattr(self.t5, "__name__", "custom"))
        return "+".join(parts) or "none"

    @classmethod
    def parse(cls, text: str) -> TestConfig:
        names = {p.strip().upper() for p in text.split("+") if p.strip()}
        unknown = names - {"T1", "T2", "T3", "T4"}
        if unknown:
            raise ValueError(f"unknown or unavailable tests {sorted(unknown)}")
        return cls("T1" in names, "T2" in names, "T3" in names, "T4" in names)


# -- the pruning tests ------------------------------------------------------------


def _point(q: Fraction, shape) -> tuple[np.ndarray, np.ndarray]:
    return ivec.const(q, shape)


def _s22_range(g: Fraction, tests: TestConfig) -> tuple[float, float] | None:
    """Float enclosure of the values s22 may take for a candidate, or None if unconstrained."""
    lo, hi = -2.0, 2.0
    if tests.t2:
        hi = min(hi, float_up(-g / 2))
    if tests.t4:
        d = 9 - 4 * g
        if d < 0:
            return (1.0, -1.0)
        r = _sqrt_bound(d, 64, True)
        lo = max(lo, float_down(-(3 + r) / 2))
        hi = min(hi, float_up(-(3 - r) / 2))
    return (lo, hi) if (tests.t2 or tests.t4) else None


def _narrow_product(c, t, x, y):
    """Narrow the factors ``c[x]``, ``c[y]`` of a product known to lie in ``t``."""
    for a, b in ((x, y), (y, x)):
        q = ivec.div(t, c[b])
        ok = ~np.isnan(q[0])
        c[a] = (np.where(ok, np.maximum(c[a][0], q[0]), c[a][0]), np.where(ok, np.minimum(c[a][1], q[1]), c[a][1]))


# (entry, factor, factor) for s_ij = c_ij - c_i1 c_1j, in the order s22, s23, s32, s33
_SCHUR = ((3, 2, 0), (4, 2, 1), (6, 5, 0), (7, 5, 1))


def _contract(c: list, srange, cp: bool, passes: int = 2) -> np.ndarray:
    """Shrink the entry intervals in ``c`` (in place) to the part that can hold a candidate.

    Candidates have s22 in ``srange`` and, if ``cp``, |s23|, |s32|, |s33| <= |s22|.
    Returns the mask of boxes proved to hold no candidate.
    """
    empty = np.zeros(c[0][0].shape, dtype=bool)
    if srange is None and not cp:
        return empty
    for _ in range(passes):
        m = None
        for idx, (e, f1, f2) in enumerate(_SCHUR):
            prod = ivec.mul(c[f1], c[f2])
            s = ivec.sub(c[e], prod)
            if idx == 0:
                if srange is not None:
                    s = ivec.intersect(s, (np.full_like(s[0], srange[0]), np.full_like(s[1], srange[1])))
                m = ivec.mag(s)
                if srange is None:
                    continue
            elif cp:
                s = ivec.intersect(s, (-m, m))
            else:
                continue
            empty |= ivec.is_empty(s)
            c[e] = ivec.intersect(c[e], ivec.add(s, prod))
            t = ivec.intersect(prod, ivec.sub(c[e], s))
            empty |= ivec.is_empty(c[e]) | ivec.is_empty(t)
            _narrow_product(c, t, f1, f2)
            empty |= ivec.is_empty(c[f1]) | ivec.is_empty(c[f2])
    return empty


def prune_mask(lo: np.ndarray, hi: np.ndarray, g, tests: TestConfig = TestConfig(), vertex: bool = True) -> np.ndarray:
    """True where a box provably holds no normalized CP matrix with p3' >= g.

    ``lo``/``hi`` are float arrays of shape (N, 8) in the FREE coordinate order.
    Any comparison that cannot be decided keeps the box.  The necessary
    conditions of the enabled tests first contract each box; the tests then
    run on the contracted box, which still holds every candidate.
    ``vertex`` adds the exact multilinear range check to T1.
    """
    g = to_rational(g)
    if g <= 2:
        raise ValueError("check_growth needs g > 2")
    N = lo.shape[0]
    c = [(lo[:, k].copy(), hi[:, k].copy()) for k in range(8)]
    prune = _contract(c, _s22_range(g, tests), tests.t1)
    c = [(np.where(prune, lo[:, k], c[k][0]), np.where(prune, hi[:, k], c[k][1])) for k in range(8)]
    c12, c13, c21, c22, c23, c31, c32, c33 = c
    # one elimination step with pivot C11 = 1
    s22 = ivec.sub(c22, ivec.mul(c21, c12))
    s23 = ivec.sub(c23, ivec.mul(c21, c13))
    s32 = ivec.sub(c32, ivec.mul(c31, c12))
    s33 = ivec.sub(c33, ivec.mul(c31, c13))
    g_lo = float_down(g)
    if tests.t1:
        piv = ivec.mag(s22)
        # complete pivoting at step 2 is certainly violated
        for s in (s23, s32, s33):
            prune |= ivec.mig(s) > piv
        # upper bounds on p3' valid for every CP matrix in the box
        with np.errstate(all="ignore"):
            q = ivec.div(ivec.mul(s32, s23), s22)
            r = ivec.sub(s33, q)
            ub1 = np.where(np.isnan(r[0]), np.inf, ivec.mag(r))
        ub2 = ivec.up(ivec.mag(s33) + np.minimum(ivec.mag(s32), ivec.mag(s23)))
        ub3 = ivec.up(2.0 * piv)
        prune |= np.minimum(np.minimum(ub1, ub2), ub3) < g_lo
        if vertex:
            live = ~prune
            if live.any():
                L = np.stack([v[0] for v in c], axis=1)[live]
                H = np.stack([v[1] for v in c], axis=1)[live]
                prune[live] |= _vertex_test(L, H, g)
    if tests.t2:
        # p2' >= g/2 > 1 forces s22 <= -g/2
        prune |= s22[0] > float_up(-g / 2)
    if tests.t3:
        neg = lambda s: s[0] > 0  # certainly not <= 0
        pos = lambda s: s[1] < 0  # certainly not >= 0
        bad1 = neg(s22) | pos(s23) | neg(s32) | neg(s33)
        bad2 = neg(s22) | neg(s23) | pos(s32) | neg(s33)
        bad3 = neg(s22) | neg(s23) | neg(s32) | pos(s33)
        prune |= bad1 & bad2 & bad3
    if tests.t4:
        # p3' <= 3 p2' - p2'^2 with p2' = |s22|; the parabola peaks at 3/2
        p_lo, p_hi = ivec.mig(s22), ivec.mag(s22)
        best = np.clip(1.5, p_lo, p_hi)
        b = (best, best)
        h = ivec.sub(ivec.mul(_point(Fraction(3), N), b), ivec.sqr(b))
        prune |= h[1] < g_lo
    if tests.t5 is not None:
        prune |= np.asarray(tests.t5(c, (s22, s23, s32, s33), g), dtype=bool)
    return prune


_VERTS = np.array(list(itertools.product((0, 1), repeat=8)), dtype=bool)
_VCHUNK = 1024


def _vertex_test(lo: np.ndarray, hi: np.ndarray, g: Fraction) -> np.ndarray:
    """Exact-range test of p3' >= g, i.e. det C + g s22 >= 0 or det C - g s22 <= 0.

    Both sides are multilinear in the eight free entries, so their ranges
    over a box are attained at its 256 vertices.  (Uses s22 < 0, which any
    matrix with p2' >= g/2 > 1 satisfies.)
    """
    out = np.zeros(len(lo), dtype=bool)
    gi = ivec.const(g, ())
    for s in range(0, len(lo), _VCHUNK):
        L, H = lo[s : s + _VCHUNK], hi[s : s + _VCHUNK]
        V = np.where(_VERTS[None, :, :], H[:, None, :], L[:, None, :])  # (n, 256, 8)
        pt = [(V[..., k], V[..., k]) for k in range(8)]
        c12, c13, c21, c22, c23, c31, c32, c33 = pt
        s22 = ivec.sub(c22, ivec.mul(c21, c12))
        s23 = ivec.sub(c23, ivec.mul(c21, c13))
        s32 = ivec.sub(c32, ivec.mul(c31, c12))
        s33 = ivec.sub(c33, ivec.mul(c31, c13))
        det = ivec.sub(ivec.mul(s22, s33), ivec.mul(s23, s32))
        gs = ivec.mul((np.broadcast_to(gi[0], s22[0].shape), np.broadcast_to(gi[1], s22[0].shape)), s22)
        plus = ivec.add(det, gs)
        minus = ivec.sub(det, gs)
        out[s : s + _VCHUNK] = (plus[1].max(axis=1) < 0) & (minus[0].min(axis=1) > 0)
    return out


def check_growth(B: DyadicBox, g, tests: TestConfig = TestConfig()) -> bool:
    """True only if B provably contains no normalized CP matrix with p3' >= g."""
    k = np.array([B.indices], dtype=np.float64)
    scale = 2.0 ** -B.level
    return bool(prune_mask(k * scale, (k + 1) * scale, g, tests)[0])


# -- cover sets --------------------------------------------------------------------


@dataclass
class CoverSet:
    g: Fraction
    level: int
    boxes: tuple[tuple[int, ...], ...]
    tests: str = "T1+T2+T3+T4"
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.g = to_rational(self.g)
        self.boxes = tuple(sorted(tuple(int(v) for v in b) for b in self.boxes))

    def __len__(self) -> int:
        return len(self.boxes)

    def box(self, idx: int) -> DyadicBox:
        return DyadicBox(self.level, self.boxes[idx])

    def __iter__(self):
        return (DyadicBox(self.level, b) for b in self.boxes)

    def body(self) -> str:
        return "".join(" ".join(map(str, b)) + "\n" for b in self.boxes)

    @property
    def content_hash(self) -> str:
        return hashlib.sha256(self.body().encode()).hexdigest()

    def dumps(self) -> str:
        return f"{self.level} {format_rational(self.g)} {self.tests} {self.content_hash}\n" + self.body()

    @classmethod
    def loads(cls, text: str) -> CoverSet:
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty cover file")
        head = lines[0].split()
        if len(head) != 4:
            raise ValueError(f"bad cover header {lines[0]!r}")
        level, g, tests, digest = int(head[0]), to_rational(head[1]), head[2], head[3]
        boxes = [tuple(int(v) for v in l.split()) for l in lines[1:] if l.strip()]
        S = cls(g, level, boxes, tests)
        if S.content_hash != digest:
            raise ValueError("cover content hash does not match its header")
        return S

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> CoverSet:
        return cls.loads(Path(path).read_text())

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.array(self.boxes, dtype=np.float64).reshape(-1, 8)
        h = 2.0 ** -self.level
        return k * h, (k + 1) * h


def _candidates(v: Fraction, level: int, pos: int) -> list[int]:
    n = 1 << level
    t = v * n
    k = t.numerator // t.denominator
    lo = 0 if pos in NONNEG else -n
    out = [k] if lo <= k <= n - 1 else []
    if t.denominator == 1 and lo <= k - 1 <= n - 1:
        out.append(k - 1)
    return out


def is_normalized(C) -> bool:
    C = [[to_rational(v) for v in r] for r in C]
    if len(C) != 3 or any(len(r) != 3 for r in C) or C[0][0] != 1:
        return False
    if any(abs(v) > 1 for r in C for v in r):
        return False
    return all(C[0][j] >= 0 for j in (1, 2)) and all(C[i][0] >= 0 for i in (1, 2))


def cover_contains(S: CoverSet, C) -> bool:
    """True iff C lies in some (closed) box of S."""
    if not is_normalized(C):
        raise NotNormalized("C must be normalized (C11 = 1, |C| <= 1, first row/column >= 0)")
    cands = [
        _candidates(to_rational(C[i - 1][j - 1]), S.level, pos) for pos, (i, j) in enumerate(FREE)
    ]
    for combo in itertools.product(*cands):
        i = bisect.bisect_left(S.boxes, combo)
        if i < len(S.boxes) and S.boxes[i] == combo:
            return True
    return False


def cover_contains_grid(S: CoverSet, M: np.ndarray, denom: int) -> np.ndarray:
    """Vectorised membership for matrices M/denom given as integer arrays of shape (N, 3, 3)."""
    n = 1 << S.level
    if denom % n:
        raise ValueError("grid denominator must be a multiple of 2^level")
    step = denom // n
    boxes = set(S.boxes)
    free = np.stack([M[:, i - 1, j - 1] for (i, j) in FREE], axis=1)
    k = np.floor_divide(free, step)
    on_edge = (free % step) == 0
    out = np.zeros(len(M), dtype=bool)
    lo_lim = np.array([0 if p in NONNEG else -n for p in range(8)])
    for r in range(len(M)):
        cand = []
        for p in range(8):
            c = [int(k[r, p])] if lo_lim[p] <= k[r, p] <= n - 1 else []
            if on_edge[r, p] and lo_lim[p] <= k[r, p] - 1 <= n - 1:
                c.append(int(k[r, p]) - 1)
            cand.append(c)
        out[r] = any(combo in boxes for combo in itertools.product(*cand))
    return out


def project_cover(S: CoverSet, entries: Sequence[tuple[int, int]]) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Distinct rectangles (x_lo, x_hi, y_lo, y_hi) of the boxes projected onto two entries."""
    (a, b) = entries
    pa, pb = _POS[tuple(a)], _POS[tuple(b)]
    h = Fraction(1, 1 << S.level)
    rects = sorted({(bx[pa], bx[pb]) for bx in S.boxes})
    return [(ka * h, (ka + 1) * h, kb * h, (kb + 1) * h) for ka, kb in rects]


def projection_csv(rects) -> str:
    lines = ["x_lo,x_hi,y_lo,y_hi"]
    lines += [",".join(format(float(v), ".10g") for v in r) for r in rects]
    return "\n".join(lines) + "\n"


# -- branch and bound ---------------------------------------------------------------


def root_bounds(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Root box in units of 2^-level as integer arrays of shape (1, 8)."""
    n = 1 << level
    lo = np.array([[0 if p in NONNEG else -n for p in range(8)]], dtype=np.int64)
    hi = np.full((1, 8), n, dtype=np.int64)
    return lo, hi


def _split(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bisect each box along its widest coordinate (first on ties); children interleaved."""
    w = hi - lo
    k = np.argmax(w, axis=1)
    rows = np.arange(len(lo))
    mid = lo[rows, k] + w[rows, k] // 2
    lo_r, hi_l = lo.copy(), hi.copy()
    hi_l[rows, k] = mid
    lo_r[rows, k] = mid
    new_lo = np.stack([lo, lo_r], axis=1).reshape(-1, 8)
    new_hi = np.stack([hi_l, hi], axis=1).reshape(-1, 8)
    return new_lo, new_hi


_CHUNK = 1 << 15


def _dead(lo: np.ndarray, hi: np.ndarray, scale: float, g, tests: TestConfig) -> np.ndarray:
    """Prune mask for integer boxes; the costly vertex check runs only on boxes of final size."""
    dead = prune_mask(lo * scale, hi * scale, g, tests, vertex=False)
    if tests.t1:
        final = ~dead & ((hi - lo) == 1).all(axis=1)
        if final.any():
            dead[final] = prune_mask(lo[final] * scale, hi[final] * scale, g, tests, vertex=True)
    return dead


def _run_subtree(args) -> tuple[list[tuple[int, ...]], dict]:
    lo, hi, level, g, tests, budget = args
    scale = 2.0 ** -level
    survivors: list[np.ndarray] = []
    stats = {"evaluated": 0, "pruned": 0}
    stack = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        if len(lo) > _CHUNK:
            for s in range(0, len(lo), _CHUNK):
                stack.append((lo[s : s + _CHUNK], hi[s : s + _CHUNK]))
            continue
        stats["evaluated"] += len(lo)
        if budget is not None and stats["evaluated"] > budget:
            raise BudgetExceeded("box evaluation budget exceeded", stats)
        dead = _dead(lo, hi, scale, g, tests)
        stats["pruned"] += int(dead.sum())
        lo, hi = lo[~dead], hi[~dead]
        done = ((hi - lo) == 1).all(axis=1)
        if done.any():
            survivors.append(lo[done])
        lo, hi = lo[~done], hi[~done]
        if len(lo):
            stack.append(_split(lo, hi))
    boxes = [tuple(int(v) for v in r) for arr in survivors for r in arr]
    return boxes, stats


def _frontier(level: int, g, tests, min_tasks: int):
    """Split serially until at least ``min_tasks`` live boxes remain (or the tree ends)."""
    lo, hi = root_bounds(level)
    scale = 2.0 ** -level
    evaluated = pruned = 0
    finals: list[tuple[int, ...]] = []
    while len(lo) and len(lo) < min_tasks:
        evaluated += len(lo)
        dead = _dead(lo, hi, scale, g, tests)
        pruned += int(dead.sum())
        lo, hi = lo[~dead], hi[~dead]
        done = ((hi - lo) == 1).all(axis=1)
        finals += [tuple(int(v) for v in r) for r in lo[done]]
        lo, hi = lo[~done], hi[~done]
        if len(lo):
            lo, hi = _split(lo, hi)
    return lo, hi, finals, {"evaluated": evaluated, "pruned": pruned}


def build_cover(
    g,
    level: int,
    tests: TestConfig = TestConfig(),
    budget: int | None = None,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    tasks: int = 64,
) -> CoverSet:
    """Cover of all normalized CP 3x3 matrices with growth >= g by boxes of side 2^-level.

    The result does not depend on ``workers``; with ``checkpoint`` finished
    subtrees are stored and skipped on a rerun with the same parameters.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    g = to_rational(g)
    lo, hi, finals, stats = _frontier(level, g, tests, tasks)
    key = f"{level} {format_rational(g)} {tests.name} {tasks}"
    done: dict[str, list] = {}
    ck = Path(checkpoint) if checkpoint else None
    if ck and ck.exists():
        state = json.loads(ck.read_text())
        if state.get("key") == key:
            done = state["done"]
    sub_budget = None if budget is None else max(budget - stats["evaluated"], 0)
    jobs = [(str(t), (lo[t : t + 1], hi[t : t + 1], level, g, tests, sub_budget)) for t in range(len(lo)) if str(t) not in done]

    def record(tid, boxes, st):
        done[tid] = [boxes, st]
        if ck:
            tmp = ck.with_suffix(ck.suffix + ".tmp")
            tmp.write_text(json.dumps({"key": key, "done": done}))
            tmp.replace(ck)

    def totals(extra=None):
        total = dict(stats)
        for _, st in done.values():
            for k2, v in st.items():
                total[k2] = total.get(k2, 0) + v
        for k2, v in (extra or {}).items():
            total[k2] = total.get(k2, 0) + v
        total["subtrees_done"] = len(done)
        total["subtrees"] = len(lo)
        return total

    try:
        if workers > 1 and len(jobs) > 1 and tests.t5 is None:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for (tid, _), (boxes, st) in zip(jobs, pool.map(_run_subtree, [a for _, a in jobs])):
                    record(tid, boxes, st)
        else:
            for tid, args in jobs:
                boxes, st = _run_subtree(args)
                record(tid, boxes, st)
    except BudgetExceeded as e:
        raise BudgetExceeded("box evaluation budget exceeded", totals(e.stats)) from None
    total = totals()
    allboxes = list(finals)
    for boxes, _ in done.values():
        allboxes += [tuple(b) for b in boxes]
    if budget is not None and total["evaluated"] > budget:
        raise BudgetExceeded("box evaluation budget exceeded", total)
    total["boxes"] = len(allboxes)
    return CoverSet(g, level, allboxes, tests.name, total)


EXTREMAL_3X3 = (
    ((1, 1, Fraction(1, 2)), (1, Fraction(-1, 2), -1), (Fraction(1, 2), -1, 1)),
    ((1, 1, Fraction(1, 2)), (Fraction(1, 2), -1, 1), (1, Fraction(-1, 2), -1)),
    ((1, Fraction(1, 2), 1), (1, -1, Fraction(-1, 2)), (Fraction(1, 2), 1, -1)),
)
