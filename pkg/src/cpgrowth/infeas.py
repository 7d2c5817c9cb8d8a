"""Certified infeasibility of the rank-two approximation inequality over cover boxes.

For a 3x3 box B of matrices and parameters p3, p2 the question is whether

    min  || p3 C - u v^T - p2 x y^T ||_max       (C in B; u, v, x, y in [-1, 1]^3)

exceeds 1.  ``calc_range`` answers it by branch and bound over the twelve
coordinates of (u, v, x, y).  Each node is a dyadic box; interval constraint
propagation on the nine entries either proves that no point of the node has
residual <= tau (the node becomes a leaf) or the node is bisected along its
widest coordinate.  When every leaf is proved empty the minimum exceeds tau,
so L = tau > 1 is returned.  The split/leaf decisions, one bit per node in
breadth-first order, make up a certificate that ``verify_certificate`` replays
without searching.

Flipping the signs of (u, v) or of (x, y) leaves the residual unchanged, so
u1 and x1 are restricted to [0, 1].
"""

from __future__ import annotations

import base64
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, ivec
from .cover import BudgetExceeded, CoverSet, DyadicBox, TestConfig, build_cover
from .numerics import Interval, format_rational, to_rational

TAU = 1 + Fraction(1, 1 << 20)
PASSES = 2
VACUOUS_BOUND = Fraction(81, 16)

# u, v, x, y occupy columns 0-2, 3-5, 6-8, 9-11
_ROOT_LO = np.array([0, -1, -1, -1, -1, -1, 0, -1, -1, -1, -1, -1], dtype=np.float64)
_ROOT_HI = np.ones(12)


class PartialCertificate(RuntimeError):
    def __init__(self, certificate: UpperBoundCertificate):
        super().__init__(f"certificate is partial; bound falls back to {certificate.bound}")
        self.certificate = certificate


class Verdict(Enum):
    CERTIFIED = "certified"
    UNKNOWN = "unknown"


def p2_bracket(p3, bits: int = 128) -> tuple[Interval, Interval]:
    """Enclosures of 3/2 - sqrt(9/4 - p3) and 3/2 + sqrt(9/4 - p3)."""
    p3 = to_rational(p3)
    if p3 > Fraction(9, 4):
        raise ValueError("p3 must be <= 9/4")
    r = Interval.exact(Fraction(9, 4) - p3).sqrt(bits)
    half = Interval.exact(Fraction(3, 2))
    return half - r, half + r


def worst_p2(p3, bits: int = 128) -> Interval:
    """The largest admissible p2; larger p2 only eases feasibility."""
    return p2_bracket(p3, bits)[1]


def _entries_of(box) -> tuple[tuple[Fraction, Fraction], ...]:
    if isinstance(box, DyadicBox):
        return tuple(box.interval(i, j) for i in (1, 2, 3) for j in (1, 2, 3))
    ent = tuple((to_rational(a), to_rational(b)) for a, b in box)
    if len(ent) != 9 or any(a > b for a, b in ent):
        raise ValueError("a matrix box needs nine (lo, hi) pairs in row-major order")
    return ent


def matrix_box(C_lo, C_hi=None) -> tuple[tuple[Fraction, Fraction], ...]:
    """Row-major entry bounds from two 3x3 matrices (or one, for a point box)."""
    C_hi = C_lo if C_hi is None else C_hi
    return tuple((to_rational(C_lo[i][j]), to_rational(C_hi[i][j])) for i in range(3) for j in range(3))


@dataclass(frozen=True)
class RankTwoQuery:
    """``box`` is a DyadicBox or nine (lo, hi) entry bounds; ``budget`` caps the leaves.

    ``p2`` must meet the bracket 3/2 -+ sqrt(9/4 - p3) unless ``check_p2`` is off
    (for probing the residual outside the admissible parameter range).
    """

    box: object
    p3: Fraction
    p2: Interval
    budget: int = 10**6
    check_p2: bool = True

    def __post_init__(self):
        object.__setattr__(self, "p3", to_rational(self.p3))
        p2 = self.p2 if isinstance(self.p2, Interval) else Interval.exact(to_rational(self.p2))
        object.__setattr__(self, "p2", p2)
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.check_p2:
            lo, hi = p2_bracket(self.p3)
            if p2.hi < lo.lo or p2.lo > hi.hi:
                raise ValueError(f"p2 {p2} is outside the admissible bracket [{lo.lo}, {hi.hi}] for p3 = {self.p3}")
        _entries_of(self.box)

    def entries(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return _entries_of(self.box)


@dataclass
class RangeResult:
    lower: Fraction
    certified: bool
    leaves: int
    nodes: int
    tree: bytes = b""
    witness: dict | None = None

    @property
    def verdict(self) -> Verdict:
        return Verdict.CERTIFIED if self.certified else Verdict.UNKNOWN


# -- node contraction -----------------------------------------------------------


def _targets(entries, p3: Fraction, tau: Fraction):
    """Float enclosures of [p3 C_k - tau, p3 C_k + tau] for the nine entries."""
    p3i = ivec.const(p3)
    ti = ivec.const(tau)
    out = []
    for a, b in entries:
        c = (ivec.const(a)[0], ivec.const(b)[1])
        pc = ivec.mul(p3i, c)
        out.append((ivec.sub(pc, ti)[0], ivec.add(pc, ti)[1]))
    return out


def _narrow(lo, hi, num, den: int, col: int):
    q = ivec.div(num, (lo[:, den], hi[:, den]))
    ok = ~np.isnan(q[0])
    lo[:, col] = np.where(ok, np.maximum(lo[:, col], q[0]), lo[:, col])
    hi[:, col] = np.where(ok, np.minimum(hi[:, col], q[1]), hi[:, col])


def _empty_nodes(lo: np.ndarray, hi: np.ndarray, T, p2i, passes: int) -> np.ndarray:
    """Mask of nodes proved to hold no point with every entry of u v^T + p2 x y^T in T."""
    lo, hi = lo.copy(), hi.copy()
    dead = np.zeros(len(lo), dtype=bool)
    for _ in range(passes):
        for i in range(3):
            for j in range(3):
                u, v = (lo[:, i], hi[:, i]), (lo[:, 3 + j], hi[:, 3 + j])
                x, y = (lo[:, 6 + i], hi[:, 6 + i]), (lo[:, 9 + j], hi[:, 9 + j])
                a = ivec.mul(u, v)
                b = ivec.mul(p2i, ivec.mul(x, y))
                s = ivec.intersect(ivec.add(a, b), T[3 * i + j])
                a2 = ivec.intersect(a, ivec.sub(s, b))
                b2 = ivec.intersect(b, ivec.sub(s, a))
                dead |= ivec.is_empty(s) | ivec.is_empty(a2) | ivec.is_empty(b2)
                xy = ivec.div(b2, p2i)
                _narrow(lo, hi, a2, 3 + j, i)
                _narrow(lo, hi, a2, i, 3 + j)
                _narrow(lo, hi, xy, 9 + j, 6 + i)
                _narrow(lo, hi, xy, 6 + i, 9 + j)
                dead |= (lo > hi).any(axis=1)
        lo[dead], hi[dead] = 0.0, 0.0
    return dead


def _bisect(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Halve each node along its widest coordinate (lowest index on ties); children adjacent."""
    rows = np.arange(len(lo))
    k = np.argmax(hi - lo, axis=1)
    mid = (lo[rows, k] + hi[rows, k]) / 2
    lo2, hi1 = lo.copy(), hi.copy()
    hi1[rows, k] = mid
    lo2[rows, k] = mid
    return np.stack([lo, lo2], axis=1).reshape(-1, 12), np.stack([hi1, hi], axis=1).reshape(-1, 12)


def _natural_lower(entries, p3: Fraction, p2: Interval) -> Fraction:
    """Every residual entry is at least |p3 C_k| - 1 - p2 over the whole domain."""
    best = Fraction(0)
    for a, b in entries:
        m = Fraction(0) if a <= 0 <= b else min(abs(a), abs(b))
        best = max(best, p3 * m - 1 - p2.hi)
    return best


def _exact_residual(entries, p3: Fraction, p2: Fraction, w: np.ndarray) -> tuple[Fraction, list]:
    C = [(a + b) / 2 for a, b in entries]
    u, v, x, y = ([Fraction(float(t)) for t in w[k : k + 3]] for k in (0, 3, 6, 9))
    res = max(abs(p3 * C[3 * i + j] - u[i] * v[j] - p2 * x[i] * y[j]) for i in range(3) for j in range(3))
    return res, C


def _pack(bits: list[np.ndarray]) -> bytes:
    flat = np.concatenate(bits).astype(np.uint8) if bits else np.zeros(0, np.uint8)
    return zlib.compress(np.packbits(flat).tobytes() + len(flat).to_bytes(8, "big"), 9)


def _unpack(blob: bytes) -> np.ndarray:
    raw = zlib.decompress(blob)
    n = int.from_bytes(raw[-8:], "big")
    return np.unpackbits(np.frombuffer(raw[:-8], dtype=np.uint8))[:n].astype(bool)


def calc_range(q: RankTwoQuery, tau=TAU, passes: int = PASSES) -> RangeResult:
    """Lower bound L on the minimum residual over the query box; L > 1 certifies infeasibility.

    Raises BudgetExceeded (with ``stats["lower"]``) once the leaves would exceed ``q.budget``.
    """
    tau = to_rational(tau)
    entries = q.entries()
    T = _targets(entries, q.p3, tau)
    p2i = (np.float64(ivec.const(q.p2.lo)[0]), np.float64(ivec.const(q.p2.hi)[1]))
    p2_mid = q.p2.mid
    lo, hi = _ROOT_LO[None, :].copy(), _ROOT_HI[None, :].copy()
    bits: list[np.ndarray] = []
    leaves = nodes = 0
    while len(lo):
        nodes += len(lo)
        dead = _empty_nodes(lo, hi, T, p2i, passes)
        bits.append(~dead)
        leaves += int(dead.sum())
        lo, hi = lo[~dead], hi[~dead]
        if not len(lo):
            break
        if leaves + len(lo) > q.budget:
            raise BudgetExceeded(
                "calc_range leaf budget exceeded",
                {"leaves": leaves, "open": len(lo), "nodes": nodes, "lower": _natural_lower(entries, q.p3, q.p2)},
            )
        mid = (lo + hi) / 2
        Cm = np.array([float((a + b) / 2) for a, b in entries]).reshape(3, 3)
        r = q.p3.__float__() * Cm[None] - mid[:, 0:3, None] * mid[:, None, 3:6] - float(p2_mid) * mid[:, 6:9, None] * mid[:, None, 9:12]
        worst = np.abs(r).reshape(len(mid), -1).max(axis=1)
        for k in np.flatnonzero(worst <= 1)[:4]:
            res, C = _exact_residual(entries, q.p3, p2_mid, mid[k])
            if res <= 1:
                w = {"C": [format_rational(c) for c in C], "uvxy": [format_rational(Fraction(float(t))) for t in mid[k]],
                     "p2": format_rational(p2_mid), "residual": format_rational(res)}
                return RangeResult(_natural_lower(entries, q.p3, q.p2), False, leaves, nodes, _pack(bits), w)
        lo, hi = _bisect(lo, hi)
    return RangeResult(tau, True, leaves, nodes, _pack(bits))


# -- covers and the case split ----------------------------------------------------


@dataclass
class BoxVerdict:
    box: tuple[int, ...]
    verdict: Verdict
    lower: Fraction
    leaves: int
    tree: bytes = b""
    note: str = ""


def _certify_one(args) -> BoxVerdict:
    box, level, p3, p2, budget, tau, passes = args
    q = RankTwoQuery(DyadicBox(level, box), p3, p2, budget)
    try:
        r = calc_range(q, tau, passes)
    except BudgetExceeded as err:
        return BoxVerdict(box, Verdict.UNKNOWN, err.stats["lower"], err.stats["leaves"], note="budget")
    note = "witness" if r.witness else ""
    return BoxVerdict(box, r.verdict, r.lower, r.leaves, r.tree if r.certified else b"", note)


def certify_cover(
    S: CoverSet, p3, p2: Interval, budget: int = 10**6, workers: int = 1, tau=TAU, passes: int = PASSES
) -> list[BoxVerdict]:
    """calc_range on every box of S, in the canonical box order."""
    p3 = to_rational(p3)
    jobs = [(b, S.level, p3, p2, budget, to_rational(tau), passes) for b in S.boxes]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_certify_one, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    return [_certify_one(j) for j in jobs]


def case_split_bound(g1, g2) -> Fraction:
    """max(9/4 g2, g1^2): case p3 >= g1 gives p3' < g2, case g2 <= p3 < g1 gives p3' < g1."""
    g1, g2 = to_rational(g1), to_rational(g2)
    return max(Fraction(9, 4) * g2, g1 * g1)


@dataclass
class CaseRecord:
    name: str
    cover_g: Fraction
    cover_hash: str
    p3: Fraction
    p2: Interval
    verdicts: list[BoxVerdict]

    @property
    def complete(self) -> bool:
        return all(v.verdict is Verdict.CERTIFIED for v in self.verdicts)


@dataclass
class UpperBoundCertificate:
    g1: Fraction
    g2: Fraction
    level: int
    tau: Fraction
    passes: int
    cases: list[CaseRecord]
    bound: Fraction
    metadata: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(c.complete for c in self.cases)

    @property
    def status(self) -> str:
        return "complete" if self.complete else "partial"

    def counts(self) -> dict:
        out = {}
        for c in self.cases:
            n = sum(v.verdict is Verdict.CERTIFIED for v in c.verdicts)
            out[c.name] = {"boxes": len(c.verdicts), "certified": n, "leaves": sum(v.leaves for v in c.verdicts)}
        return out

    def to_json(self) -> str:
        doc = {
            "format": "cpgrowth-upper-bound/1",
            "g1": format_rational(self.g1),
            "g2": format_rational(self.g2),
            "level": self.level,
            "tau": format_rational(self.tau),
            "passes": self.passes,
            "status": self.status,
            "bound": format_rational(self.bound),
            "metadata": self.metadata,
            "cases": [
                {
                    "name": c.name,
                    "cover_g": format_rational(c.cover_g),
                    "cover_hash": c.cover_hash,
                    "p3": format_rational(c.p3),
                    "p2": [format_rational(c.p2.lo), format_rational(c.p2.hi)],
                    "boxes": [
                        {
                            "box": list(v.box),
                            "verdict": v.verdict.value,
                            "lower": format_rational(v.lower),
                            "leaves": v.leaves,
                            "tree": base64.b64encode(v.tree).decode(),
                            "note": v.note,
                        }
                        for v in c.verdicts
                    ],
                }
                for c in self.cases
            ],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> UpperBoundCertificate:
        d = json.loads(text)
        if d.get("format") != "cpgrowth-upper-bound/1":
            raise ValueError("not an upper-bound certificate")
        cases = []
        for c in d["cases"]:
            verdicts = [
                BoxVerdict(tuple(b["box"]), Verdict(b["verdict"]), to_rational(b["lower"]), b["leaves"],
                           base64.b64decode(b["tree"]), b.get("note", ""))
                for b in c["boxes"]
            ]
            p2 = Interval.exact(to_rational(c["p2"][0]), to_rational(c["p2"][1]))
            cases.append(CaseRecord(c["name"], to_rational(c["cover_g"]), c["cover_hash"], to_rational(c["p3"]), p2, verdicts))
        return cls(to_rational(d["g1"]), to_rational(d["g2"]), d["level"], to_rational(d["tau"]), d["passes"],
                   cases, to_rational(d["bound"]), d.get("metadata", {}))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> UpperBoundCertificate:
        return cls.from_json(Path(path).read_text())


def theorem_pipeline(
    g1,
    g2,
    level: int,
    budget: int = 10**6,
    workers: int = 1,
    tests: TestConfig = TestConfig(),
    cover_budget: int | None = None,
    covers: dict | None = None,
    strict: bool = False,
) -> UpperBoundCertificate:
    """Two-case upper bound on the growth p3 p3' of 5x5 CP matrices.

    p3' is the third pivot of the normalized 3x3 Schur complement after two steps.

    Case A certifies that p3 >= g1 forces p3' < g2 on S_{g2}; case B that
    p3 >= g2 forces p3' < g1 on S_{g1}.  Both run at the smallest p3 of their
    range with the largest admissible p2 (rescaling u and x covers the rest).
    The bound is max(9/4 g2, g1^2) when both cases are complete, else 81/16.
    ``covers`` may supply prebuilt covers keyed by threshold.
    """
    g1, g2 = to_rational(g1), to_rational(g2)
    if not 2 < g2 < g1 <= Fraction(9, 4):
        raise ValueError("need 2 < g2 < g1 <= 9/4")
    covers = dict(covers or {})
    for g in (g1, g2):
        if g not in covers:
            covers[g] = build_cover(g, level, tests, cover_budget, workers)
    cases = []
    for name, cover_g, p3 in (("A", g2, g1), ("B", g1, g2)):
        S = covers[cover_g]
        p2 = worst_p2(p3)
        verdicts = certify_cover(S, p3, p2, budget, workers)
        cases.append(CaseRecord(name, cover_g, S.content_hash, p3, p2, verdicts))
    complete = all(c.complete for c in cases)
    bound = case_split_bound(g1, g2) if complete else VACUOUS_BOUND
    meta = {
        "version": __version__,
        "tests": tests.name,
        "budget": budget,
        "cover_sizes": {format_rational(g): len(S) for g, S in covers.items()},
    }
    cert = UpperBoundCertificate(g1, g2, level, TAU, PASSES, cases, bound, meta)
    if strict and not cert.complete:
        raise PartialCertificate(cert)
    return cert


# -- replay -------------------------------------------------------------------------


@dataclass
class VerificationReport:
    ok: bool
    complete: bool
    boxes_checked: int = 0
    leaves_checked: int = 0
    exact_leaves: int = 0
    problems: list[str] = field(default_factory=list)


def _rd(a):
    return np.nextafter(a, -np.inf)


def _ru(a):
    return np.nextafter(a, np.inf)


def _prod(alo, ahi, blo, bhi):
    c = np.stack([alo * blo, alo * bhi, ahi * blo, ahi * bhi])
    return _rd(c.min(axis=0)), _ru(c.max(axis=0))


def _quot_into(nlo, nhi, dlo, dhi, tlo, thi):
    """Intersect [tlo, thi] with [nlo, nhi] / [dlo, dhi] where the divisor excludes zero."""
    ok = (dlo > 0) | (dhi < 0)
    with np.errstate(all="ignore"):
        c = np.stack([nlo / dlo, nlo / dhi, nhi / dlo, nhi / dhi])
    qlo, qhi = _rd(c.min(axis=0)), _ru(c.max(axis=0))
    return np.where(ok, np.maximum(tlo, qlo), tlo), np.where(ok, np.minimum(thi, qhi), thi)


def verify_leaves(L: np.ndarray, H: np.ndarray, entries, p3: Fraction, p2: Interval, tau: Fraction, passes: int) -> np.ndarray:
    """Independent float check that each leaf holds no point with residual <= tau.

    Returns a boolean array, True where the leaf is proved empty.
    """
    L, H = L.copy(), H.copy()
    p3lo, p3hi = _rd(np.float64(p3)), _ru(np.float64(p3))
    plo, phi = _rd(np.float64(p2.lo)), _ru(np.float64(p2.hi))
    tlo, thi = _rd(np.float64(tau)), _ru(np.float64(tau))
    ok = np.zeros(len(L), dtype=bool)
    for _ in range(passes):
        for e in range(9):
            i, j = divmod(e, 3)
            clo, chi = _rd(np.float64(entries[e][0])), _ru(np.float64(entries[e][1]))
            # target band for u_i v_j + p2 x_i y_j
            pcl, pch = _prod(np.full(len(L), p3lo), np.full(len(L), p3hi), np.full(len(L), clo), np.full(len(L), chi))
            blo, bhi = _rd(pcl - thi), _ru(pch + thi)
            ulo, uhi, vlo, vhi = L[:, i], H[:, i], L[:, 3 + j], H[:, 3 + j]
            xlo, xhi, ylo, yhi = L[:, 6 + i], H[:, 6 + i], L[:, 9 + j], H[:, 9 + j]
            alo, ahi = _prod(ulo, uhi, vlo, vhi)
            xylo, xyhi = _prod(xlo, xhi, ylo, yhi)
            qlo, qhi = _prod(np.full(len(L), plo), np.full(len(L), phi), xylo, xyhi)
            slo, shi = np.maximum(_rd(alo + qlo), blo), np.minimum(_ru(ahi + qhi), bhi)
            a2lo, a2hi = np.maximum(alo, _rd(slo - qhi)), np.minimum(ahi, _ru(shi - qlo))
            q2lo, q2hi = np.maximum(qlo, _rd(slo - ahi)), np.minimum(qhi, _ru(shi - alo))
            ok |= (slo > shi) | (a2lo > a2hi) | (q2lo > q2hi)
            with np.errstate(all="ignore"):
                c = np.stack([q2lo / plo, q2lo / phi, q2hi / plo, q2hi / phi])
            w2lo, w2hi = _rd(c.min(axis=0)), _ru(c.max(axis=0))
            L[:, i], H[:, i] = _quot_into(a2lo, a2hi, vlo, vhi, L[:, i], H[:, i])
            L[:, 3 + j], H[:, 3 + j] = _quot_into(a2lo, a2hi, L[:, i], H[:, i], L[:, 3 + j], H[:, 3 + j])
            L[:, 6 + i], H[:, 6 + i] = _quot_into(w2lo, w2hi, ylo, yhi, L[:, 6 + i], H[:, 6 + i])
            L[:, 9 + j], H[:, 9 + j] = _quot_into(w2lo, w2hi, L[:, 6 + i], H[:, 6 + i], L[:, 9 + j], H[:, 9 + j])
            ok |= (L > H).any(axis=1)
        L[ok], H[ok] = 0.0, 0.0
    return ok


def leaf_empty_exact(lo, hi, entries, p3: Fraction, p2: Interval, tau: Fraction, passes: int) -> bool:
    """The same propagation in exact rational interval arithmetic, for spot checks."""
    box = [Interval.exact(Fraction(float(a)), Fraction(float(b))) for a, b in zip(lo, hi)]
    p2 = p2.with_prec(None)
    for _ in range(passes):
        for e in range(9):
            i, j = divmod(e, 3)
            C = Interval.exact(*entries[e])
            band = Interval.exact((p3 * C).lo - tau, (p3 * C).hi + tau)
            a = box[i] * box[3 + j]
            b = p2 * (box[6 + i] * box[9 + j])
            s = (a + b).intersect(band)
            if s is None:
                return True
            a2, b2 = a.intersect(s - b), b.intersect(s - a)
            if a2 is None or b2 is None:
                return True
            xy = b2 / p2
            for num, den, col in ((a2, 3 + j, i), (a2, i, 3 + j), (xy, 9 + j, 6 + i), (xy, 6 + i, 9 + j)):
                d = box[den]
                if d.lo > 0 or d.hi < 0:
                    box[col] = box[col].intersect(num / d)
                    if box[col] is None:
                        return True
    return False


def replay_tree(blob: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Leaf boxes of a recorded split tree, rebuilt from the bits alone."""
    bits = _unpack(blob)
    pos = 0
    lo, hi = _ROOT_LO[None, :].copy(), _ROOT_HI[None, :].copy()
    leaf_lo, leaf_hi = [], []
    while len(lo):
        take = bits[pos : pos + len(lo)]
        if len(take) != len(lo):
            raise ValueError("split tree ends early")
        pos += len(lo)
        leaf_lo.append(lo[~take])
        leaf_hi.append(hi[~take])
        lo, hi = lo[take], hi[take]
        n = len(lo)
        if n:
            rows = np.arange(n)
            k = np.argmax(hi - lo, axis=1)
            m = (lo[rows, k] + hi[rows, k]) / 2
            new_lo = np.repeat(lo, 2, axis=0)
            new_hi = np.repeat(hi, 2, axis=0)
            new_hi[2 * rows, k] = m
            new_lo[2 * rows + 1, k] = m
            lo, hi = new_lo, new_hi
    if pos != len(bits):
        raise ValueError("split tree has trailing bits")
    return np.concatenate(leaf_lo), np.concatenate(leaf_hi)


def verify_certificate(
    cert: UpperBoundCertificate, exact_samples: int = 0, seed: int = 0, covers: dict | None = None
) -> VerificationReport:
    """Re-check every Certified verdict by replaying its split tree.

    Also checks the bound arithmetic and, if ``covers`` (threshold -> CoverSet)
    is given, that each case lists exactly the boxes of that cover.
    ``exact_samples`` leaves per box are re-proved in rational arithmetic.
    """
    rep = VerificationReport(ok=True, complete=cert.complete)
    rng = np.random.default_rng(seed)

    def fail(msg):
        rep.ok = False
        rep.problems.append(msg)

    for case in cert.cases:
        listed = CoverSet(case.cover_g, cert.level, [v.box for v in case.verdicts])
        if listed.content_hash != case.cover_hash:
            fail(f"case {case.name}: box list does not match cover hash {case.cover_hash[:12]}")
        if covers is not None and case.cover_g in covers and covers[case.cover_g].content_hash != case.cover_hash:
            fail(f"case {case.name}: supplied cover differs from the one certified")
        for v in case.verdicts:
            if v.verdict is not Verdict.CERTIFIED:
                continue
            entries = _entries_of(DyadicBox(cert.level, v.box))
            try:
                L, H = replay_tree(v.tree)
            except (ValueError, zlib.error) as err:
                fail(f"case {case.name} box {v.box}: {err}")
                continue
            good = verify_leaves(L, H, entries, case.p3, case.p2, cert.tau, cert.passes)
            rep.boxes_checked += 1
            rep.leaves_checked += len(L)
            if not good.all():
                fail(f"case {case.name} box {v.box}: {int((~good).sum())} leaves not proved empty")
            for t in rng.choice(len(L), size=min(exact_samples, len(L)), replace=False):
                rep.exact_leaves += 1
                if not leaf_empty_exact(L[t], H[t], entries, case.p3, case.p2, cert.tau, cert.passes):
                    fail(f"case {case.name} box {v.box}: leaf {t} fails the exact check")
            if v.lower <= 1:
                fail(f"case {case.name} box {v.box}: certified with lower bound {v.lower}")
    expected = case_split_bound(cert.g1, cert.g2) if cert.complete else VACUOUS_BOUND
    if cert.bound != expected:
        fail(f"bound {cert.bound} should be {expected}")
    return rep
