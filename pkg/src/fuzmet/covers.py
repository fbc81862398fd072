"""Covers, refinement by uniform balls, nets, and the per-family Lebesgue
oracles with numerically replayable certificates.

Everything here works on finite samples. The oracle verdicts for the seven
catalogued spaces come from the known arguments for those spaces; the
certificate check re-runs the numerical facts those arguments rest on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import expr as ex
from .sequences import (
    Formula,
    Resolution,
    SequenceError,
    SequenceSpec,
    cluster_evidence,
    pseudo_cauchy_verdict,
    term,
    terms,
)
from .spaces import (
    DEFAULT_SEED,
    Family,
    Interval,
    Metric,
    PositiveIntegers,
    SequenceRange,
    SpaceError,
    SpaceSpec,
    UnionOf,
    classify_ball,
    contains,
    contains_many,
    enumerate_prefix,
    sample_points,
)
from .verdict import Verdict, Witness, combine, fails, holds, inconclusive


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class Cover:
    sets: tuple  # of (name, tuple of points)

    @classmethod
    def singletons(cls, points) -> "Cover":
        uniq = sorted(set(float(p) for p in points))
        return cls(tuple((f"U{i + 1}", (p,)) for i, p in enumerate(uniq)))

    @classmethod
    def whole(cls, points) -> "Cover":
        return cls((("X", tuple(float(p) for p in points)),))

    def points(self) -> list[float]:
        return sorted(set(float(p) for _, pts in self.sets for p in pts))


def cover_from_json(obj) -> Cover:
    if not isinstance(obj, dict) or "sets" not in obj:
        raise CoverError("cover: missing field 'sets'")
    sets = []
    for i, s in enumerate(obj["sets"]):
        if not isinstance(s, dict) or "points" not in s:
            raise CoverError(f"cover.sets[{i}]: missing field 'points'")
        sets.append((str(s.get("name", f"U{i + 1}")), tuple(float(p) for p in s["points"])))
    return Cover(tuple(sets))


def cover_to_json(cover: Cover) -> dict:
    return {"sets": [{"name": n, "points": list(p)} for n, p in cover.sets]}


# -- refinement -----------------------------------------------------------------

class _Membership:
    """Lazy per-set masks over the sample, indexed by containing point."""

    def __init__(self, cover: Cover, sample: np.ndarray):
        self.sample = sample
        self.cover = cover
        self.by_point: dict[float, list[int]] = {}
        for i, (_, pts) in enumerate(cover.sets):
            for p in set(pts):
                self.by_point.setdefault(float(p), []).append(i)
        self._masks: dict[int, np.ndarray] = {}
        missing = [float(x) for x in sample if float(x) not in self.by_point]
        if missing:
            raise CoverError(f"cover does not cover sample point {missing[0]!r}")

    def mask(self, i: int) -> np.ndarray:
        if i not in self._masks:
            self._masks[i] = np.isin(self.sample, np.asarray(self.cover.sets[i][1], dtype=np.float64))
        return self._masks[i]


def refinement_check(space: SpaceSpec, sample, cover: Cover, r: float, t: float) -> Verdict:
    """Does every (r, t)-ball around a sample point fit inside one cover set?

    Ball membership is three-valued; a center whose ball only fits once its
    boundary points are dropped makes the verdict Inconclusive. The first
    unrefined center in sample order is reported.
    """
    S = np.asarray(sample, dtype=np.float64)
    if S.size == 0:
        raise CoverError("sample is empty")
    if not 0.0 < r < 1.0 or not t > 0:
        raise SpaceError(f"need r in (0, 1) and t > 0, got r={r!r}, t={t!r}")
    mem = _Membership(cover, S)
    params = {"r": r, "t": t}
    pending = None
    for i, x in enumerate(S):
        vals = space.evaluate(x, S, t)
        cls = classify_ball(vals, r)
        inside, edge = cls == 0, cls != 1
        candidates = mem.by_point[float(x)]
        if any(mem.mask(s)[edge].all() for s in candidates):
            continue
        if any(mem.mask(s)[inside].all() for s in candidates):
            if pending is None:
                j = int(np.flatnonzero(edge & ~mem.mask(candidates[0]))[0])
                pending = Witness((i, j), (float(x), float(S[j])), (float(vals[j]),),
                                  {**params, "set": cover.sets[candidates[0]][0]})
            continue
        own = candidates[0]
        j = int(np.flatnonzero(inside & ~mem.mask(own))[0])
        w = Witness((i, j), (float(x), float(S[j])), (float(vals[j]),),
                    {**params, "set": cover.sets[own][0]})
        return fails(w, f"ball around {float(x)!r} escapes every cover set via {float(S[j])!r}")
    if pending is not None:
        return inconclusive("a ball fits only if its boundary points are dropped", pending)
    return holds(Witness((S.size,), (), (), params), "every ball lies inside a cover set")


def lebesgue_search(space: SpaceSpec, sample, cover: Cover, r_grid, t_grid) -> Verdict:
    if not r_grid or not t_grid:
        raise ValueError("grids must be nonempty")
    parts = []
    for r in r_grid:
        for t in t_grid:
            v = refinement_check(space, sample, cover, r, t)
            if v.holds:
                return holds(v.witness, f"balls at r={r}, t={t} refine the cover", parts=tuple(parts) + (v,))
            parts.append(v)
    if all(p.fails for p in parts):
        return fails(parts[0].witness, "no grid (r, t) refines the cover", parts=tuple(parts))
    return inconclusive("no grid (r, t) certainly refines the cover",
                        next(p for p in parts if not p.fails).witness, parts=tuple(parts))


@dataclass(frozen=True)
class SupEstimate:
    value: float
    b: float
    c: float
    s: float
    label: str = "sample sup (lower bound on the true sup)"


def equinormality_estimate(space: SpaceSpec, setB, setC, s: float) -> SupEstimate:
    B = np.asarray(setB, dtype=np.float64)
    C = np.asarray(setC, dtype=np.float64)
    if B.size == 0 or C.size == 0:
        raise ValueError("both sets must be nonempty")
    shared = np.intersect1d(B, C)
    if shared.size:
        raise ValueError(f"sets are not disjoint: both contain {float(shared[0])!r}")
    if not s > 0:
        raise SpaceError(f"s must be positive, got {s!r}")
    V = space.evaluate(B[:, None], C[None, :], s)
    i, j = np.unravel_index(int(np.argmax(V)), V.shape)
    return SupEstimate(float(V[i, j]), float(B[i]), float(C[j]), s)


@dataclass(frozen=True)
class Net:
    centers: tuple
    metric_centers: tuple | None = None

    @property
    def size(self) -> int:
        return len(self.centers)

    @property
    def agrees(self) -> bool | None:
        return None if self.metric_centers is None else self.metric_centers == self.centers


def _greedy(S: np.ndarray, covered_by) -> tuple:
    covered = np.zeros(S.size, dtype=bool)
    centers = []
    while not covered.all():
        i = int(np.argmin(covered))
        centers.append(float(S[i]))
        covered |= covered_by(S[i])
        covered[i] = True
    return tuple(centers)


def precompact_net(space: SpaceSpec, sample, r: float, t: float) -> Net:
    """Greedy first-uncovered (r, t)-ball net of the sample.

    For standard spaces the same greedy run is repeated with metric balls of
    radius ``t*r/(1-r)`` as a cross-check.
    """
    S = np.asarray(sample, dtype=np.float64)
    if S.size == 0:
        raise ValueError("sample is empty")
    if not 0.0 < r < 1.0 or not t > 0:
        raise SpaceError(f"need r in (0, 1) and t > 0, got r={r!r}, t={t!r}")
    centers = _greedy(S, lambda c: classify_ball(space.evaluate(c, S, t), r) == 0)
    metric_centers = None
    if space.family is Family.STANDARD:
        radius = t * r / (1.0 - r)
        metric_centers = _greedy(S, lambda c: space.metric.distance(c, S) < radius)
    return Net(centers, metric_centers)


# -- certificates and oracles -----------------------------------------------------

@dataclass(frozen=True)
class OffDiagonalSupBound:
    bound: float

    def facts(self):
        return [f"M(x, y, t) <= {self.bound} for all sampled x != y and grid t"]


@dataclass(frozen=True)
class DivergentPseudoCauchy:
    sequence: SequenceSpec
    candidates: int = 20

    def facts(self):
        return ["sequence is pseudo-Cauchy with distinct terms",
                f"no cluster evidence at any of {self.candidates} seeded candidates"]


@dataclass(frozen=True)
class HalfTIdentity:
    samples: int = 1000

    def facts(self):
        return ["M(x, y, 1/2) = M(x, y, 1)/2 for sampled x != y",
                "so off-diagonal M(x, y, 1/2) <= 1/2"]


@dataclass(frozen=True)
class ShrinkingPairGap:
    a: ex.Expr
    b: ex.Expr
    start: int = 1

    def facts(self):
        return ["M(a_n, b_n, t) > 1 - eps eventually, for every grid (eps, t)",
                "the families {a_n} and {b_n} are disjoint"]


@dataclass(frozen=True)
class CompactTail:
    interval: Interval
    probes: tuple

    def facts(self):
        return ["every probe sequence eventually lies in the interval",
                "every probe sequence has cluster evidence at a point of the interval"]


Certificate = Union[OffDiagonalSupBound, DivergentPseudoCauchy, HalfTIdentity, ShrinkingPairGap, CompactTail]


class Lebesgue(enum.Enum):
    LEBESGUE = "lebesgue"
    NOT_LEBESGUE = "not_lebesgue"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OracleVerdict:
    status: Lebesgue
    certificate: Certificate | None = None
    source: str = ""
    by_analogy: bool = False

    def __post_init__(self):
        if self.status is not Lebesgue.UNKNOWN and self.certificate is None:
            raise ValueError("a decided oracle verdict needs a certificate")


def _p(s: str) -> ex.Expr:
    return ex.parse(s)


INF = math.inf
EX27_DOMAIN = UnionOf((PositiveIntegers(), SequenceRange(_p("n+1/n"), 1)))
WEAK_G_DOMAIN = UnionOf((SequenceRange(_p("1/2^n"), 2), Interval(0.5, 1.0, False, False)))

CATALOG: dict[str, tuple[SpaceSpec, OracleVerdict]] = {
    "reciprocal_product": (
        SpaceSpec(Family.RECIPROCAL_PRODUCT, PositiveIntegers()),
        OracleVerdict(Lebesgue.LEBESGUE, OffDiagonalSupBound(0.5),
                      "reciprocal product on N: no distinct pair exceeds 1/2, so no "
                      "pseudo-Cauchy sequence of distinct terms exists")),
    "stationary_ratio": (
        SpaceSpec(Family.STATIONARY_RATIO, Interval(0.0, INF, True, True)),
        OracleVerdict(Lebesgue.NOT_LEBESGUE, DivergentPseudoCauchy(Formula(_p("n"))),
                      "min/max ratio on (0, inf): a_n = n is pseudo-Cauchy with no cluster point")),
    "shifted_ratio": (
        SpaceSpec(Family.SHIFTED_RATIO, Interval(0.0, INF, False, True)),
        OracleVerdict(Lebesgue.NOT_LEBESGUE, DivergentPseudoCauchy(Formula(_p("n"))),
                      "shifted ratio on [0, inf): same divergent sequence as the plain ratio",
                      by_analogy=True)),
    "phi_ratio": (
        SpaceSpec(Family.PHI_RATIO, Interval(0.0, INF, True, True)),
        OracleVerdict(Lebesgue.LEBESGUE, HalfTIdentity(),
                      "phi-scaled ratio on (0, inf): halving t halves M, so distinct pairs "
                      "cannot approach 1 at every scale")),
    "phi_product": (
        SpaceSpec(Family.PHI_PRODUCT, Interval(0.0, 1.0, True, True)),
        OracleVerdict(Lebesgue.LEBESGUE, HalfTIdentity(),
                      "phi-scaled product on (0, 1): same half-t argument as the phi ratio",
                      by_analogy=True)),
    "ex27": (
        SpaceSpec(Family.STANDARD, EX27_DOMAIN, metric=Metric.EUCLIDEAN),
        OracleVerdict(Lebesgue.NOT_LEBESGUE, ShrinkingPairGap(_p("n"), _p("n+1/n"), 2),
                      "N u {n + 1/n} with the usual metric: discrete, and the pairs "
                      "(n, n + 1/n) defeat every uniform ball scale")),
    "weak_g_example": (
        SpaceSpec(Family.STATIONARY_RATIO, WEAK_G_DOMAIN),
        OracleVerdict(Lebesgue.LEBESGUE, CompactTail(Interval(0.5, 1.0, False, False), (
            Formula(_p("1/2+1/(2*n)")),
            Formula(_p("1-1/(2*n)")),
            Formula(_p("3/4+(-1)^n/(4*n)")),
        )), "{1/2^n : n >= 2} u [1/2, 1] with the ratio metric: distinct pseudo-Cauchy "
            "sequences end up in the compact piece [1/2, 1]")),
}


def family_lebesgue_oracle(space: SpaceSpec) -> OracleVerdict:
    for known, verdict in CATALOG.values():
        if space == known:
            return verdict
    return OracleVerdict(Lebesgue.UNKNOWN, source="not a catalogued space")


def catalog_name(space: SpaceSpec) -> str | None:
    return next((name for name, (known, _) in CATALOG.items() if space == known), None)


def _off_diagonal_pairs(space: SpaceSpec, count: int, seed: int):
    prefix = enumerate_prefix(space.domain, math.isqrt(count))
    if prefix is not None and len(prefix) >= 2:
        P = np.asarray(prefix)
        ii, jj = np.meshgrid(np.arange(P.size), np.arange(P.size), indexing="ij")
        off = ii != jj
        return P[ii[off]], P[jj[off]]
    pts = np.asarray(sample_points(space.domain, 2 * count, seed))
    x, y = pts[0::2], pts[1::2]
    keep = x != y
    return x[keep], y[keep]


def _check_sup_bound(space, cert: OffDiagonalSupBound, res: Resolution, seed: int) -> Verdict:
    x, y = _off_diagonal_pairs(space, 10**4, seed)
    best = None
    for t in res.t_values():
        vals = space.evaluate(x, y, t)
        i = int(np.argmax(vals))
        if best is None or vals[i] > best[0]:
            best = (float(vals[i]), float(x[i]), float(y[i]), t)
    v, bx, by, t = best
    w = Witness((x.size,), (bx, by), (v,), {"t": t, "bound": cert.bound, "pairs": int(x.size)})
    if v <= cert.bound + res.tol:
        return holds(w, f"max off-diagonal M over {x.size} pairs is {v!r}")
    return fails(w, f"pair ({bx!r}, {by!r}) has M = {v!r} > {cert.bound}")


def _check_divergent(space, cert: DivergentPseudoCauchy, res: Resolution, seed: int) -> Verdict:
    pc = pseudo_cauchy_verdict(space, cert.sequence, res, distinct_terms=True)
    parts = [pc if pc.holds else fails(pc.witness, "sequence is not pseudo-Cauchy: " + pc.note)]
    candidates = sample_points(space.domain, cert.candidates, seed)
    # a far-tail term sits near any cluster point the window could reveal
    try:
        far = term(cert.sequence, 1000 * res.N)
        if contains(space.domain, far):
            candidates.append(far)
    except SequenceError:
        pass
    for c in candidates:
        cl = cluster_evidence(space, cert.sequence, c, res)
        if cl.fails:
            parts.append(holds(cl.witness, f"no cluster evidence at {c!r}"))
        else:
            parts.append(fails(cl.witness, f"candidate {c!r} shows cluster evidence ({cl.status.value})"))
    return combine(parts, "divergent pseudo-Cauchy sequence")


def _check_half_t(space, cert: HalfTIdentity, res: Resolution, seed: int) -> Verdict:
    x, y = _off_diagonal_pairs(space, cert.samples, seed)
    half = space.evaluate(x, y, 0.5)
    full = space.evaluate(x, y, 1.0)
    gap = np.abs(half - full / 2.0)
    i = int(np.argmax(gap))
    w = Witness((x.size,), (float(x[i]), float(y[i])), (float(half[i]),), {"t": 0.5, "max_gap": float(gap[i])})
    if gap[i] > 1e-12:
        return fails(w, f"half-t identity off by {float(gap[i])!r}")
    j = int(np.argmax(half))
    if half[j] > 0.5 + res.tol:
        return fails(Witness((x.size,), (float(x[j]), float(y[j])), (float(half[j]),), {"t": 0.5}),
                     "off-diagonal M(x, y, 1/2) exceeds 1/2")
    return holds(w, f"half-t identity holds on {x.size} pairs (max gap {float(gap[i])!r})")


def _check_pair_gap(space, cert: ShrinkingPairGap, res: Resolution, seed: int) -> Verdict:
    ns = np.arange(cert.start, cert.start + res.N)
    a, da, na = ex.evaluate_many(cert.a, ns)
    b, db, nb = ex.evaluate_many(cert.b, ns)
    if (da | na | db | nb).any():
        return fails(Witness(), "pair expressions fail to evaluate on the window")
    outside = ~(contains_many(space.domain, a) & contains_many(space.domain, b))
    if outside.any():
        i = int(np.argmax(outside))
        return fails(Witness((int(ns[i]),), (float(a[i]), float(b[i]))), "pair leaves the domain")
    shared = np.intersect1d(a, b)
    parts = [holds(Witness((int(ns[0]), int(ns[-1])), (), (), {"families": "disjoint"}),
                   "point families are disjoint") if shared.size == 0 else
             fails(Witness((), (float(shared[0]),)), f"{float(shared[0])!r} is in both families")]
    for eps, t in res.grid():
        vals = space.evaluate(a, b, t)
        bad = np.flatnonzero(~(vals > 1.0 - eps))
        n0 = 0 if bad.size == 0 else int(bad[-1]) + 1
        params = {"eps": eps, "t": t}
        if n0 < ns.size:
            parts.append(holds(Witness((int(ns[n0]),), (float(a[n0]), float(b[n0])), (float(vals[n0]),), params),
                               f"M(a_n, b_n, t) > 1 - eps from n = {int(ns[n0])}"))
        else:
            parts.append(fails(Witness((int(ns[-1]),), (float(a[-1]), float(b[-1])), (float(vals[-1]),), params),
                               "pair gap does not shrink within the window"))
    return combine(parts, "shrinking pair gap")


def _check_compact_tail(space, cert: CompactTail, res: Resolution, seed: int) -> Verdict:
    I = cert.interval
    grid = np.linspace(I.lo, I.hi, 101)
    grid = grid[contains_many(I, grid) & contains_many(space.domain, grid)]
    parts = []
    mid = res.N // 2
    for seq in cert.probes:
        x = terms(seq, res.N)
        if not contains_many(I, x[mid:]).all():
            parts.append(fails(Witness(), f"probe {seq} leaves the interval in the tail"))
            continue
        found = None
        for c in grid:
            v = cluster_evidence(space, seq, float(c), res)
            if v.holds:
                found = v
                break
        if found is None:
            parts.append(fails(Witness(), f"probe {seq} shows no cluster evidence in the interval"))
        else:
            parts.append(holds(found.witness, f"cluster evidence at {found.witness.params['candidate']!r}"))
    return combine(parts, "compact tail")


_CHECKS = {
    OffDiagonalSupBound: _check_sup_bound,
    DivergentPseudoCauchy: _check_divergent,
    HalfTIdentity: _check_half_t,
    ShrinkingPairGap: _check_pair_gap,
    CompactTail: _check_compact_tail,
}


def certificate_check(space: SpaceSpec, verdict: OracleVerdict, res: Resolution,
                      seed: int = DEFAULT_SEED) -> Verdict:
    """Replay the certificate's numerical facts; Holds iff all of them do."""
    if verdict.status is Lebesgue.UNKNOWN or verdict.certificate is None:
        raise ValueError("cannot check an Unknown oracle verdict")
    result = _CHECKS[type(verdict.certificate)](space, verdict.certificate, res, seed)
    note = type(verdict.certificate).__name__ + ": " + result.note
    if verdict.by_analogy:
        note += " (by analogy)"
    return Verdict(result.status, result.witness, note, result.certified, result.parts)
