"""Concrete fuzzy metric families, their point domains, and axiom checks.

Points are IEEE doubles and point equality is exact representation
equality; every family here separates ``x == y`` from ``x != y``
discontinuously, so a tolerance on point equality would break the
identity axiom.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import expr as ex
from .tnorms import TNorm, apply_many
from .verdict import Verdict, Witness, fails, holds

DEFAULT_SEED = 1299093
BALL_TOL = 1e-9
SEQ_RANGE_BOUND = 10**6
SEQ_RANGE_RTOL = 1e-12
_MAX_INT = float(2**52)


class SpaceError(ValueError):
    """Invalid point, parameter or space description."""


# -- domains -----------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise SpaceError(f"bad interval bounds ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class PositiveIntegers:
    pass


@dataclass(frozen=True)
class ExplicitSet:
    points: tuple


@dataclass(frozen=True)
class UnionOf:
    parts: tuple


@dataclass(frozen=True)
class SequenceRange:
    """``{expr(n) : n >= start}``, enumerated up to ``SEQ_RANGE_BOUND`` indices."""

    expr: ex.Expr
    start: int = 1

    def __post_init__(self):
        if self.start < 1:
            raise SpaceError("sequence range must start at n >= 1")


Domain = Union[Interval, PositiveIntegers, ExplicitSet, UnionOf, SequenceRange]


@functools.lru_cache(maxsize=32)
def _range_table(domain: SequenceRange):
    ns = np.arange(domain.start, domain.start + SEQ_RANGE_BOUND, dtype=np.int64)
    values, divzero, nonfinite = ex.evaluate_many(domain.expr, ns)
    ok = ~(divzero | nonfinite)
    values, ns = values[ok], ns[ok]
    order = np.argsort(values, kind="stable")
    return values, ns, values[order]


def contains_many(domain: Domain, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if isinstance(domain, Interval):
        lo_ok = xs > domain.lo if domain.lo_open else xs >= domain.lo
        hi_ok = xs < domain.hi if domain.hi_open else xs <= domain.hi
        return lo_ok & hi_ok & np.isfinite(xs)
    if isinstance(domain, PositiveIntegers):
        return np.isfinite(xs) & (xs >= 1) & (np.floor(xs) == xs)
    if isinstance(domain, ExplicitSet):
        return np.isin(xs, np.asarray(domain.points, dtype=np.float64))
    if isinstance(domain, UnionOf):
        out = np.zeros(xs.shape, dtype=bool)
        for part in domain.parts:
            out |= contains_many(part, xs)
        return out
    _, _, sorted_vals = _range_table(domain)
    if sorted_vals.size == 0:
        return np.zeros(xs.shape, dtype=bool)
    pos = np.clip(np.searchsorted(sorted_vals, xs), 0, sorted_vals.size - 1)
    best = np.zeros(xs.shape, dtype=bool)
    for cand in (pos, np.clip(pos - 1, 0, None)):
        v = sorted_vals[cand]
        best |= (v == xs) | (np.abs(v - xs) <= SEQ_RANGE_RTOL * np.abs(xs))
    return best & np.isfinite(xs)


def contains(domain: Domain, x: float) -> bool:
    return bool(contains_many(domain, [x])[0])


def is_empty(domain: Domain) -> bool:
    if isinstance(domain, Interval):
        return domain.lo == domain.hi and (domain.lo_open or domain.hi_open)
    if isinstance(domain, ExplicitSet):
        return len(domain.points) == 0
    if isinstance(domain, UnionOf):
        return all(is_empty(p) for p in domain.parts)
    if isinstance(domain, SequenceRange):
        return _range_table(domain)[0].size == 0
    return False


def _heavy(u: float) -> float:
    return u / (1.0 - u)


def _draw(domain: Domain, rng: np.random.Generator) -> float:
    if isinstance(domain, Interval):
        lo, hi = domain.lo, domain.hi
        while True:
            u = rng.random()
            if math.isinf(lo) and math.isinf(hi):
                v = 2.0 * u - 1.0
                x = v / (1.0 - abs(v))
            elif math.isinf(hi):
                x = lo + _heavy(u)
            elif math.isinf(lo):
                x = hi - _heavy(u)
            else:
                x = lo + u * (hi - lo)
            if contains_many(domain, [x])[0]:
                return float(x)
    if isinstance(domain, PositiveIntegers):
        return float(min(1.0 + math.floor(_heavy(rng.random())), _MAX_INT))
    if isinstance(domain, ExplicitSet):
        return float(domain.points[int(rng.integers(0, len(domain.points)))])
    if isinstance(domain, UnionOf):
        parts = [p for p in domain.parts if not is_empty(p)]
        return _draw(parts[int(rng.integers(0, len(parts)))], rng)
    values, _, _ = _range_table(domain)
    i = min(int(math.floor(_heavy(rng.random()))), values.size - 1)
    return float(values[i])


def sample_points(domain: Domain, count: int, seed: int) -> list[float]:
    """Deterministic sample of ``count`` domain points.

    Unbounded intervals go through ``u -> lo + u/(1-u)``; open endpoints are
    rejected and redrawn.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if is_empty(domain):
        raise SpaceError("cannot sample from an empty domain")
    rng = np.random.default_rng(seed)
    return [_draw(domain, rng) for _ in range(count)]


def enumerate_prefix(domain: Domain, count: int) -> list[float] | None:
    """First ``count`` points of a countable domain in natural order, or
    None when the domain has no natural enumeration."""
    if isinstance(domain, PositiveIntegers):
        return [float(i) for i in range(1, count + 1)]
    if isinstance(domain, ExplicitSet):
        return sorted(set(float(p) for p in domain.points))[:count]
    if isinstance(domain, SequenceRange):
        return [float(v) for v in _range_table(domain)[0][:count]]
    return None


def within(domain: Domain, region: Interval) -> bool:
    """Whether every point of ``domain`` lies in ``region``."""
    if isinstance(domain, Interval):
        lo_ok = domain.lo > region.lo or (domain.lo == region.lo and (domain.lo_open or not region.lo_open))
        hi_ok = domain.hi < region.hi or (domain.hi == region.hi and (domain.hi_open or not region.hi_open))
        return lo_ok and hi_ok
    if isinstance(domain, PositiveIntegers):
        return contains_many(region, [1.0])[0] and math.isinf(region.hi)
    if isinstance(domain, ExplicitSet):
        return bool(contains_many(region, domain.points).all())
    if isinstance(domain, UnionOf):
        return all(within(p, region) for p in domain.parts)
    return bool(contains_many(region, _range_table(domain)[0]).all())


def integral(domain: Domain) -> bool:
    """Whether every point of ``domain`` is a positive integer."""
    if isinstance(domain, PositiveIntegers):
        return True
    if isinstance(domain, UnionOf):
        return all(integral(p) for p in domain.parts)
    if isinstance(domain, ExplicitSet):
        return bool(contains_many(PositiveIntegers(), domain.points).all())
    if isinstance(domain, SequenceRange):
        return bool(contains_many(PositiveIntegers(), _range_table(domain)[0]).all())
    return False


# -- metrics and families ----------------------------------------------------

class Metric(enum.Enum):
    EUCLIDEAN = "euclidean"
    DISCRETE = "discrete"

    def distance(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self is Metric.EUCLIDEAN:
            return np.abs(x - y)
        return np.where(x == y, 0.0, 1.0)


class Family(enum.Enum):
    STANDARD = "standard"
    STATIONARY_RATIO = "stationary_ratio"
    SHIFTED_RATIO = "shifted_ratio"
    PHI_RATIO = "phi_ratio"
    PHI_PRODUCT = "phi_product"
    RECIPROCAL_PRODUCT = "reciprocal_product"


STATIONARY_FAMILIES = {Family.STATIONARY_RATIO, Family.RECIPROCAL_PRODUCT}

# region each family is defined on; reciprocal_product is checked as a subset of N
REGIONS = {
    Family.STATIONARY_RATIO: Interval(0.0, math.inf, True, True),
    Family.SHIFTED_RATIO: Interval(0.0, math.inf, False, True),
    Family.PHI_RATIO: Interval(0.0, math.inf, True, True),
    Family.PHI_PRODUCT: Interval(0.0, 1.0, True, True),
}


def phi(t):
    return np.minimum(t, 1.0)


@dataclass(frozen=True)
class SpaceSpec:
    family: Family
    domain: Domain
    tnorm: TNorm = TNorm.PRODUCT
    metric: Metric | None = None

    def __post_init__(self):
        if self.family is Family.STANDARD and self.metric is None:
            raise SpaceError("standard family needs a metric")
        if self.family is not Family.STANDARD and self.metric is not None:
            raise SpaceError(f"metric is only meaningful for the standard family, not {self.family.value}")
        if self.family is Family.SHIFTED_RATIO and self.tnorm is not TNorm.PRODUCT:
            raise SpaceError("shifted_ratio is only supported with the product t-norm")

    def in_region(self) -> bool:
        if self.family is Family.STANDARD:
            return True
        if self.family is Family.RECIPROCAL_PRODUCT:
            return integral(self.domain)
        return within(self.domain, REGIONS[self.family])

    def evaluate(self, x, y, t):
        """Vectorised M(x, y, t) with no validation."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        f = self.family
        with np.errstate(all="ignore"):
            if f is Family.STANDARD:
                out = t / (t + self.metric.distance(x, y))
            elif f is Family.STATIONARY_RATIO:
                out = np.minimum(x, y) / np.maximum(x, y) + 0.0 * t
            elif f is Family.SHIFTED_RATIO:
                out = (np.minimum(x, y) + t) / (np.maximum(x, y) + t)
            elif f is Family.PHI_RATIO:
                out = np.minimum(x, y) / np.maximum(x, y) * phi(t)
            elif f is Family.PHI_PRODUCT:
                out = x * y * phi(t)
            else:
                out = 1.0 / (x * y) + 0.0 * t
        return np.where(x == y, 1.0, out)

    def tnorm_apply(self, a, b):
        return apply_many(self.tnorm, a, b)


def _check_points(space: SpaceSpec, **pts):
    for name, v in pts.items():
        if not contains(space.domain, v):
            raise SpaceError(f"point {name}={v!r} is outside the domain")


def _check_t(t: float, name: str = "t"):
    if not t > 0 or math.isinf(t):
        raise SpaceError(f"{name} must be a positive real, got {t!r}")


def membership(space: SpaceSpec, x: float, y: float, t: float) -> float:
    _check_t(t)
    _check_points(space, x=x, y=y)
    return float(space.evaluate(x, y, t))


class Ball(enum.Enum):
    IN = "in"
    OUT = "out"
    BOUNDARY = "boundary"


def classify_ball(values, r: float, tol: float = BALL_TOL) -> np.ndarray:
    """0 = in, 1 = out, 2 = boundary, elementwise for membership values."""
    values = np.asarray(values, dtype=np.float64)
    level = 1.0 - r
    out = np.full(values.shape, 2, dtype=np.int8)
    out[values > level + tol] = 0
    out[values < level - tol] = 1
    return out


def ball_contains(space: SpaceSpec, center: float, r: float, t: float, y: float,
                  tol: float = BALL_TOL) -> Ball:
    if not 0.0 < r < 1.0:
        raise SpaceError(f"radius must lie in (0, 1), got {r!r}")
    m = membership(space, center, y, t)
    return (Ball.IN, Ball.OUT, Ball.BOUNDARY)[int(classify_ball(m, r, tol))]


# -- axiom checks -------------------------------------------------------------

def _sample_scales(rng: np.random.Generator, count: int) -> np.ndarray:
    return 10.0 ** rng.uniform(-3.0, 3.0, size=count)


_CONTINUITY_KNOTS = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 10.0])


def check_gv_axioms(space: SpaceSpec, sample_count: int, seed: int, tol: float) -> Verdict:
    """Sampled check of the George-Veeramani axioms.

    Each axiom is a separate pass over all sampled tuples, in order:
    positivity, range, identity, symmetry, triangle, monotonicity in t,
    continuity in t. The first failing pass reports its first tuple.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    rng = np.random.default_rng(seed)
    pts = np.asarray(sample_points(space.domain, 3 * sample_count, int(rng.integers(2**62))))
    x, y, z = pts[0::3], pts[1::3], pts[2::3]
    t = _sample_scales(rng, sample_count)
    s = _sample_scales(rng, sample_count)
    name = space.family.value

    def witness(i, axiom, points, values, **extra):
        return Witness((int(i),), tuple(float(p) for p in points), tuple(float(v) for v in values),
                       {"axiom": axiom, "t": float(t[i]), **extra})

    def first(mask):
        return int(np.argmax(mask)) if mask.any() else None

    mxy = space.evaluate(x, y, t)
    i = first(~(mxy > 0))
    if i is not None:
        return fails(witness(i, "positivity", (x[i], y[i]), (mxy[i],)),
                     f"{name}: M(x,y,t) <= 0")
    i = first(mxy > 1.0 + tol)
    if i is not None:
        return fails(witness(i, "range", (x[i], y[i]), (mxy[i],)), f"{name}: M(x,y,t) > 1")

    mxx = space.evaluate(x, x, t)
    i = first(mxx != 1.0)
    if i is not None:
        return fails(witness(i, "identity", (x[i], x[i]), (mxx[i],)), f"{name}: M(x,x,t) != 1")
    i = first((x != y) & (mxy >= 1.0))
    if i is not None:
        return fails(witness(i, "identity", (x[i], y[i]), (mxy[i],)),
                     f"{name}: M(x,y,t) = 1 for x != y")

    myx = space.evaluate(y, x, t)
    i = first(mxy != myx)
    if i is not None:
        return fails(witness(i, "symmetry", (x[i], y[i], y[i], x[i]), (mxy[i], myx[i])),
                     f"{name}: M(x,y,t) != M(y,x,t)")

    myz = space.evaluate(y, z, s)
    mxz = space.evaluate(x, z, t + s)
    lhs = space.tnorm_apply(mxy, myz)
    i = first(lhs > mxz + tol)
    if i is not None:
        return fails(Witness((i,), (x[i], y[i], z[i]), (lhs[i], mxz[i]),
                             {"axiom": "triangle", "t": float(t[i]), "s": float(s[i]), "replay": False}),
                     f"{name}: triangle inequality violated")

    mlater = space.evaluate(x, y, t + s)
    i = first(mlater < mxy - tol)
    if i is not None:
        return fails(Witness((i,), (x[i], y[i]), (mxy[i], mlater[i]),
                             {"axiom": "monotone_t", "t": float(t[i]), "s": float(s[i]), "replay": False}),
                     f"{name}: t -> M(x,y,t) decreases")

    # two-sided probes at the sampled t and at round values where
    # piecewise definitions tend to break
    knots = np.resize(_CONTINUITY_KNOTS, sample_count)
    for where in (t, knots):
        diffs = [np.abs(space.evaluate(x, y, where + h)
                        - space.evaluate(x, y, np.maximum(where - h / 2, where / 2)))
                 for h in (1e-2, 1e-4, 1e-6)]
        growing = (diffs[1] > diffs[0] + tol) | (diffs[2] > diffs[1] + tol) | (diffs[2] >= 1e-3)
        i = first(growing)
        if i is not None:
            return fails(Witness((i,), (x[i], y[i]), tuple(float(d[i]) for d in diffs),
                                 {"axiom": "continuity", "t": float(where[i]), "replay": False}),
                         f"{name}: t -> M(x,y,t) looks discontinuous")

    slack = float(np.min(mxz - lhs))
    return holds(Witness((sample_count,), (), (slack,), {"seed": seed, "tol": tol}),
                 f"{name}: axioms hold on {sample_count} samples")


def replay_witness(space: SpaceSpec, w: Witness, tol: float = 1e-9) -> bool:
    """Re-evaluate a pair witness; witnesses without a ``t`` replay trivially."""
    if "t" not in w.params or w.params.get("replay") is False:
        return True
    t = w.params["t"]
    pairs = np.asarray(w.points, dtype=np.float64).reshape(-1, 2)
    if len(pairs) != len(w.values):
        return False
    metric = w.params.get("metric")
    if metric is not None:
        got = Metric(metric).distance(pairs[:, 0], pairs[:, 1])
    else:
        got = space.evaluate(pairs[:, 0], pairs[:, 1], t)
    return bool(np.all(np.abs(got - np.asarray(w.values)) <= tol))


# -- JSON ---------------------------------------------------------------------

def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise SpaceError(f"{where}: missing field {key!r}")
    return obj[key]


def domain_from_json(obj) -> Domain:
    if not isinstance(obj, dict):
        raise SpaceError("domain: expected an object")
    kind = _need(obj, "kind", "domain")
    if kind == "interval":
        try:
            lo = ex.parse_constant(_need(obj, "lo", "domain"))
            hi = ex.parse_constant(_need(obj, "hi", "domain"))
        except (ex.ExprSyntaxError, ValueError, ArithmeticError) as err:
            raise SpaceError(f"domain.lo/hi: {err}") from None
        return Interval(lo, hi, bool(obj.get("lo_open", True)), bool(obj.get("hi_open", True)))
    if kind == "positive_integers":
        return PositiveIntegers()
    if kind == "explicit":
        pts = _need(obj, "points", "domain")
        try:
            return ExplicitSet(tuple(ex.parse_constant(p) for p in pts))
        except (ex.ExprSyntaxError, ValueError, ArithmeticError) as err:
            raise SpaceError(f"domain.points: {err}") from None
    if kind == "union":
        return UnionOf(tuple(domain_from_json(p) for p in _need(obj, "parts", "domain")))
    if kind == "seq_range":
        try:
            e = ex.parse(str(_need(obj, "expr", "domain")))
        except ex.ExprSyntaxError as err:
            raise SpaceError(f"domain.expr: {err}") from None
        return SequenceRange(e, int(obj.get("from", 1)))
    raise SpaceError(f"domain.kind: unknown kind {kind!r}")


def _endpoint(v: float) -> str:
    return "inf" if v == math.inf else "-inf" if v == -math.inf else repr(v)


def domain_to_json(d: Domain) -> dict:
    if isinstance(d, Interval):
        return {"kind": "interval", "lo": _endpoint(d.lo), "hi": _endpoint(d.hi),
                "lo_open": d.lo_open, "hi_open": d.hi_open}
    if isinstance(d, PositiveIntegers):
        return {"kind": "positive_integers"}
    if isinstance(d, ExplicitSet):
        return {"kind": "explicit", "points": [float(p) for p in d.points]}
    if isinstance(d, UnionOf):
        return {"kind": "union", "parts": [domain_to_json(p) for p in d.parts]}
    return {"kind": "seq_range", "expr": ex.to_text(d.expr), "from": d.start}


_SPACE_KEYS = {"family", "metric", "domain", "tnorm", "name", "note", "allow_any_domain"}


def space_from_json(obj) -> SpaceSpec:
    """Build a space from its JSON description.

    Domains outside the family's region are rejected unless the object sets
    ``"allow_any_domain": true`` (used for deliberately corrupted fixtures).
    """
    if not isinstance(obj, dict):
        raise SpaceError("space: expected an object")
    extra = set(obj) - _SPACE_KEYS
    if extra:
        raise SpaceError(f"space: unknown field {sorted(extra)[0]!r}")
    name = _need(obj, "family", "space")
    try:
        family = Family(name)
    except ValueError:
        raise SpaceError(f"space.family: unknown family {name!r}") from None
    try:
        tnorm = TNorm.from_name(obj.get("tnorm", "product"))
    except ValueError as err:
        raise SpaceError(f"space.tnorm: {err}") from None
    metric = None
    if "metric" in obj:
        try:
            metric = Metric(obj["metric"])
        except ValueError:
            raise SpaceError(f"space.metric: unknown metric {obj['metric']!r}") from None
    space = SpaceSpec(family, domain_from_json(_need(obj, "domain", "space")), tnorm, metric)
    if not obj.get("allow_any_domain", False) and not space.in_region():
        raise SpaceError(f"space.domain: not contained in the region of {family.value}")
    return space


def space_to_json(space: SpaceSpec) -> dict:
    out = {"family": space.family.value}
    if space.metric is not None:
        out["metric"] = space.metric.value
    out["domain"] = domain_to_json(space.domain)
    out["tnorm"] = space.tnorm.value
    return out


def off_diagonal_sup(space: SpaceSpec) -> float | None:
    """A proven bound on M(x, y, t) over x != y, uniform in t, when the
    family has one.

    Reciprocal product on positive integers: distinct x, y have xy >= 2.
    """
    if space.family is Family.RECIPROCAL_PRODUCT and integral(space.domain):
        return 0.5
    return None
