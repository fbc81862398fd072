"""Sequences and resolution-bounded classifiers.

Every "for all eps, t, k" quantifier is replaced by a finite grid of
(eps, t) and an index window [k, N]. Scans are deterministic: the reported
witness is always the first one in lexicographic (checkpoint, j, n) order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import expr as ex
from .spaces import (
    Domain,
    Family,
    Metric,
    SpaceError,
    SpaceSpec,
    contains_many,
    off_diagonal_sup,
)
from .verdict import Verdict, Witness, combine, fails, holds, inconclusive

CLUSTER_MIN_HITS = 10
FLOOR_MARGIN = 0.1
_BLOCK = 1 << 21


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class Formula:
    """``x_n = expr(n + start - 1)``."""

    expr: ex.Expr
    start: int = 1


@dataclass(frozen=True)
class Interleave:
    """``x_{2m-1} = a(m')``, ``x_{2m} = b(m')`` with ``m' = m + start - 1``."""

    a: ex.Expr
    b: ex.Expr
    start: int = 1


@dataclass(frozen=True)
class Explicit:
    points: tuple


SequenceSpec = Union[Formula, Interleave, Explicit]


def _checked(e: ex.Expr, ns: np.ndarray, offset: int) -> np.ndarray:
    values, divzero, nonfinite = ex.evaluate_many(e, ns)
    bad = divzero | nonfinite
    if bad.any():
        i = int(np.argmax(bad))
        why = "division by zero" if divzero[i] else "non-finite result"
        raise SequenceError(f"term {i + offset}: {why}")
    return values


def terms(seq: SequenceSpec, count: int) -> np.ndarray:
    """``x_1 .. x_count`` as a float array."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if isinstance(seq, Explicit):
        if count > len(seq.points):
            raise SequenceError(f"index {count} beyond explicit prefix of length {len(seq.points)}")
        return np.asarray(seq.points[:count], dtype=np.float64)
    if isinstance(seq, Formula):
        ns = np.arange(seq.start, seq.start + count, dtype=np.int64)
        return _checked(seq.expr, ns, 1)
    m = (count + 1) // 2
    ms = np.arange(seq.start, seq.start + m, dtype=np.int64)
    out = np.empty(2 * m)
    out[0::2] = _checked(seq.a, ms, 1)
    out[1::2] = _checked(seq.b, ms, 1)
    return out[:count]


def term(seq: SequenceSpec, n: int) -> float:
    if n < 1:
        raise ValueError(f"index must be a positive integer, got {n}")
    if isinstance(seq, Explicit):
        if n > len(seq.points):
            raise SequenceError(f"index {n} beyond explicit prefix of length {len(seq.points)}")
        return float(seq.points[n - 1])
    if isinstance(seq, Formula):
        return _term_value(seq.expr, n + seq.start - 1, n)
    m = (n + 1) // 2 + seq.start - 1
    return _term_value(seq.a if n % 2 else seq.b, m, n)


def _term_value(e, i, n):
    try:
        return ex.evaluate(e, i)
    except ex.EvalError as err:
        raise SequenceError(f"term {n}: {err}") from None


def is_constant(seq: SequenceSpec) -> bool:
    """Provably constant (no occurrence of n, equal interleaved halves)."""
    if isinstance(seq, Formula):
        return not ex.has_var(seq.expr)
    if isinstance(seq, Interleave):
        if ex.has_var(seq.a) or ex.has_var(seq.b):
            return False
        try:
            return ex.evaluate(seq.a, 1) == ex.evaluate(seq.b, 1)
        except ex.EvalError:
            return False
    return False


@dataclass(frozen=True)
class Resolution:
    eps: float = 0.1
    t: float = 1.0
    k: int = 0
    N: int = 1000
    tol: float = 1e-9
    eps_grid: tuple | None = (0.5, 0.1, 0.01)
    t_grid: tuple | None = (0.1, 1.0, 10.0)

    def __post_init__(self):
        if not 0 <= self.k < self.N:
            raise ValueError(f"need 0 <= k < N, got k={self.k}, N={self.N}")
        for e in self.eps_values():
            if not 0.0 < e < 1.0:
                raise ValueError(f"eps must lie in (0, 1), got {e}")
        for t in self.t_values():
            if not t > 0.0:
                raise ValueError(f"t must be positive, got {t}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def eps_values(self) -> tuple:
        return tuple(self.eps_grid) if self.eps_grid else (self.eps,)

    def t_values(self) -> tuple:
        return tuple(self.t_grid) if self.t_grid else (self.t,)

    def grid(self) -> list[tuple[float, float]]:
        return [(e, t) for e in self.eps_values() for t in self.t_values()]

    def ladder(self) -> list[int]:
        ks, kp = [], self.k
        while kp <= self.N / 2:
            ks.append(kp)
            kp = 2 * kp + 1
        return ks or [self.k]


# -- scanning ------------------------------------------------------------------

def _window(domain: Domain, seq: SequenceSpec, res: Resolution) -> tuple[np.ndarray, int]:
    """1-based term array (slot 0 unused) and the effective upper index."""
    hi = res.N
    if isinstance(seq, Explicit):
        hi = min(hi, len(seq.points))
    x = np.empty(hi + 1)
    x[0] = np.nan
    x[1:] = terms(seq, hi)
    inside = contains_many(domain, x[1:])
    if not inside.all():
        i = int(np.argmin(inside))
        raise SpaceError(f"term {i + 1} = {x[i + 1]!r} is outside the domain")
    return x, hi


@dataclass(frozen=True)
class _Pair:
    j: int
    n: int
    value: float


def _scan_pairs(x, lo, hi, score, accept, distinct=False, prefer="max"):
    """First (j, n) with lo <= j < n <= hi, in lexicographic order, whose
    score is accepted. Also returns the extreme-scoring eligible pair seen
    (the whole window when there is no hit)."""
    best = None
    if hi - lo < 1:
        return None, None
    cols = np.arange(lo, hi + 1)
    cap = max(1, _BLOCK // cols.size)
    step, j0 = 1, lo
    while j0 < hi:
        # grow the block so early hits stay cheap and full scans stay vectorised
        rows = np.arange(j0, min(j0 + step, hi))
        c = cols[cols > j0]
        j0 += step
        step = min(2 * step, cap)
        xr, xc = x[rows][:, None], x[c][None, :]
        V = score(xr, xc)
        valid = c[None, :] > rows[:, None]
        if distinct:
            valid = valid & (xr != xc)
        hit = valid & accept(V)
        if hit.any():
            r, q = np.argwhere(hit)[0]
            return _Pair(int(rows[r]), int(c[q]), float(V[r, q])), best
        if valid.any():
            fill = -np.inf if prefer == "max" else np.inf
            masked = np.where(valid, V, fill)
            idx = np.argmax(masked) if prefer == "max" else np.argmin(masked)
            r, q = np.unravel_index(idx, masked.shape)
            v = float(masked[r, q])
            if best is None or (v > best.value if prefer == "max" else v < best.value):
                best = _Pair(int(rows[r]), int(c[q]), v)
    return None, best


def _ladder_scan(x, hi, ladder, score, accept, distinct):
    """Per checkpoint k': first pair with both indices > k', or the best pair
    seen when the checkpoint is exhausted."""
    out = []
    last = None
    for kp in ladder:
        lo = max(kp + 1, 1)
        if last is not None and last.j >= lo:
            out.append((kp, last, None))
            continue
        if out and out[-1][1] is None:
            # a later checkpoint only sees a subset of the exhausted window
            out.append((kp, None, None))
            continue
        hit, best = _scan_pairs(x, lo, hi, score, accept, distinct, "max")
        out.append((kp, hit, best))
        last = hit
    return out


def _pair_witness(x, pairs, params) -> Witness:
    idx, pts, vals = [], [], []
    for p in pairs:
        idx += [p.j, p.n]
        pts += [float(x[p.j]), float(x[p.n])]
        vals.append(p.value)
    return Witness(tuple(idx), tuple(pts), tuple(vals), params)


def _membership_score(space: SpaceSpec, t: float):
    return lambda a, b: space.evaluate(a, b, t)


# -- classifiers ---------------------------------------------------------------

def cauchy_verdict(space: SpaceSpec, seq: SequenceSpec, res: Resolution) -> Verdict:
    x, hi = _window(space.domain, seq, res)
    lo = max(res.k, 1)
    constant = is_constant(seq)
    parts = []
    for eps, t in res.grid():
        level = 1.0 - eps
        params = {"eps": eps, "t": t, "k": res.k, "N": hi}
        hit, worst = _scan_pairs(x, lo, hi, _membership_score(space, t),
                                 lambda v: v <= level, prefer="min")
        if hit is not None:
            parts.append(fails(_pair_witness(x, [hit], params),
                               f"M(x_m, x_n, t) <= 1 - eps at m={hit.j}, n={hit.n}"))
        elif constant:
            parts.append(holds(Witness((lo, hi), (), (), {**params, "tail": "constant"}),
                               "constant sequence: every pair has M = 1", certified=True))
        else:
            w = _pair_witness(x, [worst], params) if worst else Witness((lo, hi), params=params)
            parts.append(inconclusive("window exhausted; Cauchy not certifiable by sampling", w))
    return combine(parts)


def pseudo_cauchy_verdict(space: SpaceSpec, seq: SequenceSpec, res: Resolution,
                          distinct_terms: bool = False) -> Verdict:
    x, hi = _window(space.domain, seq, res)
    ladder = res.ladder()
    bound = off_diagonal_sup(space) if distinct_terms else None
    parts = []
    for eps, t in res.grid():
        level = 1.0 - eps
        params = {"eps": eps, "t": t, "distinct": distinct_terms, "checkpoints": ladder}
        steps = _ladder_scan(x, hi, ladder, _membership_score(space, t),
                             lambda v: v > level, distinct_terms)
        exhausted = next((s for s in steps if s[1] is None), None)
        if exhausted is None:
            parts.append(holds(_pair_witness(x, [s[1] for s in steps], params),
                               "every checkpoint has a close pair"))
            continue
        kp, _, best = exhausted
        params = {**params, "k": kp, "N": hi}
        w = _pair_witness(x, [best], params) if best else Witness((kp, hi), params=params)
        if bound is not None and bound <= level:
            parts.append(fails(w, f"no distinct pair can exceed {bound} <= 1 - eps", certified=True,
                               ))
        else:
            parts.append(fails(w, f"window exhausted after checkpoint {kp} with no close pair"))
    return combine(parts)


def g_cauchy_verdict(space: SpaceSpec, seq: SequenceSpec, res: Resolution) -> Verdict:
    x, hi = _window(space.domain, seq, res)
    lo = max(res.k, 1)
    parts = []
    if hi - lo < 2:
        return inconclusive("window too short for consecutive pairs")
    ns = np.arange(lo, hi)
    mid = lo + (hi - lo) // 2
    for eps, t in res.grid():
        level = 1.0 - eps
        params = {"eps": eps, "t": t, "k": res.k, "N": hi}
        c = space.evaluate(x[ns], x[ns + 1], t)
        bad = np.flatnonzero(~(c > level))
        n0 = lo if bad.size == 0 else int(ns[bad[-1]]) + 1
        if n0 <= mid:
            i = n0 - lo
            parts.append(holds(_pair_witness(x, [_Pair(n0, n0 + 1, float(c[i]))], {**params, "n0": n0}),
                               f"M(x_n, x_n+1, t) > 1 - eps for all n >= {n0}"))
            continue
        tail = ns >= mid
        top = int(np.argmax(np.where(tail, c, -np.inf)))
        ceiling = float(c[top])
        if ceiling <= min(level, 1.0 - FLOOR_MARGIN):
            n = int(ns[top])
            parts.append(fails(_pair_witness(x, [_Pair(n, n + 1, ceiling)], {**params, "floor": ceiling}),
                               f"consecutive values stay <= {ceiling!r} over the last half-window"))
        else:
            parts.append(inconclusive("no stable threshold and no floor", Witness((lo, hi), params=params)))
    return combine(parts)


def cluster_evidence(space: SpaceSpec, seq: SequenceSpec, candidate: float,
                     res: Resolution) -> Verdict:
    if not contains_many(space.domain, [candidate])[0]:
        raise SpaceError(f"candidate {candidate!r} is outside the domain")
    x, hi = _window(space.domain, seq, res)
    lo = max(res.k, 1)
    ns = np.arange(lo, hi + 1)
    mid = lo + (hi - lo) // 2
    tail = ns >= mid
    parts = []
    for eps, t in res.grid():
        level = 1.0 - eps
        params = {"eps": eps, "t": t, "k": res.k, "N": hi, "candidate": candidate}
        vals = space.evaluate(x[ns], candidate, t)
        hits = vals > level
        count = int(hits.sum())
        params["hits"] = count
        if not (hits & tail).any():
            i = int(np.argmax(np.where(tail, vals, -np.inf)))
            w = Witness((int(ns[i]),), (float(x[ns[i]]), candidate), (float(vals[i]),), params)
            parts.append(fails(w, f"no term within the ball in the tail [{mid}, {hi}]"))
        elif count >= CLUSTER_MIN_HITS:
            first, last = np.flatnonzero(hits)[[0, -1]]
            w = Witness((int(ns[first]), int(ns[last])),
                        (float(x[ns[first]]), candidate, float(x[ns[last]]), candidate),
                        (float(vals[first]), float(vals[last])), params)
            parts.append(holds(w, f"{count} terms inside the ball"))
        else:
            parts.append(inconclusive(f"only {count} hits", Witness((lo, hi), params=params)))
    return combine(parts)


def metric_bridge_check(metric: Metric, domain: Domain, seq: SequenceSpec, res: Resolution,
                        distinct_terms: bool = False) -> Verdict:
    """Compare the metric-side and standard-fuzzy-side pseudo-Cauchy window
    searches checkpoint by checkpoint.

    The metric side accepts ``d < t*eps/(1-eps)``; the fuzzy side accepts
    ``t/(t+d) > 1-eps``. Each eps is also checked at ``t = 1-eps`` against
    ``d < eps`` directly.
    """
    space = SpaceSpec(Family.STANDARD, domain, metric=metric)
    x, hi = _window(domain, seq, res)
    ladder = res.ladder()
    dist = metric.distance
    rows = [(eps, t, t * eps / (1.0 - eps), "scale") for eps, t in res.grid()]
    rows += [(eps, 1.0 - eps, eps, "substitution") for eps in res.eps_values()]
    parts = []
    for eps, t, delta, kind in rows:
        level = 1.0 - eps
        params = {"eps": eps, "t": t, "delta": delta, "row": kind, "checkpoints": ladder}
        m_side = _ladder_scan(x, hi, ladder, dist, lambda v: v < delta, distinct_terms)
        f_side = _ladder_scan(x, hi, ladder, _membership_score(space, t),
                              lambda v: v > level, distinct_terms)
        clash = next(((a, b) for a, b in zip(m_side, f_side) if (a[1] is None) != (b[1] is None)), None)
        if clash is not None:
            a, b = clash
            found = a[1] or b[1]
            extra = {"metric": metric.value} if a[1] is not None else {}
            w = _pair_witness(x, [found], {**params, "k": a[0], "metric_found": a[1] is not None, **extra})
            parts.append(fails(w, f"metric and fuzzy searches disagree at checkpoint {a[0]}"))
            continue
        fuzzy_hits = [s[1] for s in f_side if s[1] is not None]
        w = _pair_witness(x, fuzzy_hits[:1], params) if fuzzy_hits else Witness(tuple(ladder), params=params)
        parts.append(holds(w, "both sides agree at every checkpoint"
                           + ("" if fuzzy_hits else " (no close pair on either side)")))
    return combine(parts)


# -- JSON ----------------------------------------------------------------------

def _parse_field(obj, key):
    if key not in obj:
        raise SequenceError(f"sequence: missing field {key!r}")
    try:
        return ex.parse(str(obj[key]))
    except ex.ExprSyntaxError as err:
        raise SequenceError(f"sequence.{key}: {err}") from err


def sequence_from_json(obj) -> SequenceSpec:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as err:
            raise SequenceError(f"sequence: invalid JSON ({err.msg})") from None
    if not isinstance(obj, dict):
        raise SequenceError("sequence: expected an object")
    kind = obj.get("kind")
    start = int(obj.get("from", 1))
    if kind == "formula":
        return Formula(_parse_field(obj, "expr"), start)
    if kind == "interleave":
        return Interleave(_parse_field(obj, "a"), _parse_field(obj, "b"), start)
    if kind == "explicit":
        if "points" not in obj:
            raise SequenceError("sequence: missing field 'points'")
        return Explicit(tuple(ex.parse_constant(p) for p in obj["points"]))
    raise SequenceError(f"sequence.kind: unknown kind {kind!r}")


def sequence_to_json(seq: SequenceSpec) -> dict:
    if isinstance(seq, Formula):
        out = {"kind": "formula", "expr": ex.to_text(seq.expr)}
    elif isinstance(seq, Interleave):
        out = {"kind": "interleave", "a": ex.to_text(seq.a), "b": ex.to_text(seq.b)}
    else:
        return {"kind": "explicit", "points": [float(p) for p in seq.points]}
    if seq.start != 1:
        out["from"] = seq.start
    return out
