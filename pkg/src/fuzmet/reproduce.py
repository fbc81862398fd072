"""The example matrix: seven catalogued spaces, their Lebesgue verdicts,
and weak G-completeness evidence, plus the cross-row consistency checks."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import expr as ex
from .covers import (
    CATALOG,
    Cover,
    Lebesgue,
    catalog_name,
    certificate_check,
    family_lebesgue_oracle,
    lebesgue_search,
)
from .sequences import (
    Formula,
    Interleave,
    Resolution,
    SequenceError,
    cluster_evidence,
    g_cauchy_verdict,
    metric_bridge_check,
    sequence_to_json,
)
from .spaces import DEFAULT_SEED, Interval, Metric, SpaceError, SpaceSpec, sample_points, space_from_json
from .verdict import Verdict, Witness, fails, holds, inconclusive

ROWS = ("reciprocal_product", "stationary_ratio", "shifted_ratio", "phi_ratio",
        "phi_product", "ex27", "weak_g_example")

R_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
T_GRID = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class Facts:
    compact: bool
    precompact: bool
    complete: bool
    lebesgue: bool
    weak_g: bool


# Known classification of each catalogued space. Compactness, precompactness
# and completeness are taken as given; the last two columns are what the
# matrix recomputes.
KNOWN = {
    "reciprocal_product": Facts(False, False, True, True, True),
    "stationary_ratio": Facts(False, False, True, False, False),
    "shifted_ratio": Facts(False, False, True, False, False),
    "phi_ratio": Facts(False, False, True, True, True),
    "phi_product": Facts(False, False, True, True, True),
    "ex27": Facts(False, False, True, False, True),
    "weak_g_example": Facts(False, False, True, True, True),
}


def _f(s, start=1):
    return Formula(ex.parse(s), start)


# G-Cauchy probe sequences per row, with extra cluster candidates to try
PROBES = {
    "reciprocal_product": [(_f("n"), ()), (Interleave(ex.parse("1"), ex.parse("n+1")), (1.0,)),
                           (_f("1"), (1.0,))],
    "stationary_ratio": [(_f("n"), ()), (_f("1+1/n"), (1.0,))],
    "shifted_ratio": [(_f("n"), ()), (_f("1/n"), (0.0,))],
    "phi_ratio": [(_f("n"), ()), (_f("1+1/n"), (1.0,)), (_f("2"), (2.0,))],
    "phi_product": [(_f("1/(n+1)"), ()), (_f("1-1/(n+1)"), ()), (_f("1/2"), (0.5,))],
    "ex27": [(_f("n"), ()), (Interleave(ex.parse("n"), ex.parse("n+1/n")), ()), (_f("3"), (3.0,))],
    "weak_g_example": [(_f("1/2^n", 2), ()), (_f("1/2+1/(2*n)"), (0.5,)), (_f("1-1/(2*n)"), (1.0,))],
}


class FixtureError(FileNotFoundError):
    pass


def fixtures_dir() -> Path:
    env = os.environ.get("FUZMET_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).with_name("fixtures")


def load_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FixtureError(f"no such file: {path}")
    with path.open(encoding="utf-8") as fh:
        return json.load(fh)


def load_fixture(name: str, directory: Path | None = None) -> SpaceSpec:
    return space_from_json(load_json((directory or fixtures_dir()) / f"{name}.json"))


def ex27_sample(n_max: int) -> list[float]:
    return sorted({float(n) for n in range(1, n_max + 1)} | {n + 1.0 / n for n in range(1, n_max + 1)})


@dataclass(frozen=True)
class Row:
    row: str
    family: str
    compact: str
    precompact: str
    complete: str
    lebesgue: str
    certificate: str
    weak_g_evidence: str
    by_analogy: bool
    match: bool

    def to_json(self) -> dict:
        return {"matrix_row": self.row, "family": self.family, "compact": self.compact,
                "precompact": self.precompact, "complete": self.complete,
                "lebesgue": self.lebesgue, "certificate": self.certificate,
                "weak_g_evidence": self.weak_g_evidence, "by_analogy": self.by_analogy,
                "match": self.match}


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def weak_g_probe(space: SpaceSpec, seq, hints, res: Resolution, seed: int) -> tuple[str, Verdict]:
    """Classify one probe: ``clusters``, ``escapes`` (G-Cauchy with no cluster
    evidence anywhere), ``not_g_cauchy`` or ``unresolved``."""
    g = g_cauchy_verdict(space, seq, res)
    if g.fails:
        return "not_g_cauchy", g
    if not g.holds:
        return "unresolved", g
    candidates = list(hints) + sample_points(space.domain, 20, seed)
    verdicts = [cluster_evidence(space, seq, c, res) for c in candidates]
    hit = next((v for v in verdicts if v.holds), None)
    if hit is not None:
        return "clusters", hit
    if all(v.fails for v in verdicts):
        return "escapes", fails(verdicts[0].witness, f"no cluster evidence at {len(candidates)} candidates")
    return "unresolved", next(v for v in verdicts if not v.fails)


def evaluate_row(name: str, space: SpaceSpec, res: Resolution, seed: int):
    """One matrix row plus the (check, params, verdict) reports behind it."""
    reports = []
    oracle = family_lebesgue_oracle(space)
    cert_status = "n/a"
    lebesgue = "unknown"
    if oracle.status is not Lebesgue.UNKNOWN:
        cert = certificate_check(space, oracle, res, seed)
        cert_status = cert.status.value
        reports.append(("certificate", {"row": name, "oracle": oracle.status.value,
                                        "source": oracle.source, "expect": "holds"}, cert))
        if cert.holds:
            lebesgue = _yn(oracle.status is Lebesgue.LEBESGUE)
        else:
            lebesgue = "unverified"

    outcomes = []
    for seq, hints in PROBES.get(name, []):
        try:
            outcome, v = weak_g_probe(space, seq, hints, res, seed)
        except (SpaceError, SequenceError) as err:
            outcome, v = "unresolved", inconclusive(str(err))
        outcomes.append(outcome)
        v = replace(v, note=f"{outcome}: {v.note}")
        reports.append(("weak_g_probe", {"row": name, "sequence": sequence_to_json(seq),
                                         "hints": list(hints)}, v))
    weak_g = "refuted" if "escapes" in outcomes else "consistent"

    known_name = catalog_name(space)
    facts = KNOWN.get(known_name) if known_name else None
    compact = _yn(facts.compact) if facts else "unknown"
    precompact = _yn(facts.precompact) if facts else "unknown"
    complete = _yn(facts.complete) if facts else "unknown"
    expected = KNOWN[name]
    match = (known_name == name
             and lebesgue == _yn(expected.lebesgue)
             and weak_g == ("consistent" if expected.weak_g else "refuted"))
    row = Row(name, space.family.value, compact, precompact, complete, lebesgue, cert_status,
              weak_g, oracle.by_analogy, match)
    return row, reports


def consistency_checks(rows: list[Row]) -> list[tuple[str, dict, Verdict]]:
    """Matrix-level checks of the inclusion chain compact < Lebesgue < weak-G."""
    out = []

    def check(name, offenders, note):
        w = Witness(params={"rows": [r.row for r in offenders]})
        v = fails(w, note) if offenders else holds(Witness(params={"rows": [r.row for r in rows]}), note)
        out.append((name, {"rule": note, "expect": "holds"}, v))

    check("lebesgue_implies_weak_g",
          [r for r in rows if r.lebesgue == "yes" and r.weak_g_evidence != "consistent"],
          "every Lebesgue row has consistent weak-G evidence")
    check("precompact_weak_g_implies_lebesgue",
          [r for r in rows if r.precompact == "yes" and r.weak_g_evidence == "consistent"
           and r.lebesgue != "yes"],
          "every precompact row with consistent weak-G evidence is Lebesgue")
    check("compact_iff_precompact_complete",
          [r for r in rows if r.compact != "unknown"
           and (r.compact == "yes") != (r.precompact == "yes" and r.complete == "yes")],
          "compact exactly when precompact and complete")
    check("compact_rows_lebesgue",
          [r for r in rows if r.compact == "yes" and r.lebesgue != "yes"],
          "no compact row fails to be Lebesgue")
    check("lebesgue_not_compact_exists",
          [] if any(r.lebesgue == "yes" and r.compact == "no" for r in rows) else rows,
          "some Lebesgue row is not compact")
    check("weak_g_not_lebesgue_exists",
          [] if any(r.lebesgue == "no" and r.weak_g_evidence == "consistent" for r in rows) else rows,
          "some weak-G row is not Lebesgue")
    return out


def random_formula_sequences(count: int, seed: int, N: int) -> list[Formula]:
    """Seeded random formula sequences that evaluate finitely on [1, N]."""
    rng = np.random.default_rng(seed)
    out = []
    ns = np.arange(1, N + 1)
    while len(out) < count:
        e = ex.random_expr(rng, 4)
        _, divzero, nonfinite = ex.evaluate_many(e, ns)
        if not (divzero | nonfinite).any():
            out.append(Formula(e))
    return out


def bridge_property(count: int = 200, seed: int = DEFAULT_SEED, N: int = 200) -> Verdict:
    domain = Interval(-np.inf, np.inf)
    res = Resolution(N=N)
    for seq in random_formula_sequences(count, seed, N):
        v = metric_bridge_check(Metric.EUCLIDEAN, domain, seq, res)
        if not v.holds:
            return fails(v.witness, f"bridge disagreement on {ex.to_text(seq.expr)}: {v.note}",
                         parts=(v,))
    return holds(Witness((count,), params={"N": N, "seed": seed}),
                 f"metric and fuzzy pseudo-Cauchy searches agree on {count} sequences")


def ex27_refinement(n_max: int = 1000) -> Verdict:
    space = CATALOG["ex27"][0]
    sample = ex27_sample(n_max)
    return lebesgue_search(space, sample, Cover.singletons(sample), R_GRID, T_GRID)


def run_matrix(directory: Path | None = None, seed: int = DEFAULT_SEED,
               res: Resolution | None = None):
    """Returns ``(rows, reports)``; raises FixtureError for a missing fixture."""
    directory = directory or fixtures_dir()
    res = res or Resolution()
    spaces = {name: load_fixture(name, directory) for name in ROWS}
    rows, reports = [], []
    for name in ROWS:
        row, rep = evaluate_row(name, spaces[name], res, seed)
        rows.append(row)
        reports += rep
    reports.append(("bridge", {"sequences": 200, "N": 200, "seed": seed, "expect": "holds"},
                    bridge_property(seed=seed)))
    reports.append(("ex27_refinement", {"n_max": 1000, "r_grid": list(R_GRID), "t_grid": list(T_GRID),
                                        "expect": "fails"}, ex27_refinement()))
    reports += consistency_checks(rows)
    return rows, reports


def unmet_expectations(reports) -> list[str]:
    """Checks whose status differs from the ``expect`` recorded in params."""
    return [check for check, params, v in reports
            if "expect" in params and v.status.value != params["expect"]]


def matrix_table(rows: list[Row]) -> str:
    cols = ["row", "compact", "precompact", "lebesgue", "weak_g_evidence", "match"]
    data = [[r.row, r.compact, r.precompact, r.lebesgue + (" *" if r.by_analogy else ""),
             r.weak_g_evidence, "ok" if r.match else "MISMATCH"] for r in rows]
    widths = [max(len(c), *(len(d[i]) for d in data)) for i, c in enumerate(cols)]
    line = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()
    out = [line(cols), line(["-" * w for w in widths])] + [line(d) for d in data]
    if any(r.by_analogy for r in rows):
        out.append("* certificate argued by analogy")
    return "\n".join(out)
