"""Acceptance criteria, one check each. Prints a PASS/FAIL line per criterion
under pytest (``-s`` not required) or when run directly."""

import json
import math
import sys
import time

import numpy as np
import pytest

from clirun import DATA, SUITE, run
from fuzmet import expr as ex
from fuzmet.covers import (
    CATALOG,
    Cover,
    Lebesgue,
    certificate_check,
    equinormality_estimate,
    family_lebesgue_oracle,
    lebesgue_search,
)
from fuzmet.reproduce import R_GRID, T_GRID, bridge_property, ex27_sample
from fuzmet.sequences import (
    Formula,
    Interleave,
    Resolution,
    cluster_evidence,
    g_cauchy_verdict,
    pseudo_cauchy_verdict,
)
from fuzmet.spaces import (
    DEFAULT_SEED,
    Family,
    Interval,
    Metric,
    SpaceSpec,
    check_gv_axioms,
    sample_points,
    space_from_json,
)
from fuzmet.tnorms import TNorm, apply_many, check_tnorm_axioms

REALS = Interval(-math.inf, math.inf)


def F(text, start=1):
    return Formula(ex.parse(text), start)


def c1_gv_axioms():
    t0 = time.perf_counter()
    families = [CATALOG[n][0] for n in ("reciprocal_product", "stationary_ratio", "shifted_ratio",
                                        "phi_ratio", "phi_product")]
    families.append(SpaceSpec(Family.STANDARD, REALS, metric=Metric.EUCLIDEAN))
    bad = [s.family.value for s in families if not check_gv_axioms(s, 1000, DEFAULT_SEED, 1e-9).holds]
    corrupt = space_from_json(json.loads((DATA / "corrupt_stationary_ratio.json").read_text()))
    cv = check_gv_axioms(corrupt, 1000, DEFAULT_SEED, 1e-9)
    elapsed = time.perf_counter() - t0
    ok = not bad and cv.fails and cv.witness.params["axiom"] == "positivity" and elapsed < 5
    return ok, f"{len(families) - len(bad)}/6 families hold, corrupt -> {cv.status.value} " \
               f"({cv.witness.params.get('axiom')}), {elapsed:.2f}s"


def c2_repeated_vs_distinct():
    space, oracle = CATALOG["reciprocal_product"]
    seq = Interleave(ex.parse("1"), ex.parse("n+1"))
    loose = pseudo_cauchy_verdict(space, seq, Resolution(), distinct_terms=False)
    strict = pseudo_cauchy_verdict(space, seq, Resolution(), distinct_terms=True)
    # brute force over 101 * 100 ordered off-diagonal pairs
    pts = np.arange(1, 102, dtype=float)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    off = X != Y
    V = np.where(off, 1.0 / (X * Y), -np.inf)
    i, j = np.unravel_index(np.argmax(V), V.shape)
    top, pair = float(V[i, j]), (float(pts[i]), float(pts[j]))
    cert = certificate_check(space, oracle, Resolution())
    ok = (loose.holds and strict.fails and strict.certified and int(off.sum()) >= 10_000
          and top == 0.5 and pair == (1.0, 2.0) and cert.holds)
    return ok, f"loose {loose.status.value}, distinct {strict.status.value} (certified={strict.certified}), " \
               f"brute max {top} at {pair} over {int(off.sum())} pairs"


def c3_stationary_ratio():
    space, oracle = CATALOG["stationary_ratio"]
    res = Resolution(N=10_000)
    g = g_cauchy_verdict(space, F("n"), res)
    pc = pseudo_cauchy_verdict(space, F("n"), res, distinct_terms=True)
    every = len(g.parts) == 9 and all(p.holds for p in g.parts) and all(p.holds for p in pc.parts)
    cands = sample_points(space.domain, 20, DEFAULT_SEED)
    clustered = [c for c in cands if not cluster_evidence(space, F("n"), c, res).fails]
    cert = certificate_check(space, family_lebesgue_oracle(space), Resolution())
    ok = every and g.holds and pc.holds and not clustered and oracle.status is Lebesgue.NOT_LEBESGUE \
        and cert.holds
    return ok, f"gcauchy {g.status.value}, distinct pseudo-Cauchy {pc.status.value}, " \
               f"{20 - len(clustered)}/20 candidates without cluster evidence, certificate {cert.status.value}"


def c4_half_t():
    notes = []
    ok = True
    for name in ("phi_ratio", "phi_product"):
        space, oracle = CATALOG[name]
        pts = np.array(sample_points(space.domain, 2000, DEFAULT_SEED))
        x, y = pts[:1000], pts[1000:]
        keep = x != y
        gap = float(np.max(np.abs(space.evaluate(x[keep], y[keep], 0.5)
                                  - space.evaluate(x[keep], y[keep], 1.0) / 2)))
        cert = certificate_check(space, oracle, Resolution())
        ok &= keep.sum() == 1000 and gap <= 1e-12 and oracle.status is Lebesgue.LEBESGUE and cert.holds
        notes.append(f"{name}: max gap {gap:.1e}, certificate {cert.status.value}")
    return ok, "; ".join(notes)


def c5_ex27():
    space = CATALOG["ex27"][0]
    sample = ex27_sample(1000)
    v = lebesgue_search(space, sample, Cover.singletons(sample), R_GRID, T_GRID)
    witnessed = 0
    for p in v.parts:
        a, b = sorted(p.witness.points)
        n, t = round(a), p.witness.params["t"]
        if p.fails and a == n and b == n + 1 / n and abs(p.witness.values[0] - t / (t + 1 / n)) <= 1e-12:
            witnessed += 1
    est = equinormality_estimate(space, [float(n) for n in range(1, 101)],
                                 [n + 1 / n for n in range(2, 101)], 1.0)
    ok = v.fails and witnessed == 27 and abs(est.value - 100 / 101) <= 1e-12
    return ok, f"{witnessed}/27 grid points fail with (n, n+1/n) witnesses; sup estimate {est.value!r}"


def c6_bridge():
    v = bridge_property(200, DEFAULT_SEED, 200)
    return v.holds, v.note


def c7_weak_g_example():
    space, oracle = CATALOG["weak_g_example"]
    g = g_cauchy_verdict(space, F("1/2^n", 2), Resolution())
    floor_half = g.fails and all(p.witness.values == (0.5,) for p in g.parts)
    cl = cluster_evidence(space, F("1/2+1/(2*n)"), 0.5, Resolution())
    cert = certificate_check(space, oracle, Resolution())
    ok = floor_half and cl.holds and oracle.status is Lebesgue.LEBESGUE and cert.holds
    return ok, f"1/2^n gcauchy {g.status.value} (constant 1/2: {floor_half}), " \
               f"cluster at 1/2 {cl.status.value}, certificate {cert.status.value}"


def c8_tnorm_order():
    g = np.arange(101) / 100
    A, B = np.meshgrid(g, g, indexing="ij")
    luk, prod, mn = (apply_many(k, A, B) for k in (TNorm.LUKASIEWICZ, TNorm.PRODUCT, TNorm.MINIMUM))
    ordered = bool(np.all(luk <= prod + 1e-15) and np.all(prod <= mn + 1e-15))
    axioms = all(check_tnorm_axioms(k, 101).holds for k in TNorm)
    return ordered and axioms, f"ordering {ordered}, axioms hold for all three: {axioms}"


def c9_examples_matrix():
    proc = run("examples", "--json")
    out = [json.loads(line) for line in proc.stdout.splitlines()]
    matrix = [line for line in proc.stdout.splitlines() if line.startswith('{"matrix_row"')]
    golden = (DATA / "examples_matrix.jsonl").read_text()
    same = "\n".join(matrix) + "\n" == golden
    checks = {o["check"]: o["verdict"]["status"] for o in out if "check" in o}
    rows_ok = checks.get("lebesgue_implies_weak_g") == "holds" and \
        checks.get("precompact_weak_g_implies_lebesgue") == "holds"
    ok = proc.returncode == 0 and len(matrix) == 7 and same and rows_ok
    return ok, f"exit {proc.returncode}, {len(matrix)} rows, golden match {same}, row checks {rows_ok}"


def c10_determinism():
    first = [run(*cmd).stdout for cmd in SUITE]
    second = [run(*cmd).stdout for cmd in SUITE]
    diff = [cmd[0] for cmd, a, b in zip(SUITE, first, second) if a != b]
    return not diff and all(first), f"{len(SUITE) - len(diff)}/{len(SUITE)} commands byte-identical"


CRITERIA = [
    (1, "GV axiom suite", c1_gv_axioms),
    (2, "repeated-term vs distinct-term pseudo-Cauchy", c2_repeated_vs_distinct),
    (3, "stationary ratio divergent sequence", c3_stationary_ratio),
    (4, "half-t identity families", c4_half_t),
    (5, "ex27 refinement failure and equinormality", c5_ex27),
    (6, "metric/fuzzy pseudo-Cauchy bridge", c6_bridge),
    (7, "weak-G example space", c7_weak_g_example),
    (8, "t-norm ordering and axioms", c8_tnorm_order),
    (9, "example matrix golden file", c9_examples_matrix),
    (10, "CLI determinism", c10_determinism),
]


def _line(num, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} [{num}] {title}: {detail}"


@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num, title, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(num, title, ok, detail))
    sys.exit(0 if all(results) else 1)
