"""fuzmet command line: JSON-lines reports with severity exit codes.

Exit codes: 0 holds, 1 fails, 2 inconclusive, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import expr as ex
from . import reproduce
from .covers import (
    Cover,
    CoverError,
    Lebesgue,
    cover_from_json,
    certificate_check,
    equinormality_estimate,
    family_lebesgue_oracle,
    lebesgue_search,
    precompact_net,
    refinement_check,
)
from .sequences import (
    Resolution,
    SequenceError,
    cauchy_verdict,
    cluster_evidence,
    g_cauchy_verdict,
    pseudo_cauchy_verdict,
    sequence_from_json,
    sequence_to_json,
    terms,
)
from .spaces import DEFAULT_SEED, SpaceError, check_gv_axioms, sample_points, space_from_json
from .tnorms import check_tnorm_axioms
from .verdict import Status, Verdict, Witness, holds, inconclusive, worst

USAGE_ERROR = 3


class UsageError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


_SHOWN = ("row", "eps", "t", "r", "candidate")


@dataclass(frozen=True)
class Report:
    check: str
    params: dict
    verdict: dict
    witness: dict
    elapsed_ms: int = 0

    @classmethod
    def of(cls, check: str, params: dict, v: Verdict, elapsed_ms: int = 0) -> "Report":
        return cls(check, _clean(params), _clean(v.to_json()), _clean(v.witness.to_json()), elapsed_ms)

    @property
    def status(self) -> Status:
        return Status(self.verdict["status"])

    def to_json(self) -> dict:
        return {"check": self.check, "params": self.params, "verdict": self.verdict,
                "witness": self.witness, "elapsed_ms": self.elapsed_ms}

    def to_line(self) -> str:
        return json.dumps(self.to_json(), allow_nan=False)

    @classmethod
    def from_line(cls, line: str) -> "Report":
        d = json.loads(line)
        return cls(d["check"], d["params"], d["verdict"], d["witness"], d["elapsed_ms"])

    def human(self) -> str:
        mark = " (certified)" if self.verdict.get("certified") else ""
        at = ", ".join(f"{k}={self.params[k]}" for k in _SHOWN
                       if isinstance(self.params.get(k), (int, float, str)) and k in self.params)
        at = f" [{at}]" if at else ""
        return f"{self.check}{at}: {self.verdict['status']}{mark}  {self.verdict['note']}"


class _Out:
    def __init__(self, args):
        self.json = args.json
        self.timing = args.timing
        self.reports: list[Report] = []
        self._t0 = time.perf_counter()

    def emit(self, check: str, params: dict, v: Verdict) -> Report:
        ms = 0
        if self.timing:
            now = time.perf_counter()
            ms = int(round((now - self._t0) * 1000))
            self._t0 = now
        rep = Report.of(check, params, v, ms)
        self.reports.append(rep)
        print(rep.to_line() if self.json else rep.human())
        return rep

    def exit_code(self) -> int:
        return worst(r.status for r in self.reports).exit_code


# -- argument helpers --------------------------------------------------------------

def _load_json_arg(text: str, what: str):
    """Inline JSON, or a path to a JSON file."""
    p = Path(text)
    if not text.lstrip().startswith(("{", "[", '"')) and (p.suffix == ".json" or p.exists()):
        if not p.is_file():
            raise UsageError(f"{what}: no such file: {text}")
        text = p.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"{what}: invalid JSON ({err.msg} at offset {err.pos})") from None


def _load_space(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such space file: {path}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: invalid JSON ({err.msg} at offset {err.pos})") from None
    return space_from_json(obj), obj


def _points(text: str, size: int, what: str) -> list[float]:
    """A JSON list of numbers, or a sequence object whose first ``size`` terms are taken."""
    obj = _load_json_arg(text, what)
    if isinstance(obj, list):
        try:
            return [ex.parse_constant(v) for v in obj]
        except (ex.ExprSyntaxError, ValueError, ArithmeticError) as err:
            raise UsageError(f"{what}: {err}") from None
    return [float(v) for v in terms(sequence_from_json(obj), size)]


def _resolution(args) -> Resolution:
    kw = {"N": args.window, "k": args.start, "tol": args.tol}
    if args.eps:
        kw["eps_grid"] = tuple(args.eps)
    if args.t:
        kw["t_grid"] = tuple(args.t)
    try:
        return Resolution(**kw)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _res_params(res: Resolution) -> dict:
    return {"eps": list(res.eps_values()), "t": list(res.t_values()), "k": res.k, "N": res.N}


def _emit_parts(out: _Out, check: str, params: dict, v: Verdict):
    for p in v.parts:
        wp = p.witness.params
        out.emit(check, {**params, "eps": wp.get("eps"), "t": wp.get("t")}, p)
    out.emit(f"{check}_summary", params, v)


# -- commands ------------------------------------------------------------------

def cmd_axioms(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    params = {"space": args.space, "samples": args.samples, "seed": args.seed, "tol": args.tol}
    out.emit("gv_axioms", params, check_gv_axioms(space, args.samples, args.seed, args.tol))
    out.emit("tnorm_axioms", {"tnorm": space.tnorm.value, "grid_size": args.grid},
             check_tnorm_axioms(space.tnorm, args.grid))
    return out.exit_code()


_CLASSIFIERS = {
    "cauchy": lambda s, q, r, a: cauchy_verdict(s, q, r),
    "gcauchy": lambda s, q, r, a: g_cauchy_verdict(s, q, r),
    "pseudocauchy": lambda s, q, r, a: pseudo_cauchy_verdict(s, q, r, a.distinct),
}


def cmd_classify(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    seq = sequence_from_json(_load_json_arg(args.sequence, "sequence"))
    res = _resolution(args)
    params = {"space": args.space, "sequence": sequence_to_json(seq), "mode": args.mode,
              **_res_params(res)}
    if args.mode == "pseudocauchy":
        params["distinct"] = args.distinct
    _emit_parts(out, args.mode, params, _CLASSIFIERS[args.mode](space, seq, res, args))
    return out.exit_code()


def cmd_cluster(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    seq = sequence_from_json(_load_json_arg(args.sequence, "sequence"))
    res = _resolution(args)
    candidates = args.candidate or sample_points(space.domain, args.candidates, args.seed)
    base = {"space": args.space, "sequence": sequence_to_json(seq), **_res_params(res)}
    for c in candidates:
        out.emit("cluster", {**base, "candidate": c}, cluster_evidence(space, seq, c, res))
    return out.exit_code()


def _cover(text: str, sample: list[float]) -> Cover:
    if text == "singletons":
        return Cover.singletons(sample)
    if text == "whole":
        return Cover.whole(sample)
    return cover_from_json(_load_json_arg(text, "cover"))


def cmd_refine(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    cover = _cover(args.cover, [])
    if args.sample:
        sample = _points(args.sample, args.sample_size, "sample")
        cover = _cover(args.cover, sample)
    elif args.cover in ("singletons", "whole"):
        raise UsageError("--sample is required with a generated cover")
    else:
        sample = cover.points()
    r_grid = args.r or list(reproduce.R_GRID)
    t_grid = args.t or list(reproduce.T_GRID)
    params = {"space": args.space, "sample_size": len(sample), "cover_sets": len(cover.sets),
              "r": r_grid, "t": t_grid}
    if len(r_grid) == 1 and len(t_grid) == 1:
        v = refinement_check(space, sample, cover, r_grid[0], t_grid[0])
        out.emit("refine", params, v)
    else:
        v = lebesgue_search(space, sample, cover, r_grid, t_grid)
        for p in v.parts:
            wp = p.witness.params
            out.emit("refine", {**params, "r": wp.get("r"), "t": wp.get("t")}, p)
        out.emit("lebesgue_search", params, v)
    return out.exit_code()


def cmd_equinormal(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    B = _points(args.b, args.size, "b")
    C = _points(args.c, args.size, "c")
    est = equinormality_estimate(space, B, C, args.s)
    w = Witness((), (est.b, est.c), (est.value,), {"t": est.s, "label": est.label})
    out.emit("equinormal", {"space": args.space, "b_size": len(B), "c_size": len(C), "s": args.s},
             holds(w, f"{est.label}: {est.value!r}"))
    return out.exit_code()


def cmd_net(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    sample = _points(args.sample, args.sample_size, "sample")
    net = precompact_net(space, sample, args.r, args.t)
    params = {"space": args.space, "sample_size": len(sample), "r": args.r, "t": args.t}
    wp = {"size": net.size, "metric_agrees": net.agrees}
    w = Witness((net.size,), net.centers, (), wp)
    if net.agrees is False:
        v = inconclusive(f"fuzzy net of {net.size} centers differs from the metric net "
                         f"of {len(net.metric_centers)}", w)
    else:
        v = holds(w, f"greedy net with {net.size} centers covers the sample")
    out.emit("net", params, v)
    return out.exit_code()


def cmd_oracle(args, out: _Out) -> int:
    space, _ = _load_space(args.space)
    oracle = family_lebesgue_oracle(space)
    params = {"space": args.space, "oracle": oracle.status.value, "source": oracle.source,
              "by_analogy": oracle.by_analogy}
    if oracle.status is Lebesgue.UNKNOWN:
        out.emit("oracle", params, inconclusive("no catalogued certificate for this space"))
    else:
        out.emit("oracle", params, certificate_check(space, oracle, _resolution(args), args.seed))
    return out.exit_code()


def cmd_examples(args, out: _Out) -> int:
    try:
        rows, reports = reproduce.run_matrix(seed=args.seed)
    except reproduce.FixtureError as err:
        raise UsageError(f"missing fixture: {err}") from None
    for check, params, v in reports:
        out.emit(check, params, v)
    matrix_lines = [json.dumps(r.to_json()) for r in rows]
    table = reproduce.matrix_table(rows)
    print("\n".join(matrix_lines) if args.json else table)

    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "reports.jsonl").write_text("".join(r.to_line() + "\n" for r in out.reports), encoding="utf-8")
        (d / "matrix.jsonl").write_text("".join(m + "\n" for m in matrix_lines), encoding="utf-8")
        (d / "matrix.txt").write_text(table + "\n", encoding="utf-8")

    bad_rows = [r.row for r in rows if not r.match]
    unmet = reproduce.unmet_expectations(reports)
    if bad_rows:
        print(f"matrix mismatch in rows: {', '.join(bad_rows)}", file=sys.stderr)
    if unmet:
        print(f"unexpected verdicts: {', '.join(unmet)}", file=sys.stderr)
    return 1 if bad_rows or unmet else 0


# -- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _global_flags(p: argparse.ArgumentParser, default):
    d = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(DEFAULT_SEED), help="RNG seed (default %(default)s)")
    p.add_argument("--json", action="store_true", default=d(False), help="emit JSON lines")
    p.add_argument("--tol", type=float, default=d(1e-9), help="numeric tolerance")
    p.add_argument("--timing", action="store_true", default=d(False),
                   help="record wall-clock elapsed_ms (breaks byte-identical output)")


def _window_flags(p):
    p.add_argument("--eps", type=float, nargs="+", help="epsilon grid")
    p.add_argument("--t", type=float, nargs="+", help="t grid")
    p.add_argument("--window", type=int, default=1000, help="last index N (default %(default)s)")
    p.add_argument("--start", type=int, default=0, help="first checkpoint k (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzmet", description="Numerical checks for fuzzy metric spaces.")
    _global_flags(parser, True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, False)
        p.set_defaults(fn=fn)
        return p

    p = command("axioms", cmd_axioms, "check the fuzzy metric and t-norm axioms")
    p.add_argument("space")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--grid", type=int, default=101, help="t-norm grid size")

    p = command("classify", cmd_classify, "classify a sequence")
    p.add_argument("space")
    p.add_argument("sequence", help="sequence JSON (inline or file)")
    p.add_argument("--mode", choices=sorted(_CLASSIFIERS), required=True)
    p.add_argument("--distinct", action="store_true",
                   help="pseudo-Cauchy pairs must have distinct terms")
    _window_flags(p)

    p = command("cluster", cmd_cluster, "look for cluster evidence at candidate points")
    p.add_argument("space")
    p.add_argument("sequence")
    p.add_argument("--candidate", type=float, nargs="+", help="candidate points")
    p.add_argument("--candidates", type=int, default=20, help="seeded candidates when none given")
    _window_flags(p)

    p = command("refine", cmd_refine, "test whether uniform balls refine a cover")
    p.add_argument("space")
    p.add_argument("--cover", default="singletons", help="cover JSON, 'singletons' or 'whole'")
    p.add_argument("--sample", help="JSON list of points or a sequence object")
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--r", type=float, nargs="+")
    p.add_argument("--t", type=float, nargs="+")

    p = command("equinormal", cmd_equinormal, "sample sup of M between two disjoint sets")
    p.add_argument("space")
    p.add_argument("--b", required=True, help="JSON list or sequence object")
    p.add_argument("--c", required=True, help="JSON list or sequence object")
    p.add_argument("--size", type=int, default=100, help="terms taken from sequence sets")
    p.add_argument("--s", type=float, default=1.0)

    p = command("net", cmd_net, "greedy ball net of a sample")
    p.add_argument("space")
    p.add_argument("--sample", required=True)
    p.add_argument("--sample-size", type=int, default=1000)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--t", type=float, required=True)

    p = command("oracle", cmd_oracle, "catalogued Lebesgue verdict and its certificate check")
    p.add_argument("space")
    _window_flags(p)

    p = command("examples", cmd_examples, "reproduce the example matrix")
    p.add_argument("--out", help="directory for reports.jsonl, matrix.jsonl and matrix.txt")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args)
    try:
        return args.fn(args, out)
    except (UsageError, SpaceError, SequenceError, CoverError, ex.ExprSyntaxError,
            ex.EvalError, ValueError) as err:
        print(f"fuzmet {args.command}: error: {err}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
