import json
import shutil

import pytest

from clirun import DATA, FIXTURES, SUITE, fx, run
from fuzmet.cli import Report, main
from fuzmet.verdict import Status, Witness, Verdict

INTERLEAVE = '{"kind":"interleave","a":"1","b":"n+1"}'
N_SEQ = '{"kind":"formula","expr":"n"}'


def lines(proc):
    return [json.loads(line) for line in proc.stdout.splitlines() if line.strip()]


def test_axioms_exit_codes():
    assert run("axioms", fx("stationary_ratio")).returncode == 0
    bad = run("axioms", DATA / "corrupt_stationary_ratio.json", "--json")
    assert bad.returncode == 1
    gv = lines(bad)[0]
    assert gv["check"] == "gv_axioms" and gv["witness"]["params"]["axiom"] == "positivity"
    missing = run("axioms", "missing.json")
    assert missing.returncode == 3 and "missing.json" in missing.stderr


@pytest.mark.parametrize("content,field", [
    ('{"family": "stationary_ratio"}', "domain"),
    ('{"family": "stationary_ratio", "domain": {"kind": "interval", "lo": "0"}}', "'hi'"),
    ('{"family": "stationary_ratio", "domain": {"kind": "positive_integers"}, "tnorm": "max"}', "space.tnorm"),
    ('{"family": ', "invalid JSON"),
])
def test_malformed_space_names_field(tmp_path, content, field):
    p = tmp_path / "space.json"
    p.write_text(content)
    proc = run("axioms", p)
    assert proc.returncode == 3
    assert field in proc.stderr


def test_classify_examples():
    assert run("classify", fx("reciprocal_product"), INTERLEAVE, "--mode", "pseudocauchy").returncode == 0
    d = run("classify", fx("reciprocal_product"), INTERLEAVE, "--mode", "pseudocauchy", "--distinct", "--json")
    assert d.returncode == 1
    summary = lines(d)[-1]
    assert summary["check"] == "pseudocauchy_summary"
    assert summary["verdict"] == {"status": "fails", "certified": True,
                                  "note": "no distinct pair can exceed 0.5 <= 1 - eps"}
    assert run("classify", fx("stationary_ratio"), N_SEQ, "--mode", "gcauchy").returncode == 0


def test_classify_one_report_per_grid_point():
    out = lines(run("classify", fx("stationary_ratio"), N_SEQ, "--mode", "gcauchy", "--json",
                    "--eps", "0.5", "0.1", "--t", "1", "2", "3"))
    assert len(out) == 7
    assert [(o["params"]["eps"], o["params"]["t"]) for o in out[:6]] == \
        [(0.5, 1.0), (0.5, 2.0), (0.5, 3.0), (0.1, 1.0), (0.1, 2.0), (0.1, 3.0)]
    assert out[-1]["check"] == "gcauchy_summary"


def test_classify_syntax_error_reports_offset():
    proc = run("classify", fx("stationary_ratio"), '{"kind":"formula","expr":"n+)"}', "--mode", "cauchy")
    assert proc.returncode == 3
    assert "offset 2" in proc.stderr


def test_inconclusive_exit_code():
    seq = '{"kind":"formula","expr":"1+1/(n+1000)"}'
    assert run("classify", fx("stationary_ratio"), seq, "--mode", "cauchy", "--window", "200").returncode == 2
    # no catalogued certificate for the corrupt space
    assert run("oracle", DATA / "corrupt_stationary_ratio.json").returncode == 2


@pytest.mark.parametrize("statuses,code", [
    ([], 0),
    (["holds", "holds"], 0),
    (["holds", "inconclusive"], 2),
    (["inconclusive", "fails", "holds"], 1),
    (["fails", "inconclusive"], 1),
])
def test_exit_code_is_worst_severity(statuses, code):
    from fuzmet.verdict import worst
    assert worst(Status(s) for s in statuses).exit_code == code


def test_global_flags_either_side():
    a = run("--json", "--seed", "5", "axioms", fx("phi_ratio"))
    b = run("axioms", fx("phi_ratio"), "--json", "--seed", "5")
    assert a.stdout == b.stdout and lines(a)[0]["params"]["seed"] == 5
    c = run("axioms", fx("phi_ratio"), "--json")
    assert lines(c)[0]["params"]["seed"] == 1299093


def test_usage_errors_exit_3():
    assert run().returncode == 3
    assert run("frobnicate").returncode == 3
    assert run("classify", fx("stationary_ratio"), N_SEQ).returncode == 3
    assert run("classify", fx("stationary_ratio"), N_SEQ, "--mode", "cauchy", "--eps", "2").returncode == 3


def test_report_key_order_and_round_trip():
    out = run("oracle", fx("ex27"), "--json").stdout.splitlines()
    assert list(json.loads(out[0])) == ["check", "params", "verdict", "witness", "elapsed_ms"]
    rep = Report.from_line(out[0])
    assert rep.to_line() == out[0]
    assert rep.status is Status.HOLDS and rep.elapsed_ms == 0


def test_report_non_finite_values():
    rep = Report.of("x", {"hi": float("inf")}, Verdict(Status.HOLDS, Witness(values=(float("-inf"),))))
    assert json.loads(rep.to_line())["witness"]["values"] == ["-inf"]


def test_refine_and_net_and_equinormal():
    r = run("refine", fx("ex27"), "--cover", fx("ex27_cover"), "--json")
    assert r.returncode == 1 and len(lines(r)) == 28
    one = run("refine", fx("reciprocal_product"), "--sample", "[1,2,3,4,5,6,7,8,9,10]",
              "--r", "0.4", "--t", "1")
    assert one.returncode == 0
    net = lines(run("net", fx("stationary_ratio"), "--sample", N_SEQ, "--sample-size", "100",
                    "--r", "0.5", "--t", "1", "--json"))[0]
    assert net["witness"]["points"] == [1, 2, 4, 8, 16, 32, 64]
    eq = lines(run("equinormal", fx("ex27"), "--b", N_SEQ, "--c", '{"kind":"formula","expr":"n+1/n","from":2}',
                   "--size", "100", "--json"))[0]
    assert abs(eq["witness"]["values"][0] - 100 / 101) <= 1e-12


def test_examples_golden():
    proc = run("examples", "--json")
    assert proc.returncode == 0, proc.stderr
    matrix = [line for line in proc.stdout.splitlines() if line.startswith('{"matrix_row"')]
    assert "\n".join(matrix) + "\n" == (DATA / "examples_matrix.jsonl").read_text()


def test_examples_human_table():
    proc = run("examples")
    assert proc.returncode == 0
    assert "weak_g_example" in proc.stdout and "MISMATCH" not in proc.stdout


def test_examples_tampered_fixture(tmp_path):
    d = tmp_path / "fx"
    shutil.copytree(FIXTURES, d)
    obj = json.loads((d / "phi_ratio.json").read_text())
    obj["family"] = "stationary_ratio"
    (d / "phi_ratio.json").write_text(json.dumps(obj))
    proc = run("examples", "--json", env={"FUZMET_FIXTURES": str(d)})
    assert proc.returncode == 1
    assert "phi_ratio" in proc.stderr
    rows = {o["matrix_row"]: o for o in lines(proc) if "matrix_row" in o}
    assert rows["phi_ratio"]["match"] is False
    assert all(r["match"] for name, r in rows.items() if name != "phi_ratio")


def test_examples_missing_fixture(tmp_path):
    d = tmp_path / "fx"
    shutil.copytree(FIXTURES, d)
    (d / "ex27.json").unlink()
    proc = run("examples", env={"FUZMET_FIXTURES": str(d)})
    assert proc.returncode == 3 and "ex27" in proc.stderr


def test_examples_out_dir(tmp_path):
    out = tmp_path / "reports"
    proc = run("examples", "--out", out)
    assert proc.returncode == 0
    assert sorted(p.name for p in out.iterdir()) == ["matrix.jsonl", "matrix.txt", "reports.jsonl"]
    assert (out / "matrix.jsonl").read_text() == (DATA / "examples_matrix.jsonl").read_text()
    for line in (out / "reports.jsonl").read_text().splitlines():
        Report.from_line(line)


def test_timing_flag_sets_elapsed():
    out = lines(run("axioms", fx("phi_ratio"), "--json", "--timing"))
    assert all(isinstance(o["elapsed_ms"], int) for o in out)


def test_main_in_process(capsys):
    assert main(["oracle", fx("reciprocal_product"), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"]["status"] == "holds"


@pytest.mark.parametrize("cmd", SUITE, ids=lambda c: c[0])
def test_commands_are_deterministic(cmd):
    a, b = run(*cmd), run(*cmd)
    assert a.returncode == b.returncode and a.stdout == b.stdout
