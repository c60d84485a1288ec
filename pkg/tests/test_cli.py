"""Command-line tests: exit codes, golden reports, report round-trips."""
import json
import math
from pathlib import Path

import numpy as np
import pytest

import vot
from vot.cli import (
    EXIT_AUDIT_FAILED,
    EXIT_INFEASIBLE,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    main,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = FIXTURES / "golden"


def same_json(a, b, rel=1e-12):
    """Semantic JSON equality with relative float tolerance."""
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(same_json(a[k], b[k], rel) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(same_json(x, y, rel) for x, y in zip(a, b))
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) \
            and not isinstance(a, bool) and not isinstance(b, bool):
        return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=rel)
    return a == b


@pytest.mark.parametrize("name", [
    "ex21_kappa", "ex22_dirac", "ex32_kappa_family",
    "ex51_mu_lambda", "ex51_mu_nu", "ex51_nu_lambda",
])
def test_solve_matches_golden(tmp_path, name):
    out = tmp_path / "report.json"
    code = main(["solve", str(FIXTURES / f"{name}.json"), "--out", str(out)])
    assert code == EXIT_OK
    got = json.loads(out.read_text())
    expect = json.loads((GOLDEN / f"{name}.report.json").read_text())
    assert same_json(got, expect)


def test_solve_stdout_and_paper_values(capsys):
    code = main(["solve", str(FIXTURES / "ex51_mu_lambda.json")])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["value"] == 2.0
    assert abs(doc["gap"]) <= 1e-8
    assert doc["slackness"] == "OK"


def test_solve_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"species": 2\n "source": {}}')
    assert main(["solve", str(bad)]) == EXIT_INPUT_ERROR
    err = capsys.readouterr().err
    assert "line 2" in err


def test_solve_missing_file_exit_2():
    assert main(["solve", "no_such_file.json"]) == EXIT_INPUT_ERROR


def test_solve_infeasible_exit_3(tmp_path, capsys):
    doc = {
        "species": 2,
        "source": {"points": [{"label": "x"}], "weights": [[1.0], [0.0]]},
        "target": {"points": [{"label": "y"}], "weights": [[0.0], [1.0]]},
        "cost": {"kind": "explicit",
                 "blocks": [[[[0.0]], [["inf"]]], [[["inf"]], [[0.0]]]]},
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    assert main(["solve", str(path)]) == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


def test_distance_prints_twelve_digits(capsys):
    code = main(["distance", str(FIXTURES / "ex51_mu.json"), str(FIXTURES / "ex51_nu.json"),
                 str(FIXTURES / "ex51_metric.json"), "--p", "1"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "0.1"


def test_distance_identical_measures_zero(capsys):
    code = main(["distance", str(FIXTURES / "ex51_mu.json"), str(FIXTURES / "ex51_mu.json"),
                 str(FIXTURES / "ex51_metric.json"), "--p", "1"])
    assert code == EXIT_OK
    assert float(capsys.readouterr().out) == 0.0


def test_distance_golden_report(tmp_path, capsys):
    out = tmp_path / "d.json"
    code = main(["distance", str(FIXTURES / "ex51_mu.json"), str(FIXTURES / "ex51_nu.json"),
                 str(FIXTURES / "ex51_metric.json"), "--p", "1", "--out", str(out)])
    assert code == EXIT_OK
    got = json.loads(out.read_text())
    expect = json.loads((GOLDEN / "ex51_mu_nu.distance.json").read_text())
    assert same_json(got, expect)


def test_audit_mti_flags_ex51(tmp_path):
    out = tmp_path / "audit.json"
    code = main(["audit", str(FIXTURES / "ex51_metric.json"),
                 "--supports", str(FIXTURES / "ex51_supports.json"),
                 "--mode", "mti", "--out", str(out)])
    assert code == EXIT_AUDIT_FAILED
    got = json.loads(out.read_text())
    expect = json.loads((GOLDEN / "ex51_audit_mti.json").read_text())
    assert same_json(got, expect)
    assert any(v["i"] == 0 and v["j"] == 1 and v["k"] == 0
               and (v["x"], v["y"], v["z"]) == ("0", "1", "2")
               for v in got["violations"])


def test_audit_metric_mode_golden(tmp_path):
    out = tmp_path / "audit.json"
    code = main(["audit", str(FIXTURES / "ex51_metric.json"),
                 "--supports", str(FIXTURES / "ex51_supports.json"),
                 "--mode", "metric", "--out", str(out)])
    assert code == EXIT_AUDIT_FAILED
    got = json.loads(out.read_text())
    expect = json.loads((GOLDEN / "ex51_audit_metric.json").read_text())
    assert same_json(got, expect)


def test_audit_passes_for_mti_family(tmp_path):
    metric = {
        "species": 2,
        "kind": "lp_norm_plus_kappa",
        "kappa": 0.5,
        "q": 2.0,
    }
    mpath = tmp_path / "metric.json"
    mpath.write_text(json.dumps(metric))
    spath = tmp_path / "supports.json"
    spath.write_text(json.dumps({
        "supports": [[{"label": "a", "coords": [0.0]},
                      {"label": "b", "coords": [1.0]},
                      {"label": "c", "coords": [2.5]}]]
    }))
    assert main(["audit", str(mpath), "--supports", str(spath), "--mode", "mti"]) == EXIT_OK
    assert main(["audit", str(mpath), "--supports", str(spath), "--mode", "metric"]) == EXIT_OK


def test_glue_command(tmp_path):
    ab_out = tmp_path / "ab.json"
    bc_out = tmp_path / "bc.json"
    assert main(["solve", str(FIXTURES / "ex51_mu_nu.json"), "--out", str(ab_out)]) == EXIT_OK
    assert main(["solve", str(FIXTURES / "ex51_nu_lambda.json"), "--out", str(bc_out)]) == EXIT_OK
    # plans from the two problem files share nu as middle measure, but live
    # on single-point supports; rewrite them as plans over the nu support
    ab = json.loads(ab_out.read_text())
    bc = json.loads(bc_out.read_text())
    ab_plan = {"species": 2, "source_size": 1, "target_size": 1, "plan": ab["plan"]}
    bc_plan = {"species": 2, "source_size": 1, "target_size": 1, "plan": bc["plan"]}
    (tmp_path / "ab_plan.json").write_text(json.dumps(ab_plan))
    (tmp_path / "bc_plan.json").write_text(json.dumps(bc_plan))
    out = tmp_path / "glued.json"
    code = main(["glue", str(tmp_path / "ab_plan.json"), str(tmp_path / "bc_plan.json"),
                 str(FIXTURES / "ex51_nu.json"), "--out", str(out)])
    assert code == EXIT_OK
    got = json.loads(out.read_text())
    assert got["composed"] == [[0, 0, 0, 0, 1.0]]
    assert got["three_point"] == [[0, 1, 0, 0, 0, 0, 1.0]]


def test_glue_middle_mismatch_exit_2(tmp_path):
    plan = {"species": 2, "source_size": 1, "target_size": 1,
            "plan": [[0, 1, 0, 0, 1.0]]}
    ppath = tmp_path / "plan.json"
    ppath.write_text(json.dumps(plan))
    assert main(["glue", str(ppath), str(ppath),
                 str(FIXTURES / "ex51_mu.json")]) == EXIT_INPUT_ERROR


def test_tuple_golden(tmp_path, capsys):
    out = tmp_path / "t.json"
    code = main(["tuple", str(FIXTURES / "ex52_x.json"), str(FIXTURES / "ex52_y.json"),
                 str(FIXTURES / "ex52_metric.json"), "--p", "1", "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "1"
    got = json.loads(out.read_text())
    expect = json.loads((GOLDEN / "ex52_tuple.json").read_text())
    assert same_json(got, expect)


def test_report_plan_revalidates_against_problem(tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", str(FIXTURES / "ex22_dirac.json"), "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    mu, nu, cost = vot.load_problem(FIXTURES / "ex22_dirac.json")
    plan = vot.CouplingTensor(mu.species, mu.size, nu.size,
                              [tuple(e) for e in doc["plan"]])
    assert vot.coupling_residuals(plan, mu, nu) <= 1e-8
    assert plan.total_cost(cost) == pytest.approx(doc["value"], rel=1e-12)


def test_vot_tol_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VOT_TOL", "1e-6")
    assert main(["solve", str(FIXTURES / "ex51_mu_nu.json")]) == EXIT_OK
    capsys.readouterr()


def test_unknown_command_exit_2(capsys):
    assert main(["frobnicate"]) == EXIT_INPUT_ERROR
    capsys.readouterr()


def test_determinism_same_bytes(tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    main(["solve", str(FIXTURES / "ex22_dirac.json"), "--out", str(out1)])
    main(["solve", str(FIXTURES / "ex22_dirac.json"), "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()
