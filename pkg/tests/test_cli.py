import json
import subprocess
import sys
from importlib import resources

import pytest

from newtonberk import cli

FIXTURES = resources.files("newtonberk").joinpath("fixtures")


def fx(name):
    return str(FIXTURES.joinpath(name))


def test_measure_report_for_cubic():
    report, code = cli.run(["measure", fx("cubic_worked.json")])
    assert code == 0
    res = report["results"]
    assert report["schema"] == cli.SCHEMA and res["case_tag"] == "CaseI"
    assert res["atoms"] == [["inf", "5/6"], ["0", "1/6"]]
    assert len(res["matrix"]) == 5 and all(len(r) == 5 for r in res["matrix"])
    assert all(isinstance(x, str) for row in res["matrix"] for x in row)
    assert res["bound_ok"] and res["bound"] == "3/5"
    assert report["tolerance_log"] == []


def test_rescalings_report_for_quartic():
    report, code = cli.run(["rescalings", fx("quartic_example.json"), "--max-period", "4"])
    assert code == 0
    higher = report["results"]["higher"]
    assert len(higher) == 1 and higher[0]["period"] == 2
    assert higher[0]["normalized_core"] == ["62", "0", "1"]
    assert report["tolerance_dependent"] and report["tolerance_log"]


def test_tree_report_and_dot(tmp_path):
    dot = tmp_path / "tree.dot"
    report, code = cli.run(["tree", fx("good_reduction.json"), "--dot", str(dot)])
    assert code == 0
    res = report["results"]
    assert len(res["V"]) == 1 and res["good_reduction"]
    assert dot.read_text().startswith("graph H_fix {")


def test_selftest_passes():
    report, code = cli.run(["selftest"])
    assert code == 0 and all(c["ok"] for c in report["results"]["checks"])


def test_reports_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert cli.main(["measure", fx("cubic_worked.json"), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_verify_command_runs(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["verify", fx("cubic_worked.json"), "--t", "1e-2", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert res["t"] == [0.01] and res["measure"]["predicted"] == [["inf", "5/6"], ["0", "1/6"]]


@pytest.mark.parametrize("content,code", [
    ("not json", 2),
    ('{"roots": [[[0, 1, "1"]]]}', 2),
    ('{"roots": [[[0, 1, "1"]], [[0, 1, "2"]]], "degree": 3}', 2),
    ('{"roots": [[[0, 1, "1"]], [[0, 1, "2"]]], "backend": "quantum"}', 2),
])
def test_input_errors_exit_two(tmp_path, content, code):
    spec = tmp_path / "bad.json"
    spec.write_text(content)
    report, got = cli.run(["tree", str(spec)])
    assert got == code and report["error"]["type"] == "InputError"


def test_missing_spec_exits_two():
    assert cli.run(["tree", "/nonexistent/spec.json"])[1] == 2
    assert cli.run(["measure"])[1] == 2


def test_budget_exhaustion_exits_four(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps(cli.load_spec(fx("cubic_worked.json"))))
    report, code = cli.run(["measure", str(spec), "--budget", "0"])
    assert code == 4 and report["error"]["type"] == "BudgetExhausted"


def test_backend_override_is_echoed():
    report, code = cli.run(["tree", fx("good_reduction.json"), "--backend", "float", "--prec", "128"])
    assert code == 0
    assert report["inputs"]["spec"]["backend"] == {"kind": "float", "prec": 128, "ztol": 1e-40}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "newtonberk.cli", "tree", fx("good_reduction.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["good_reduction"] is True
