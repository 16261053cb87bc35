from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import pytest

from stabcert import cli
from stabcert.errors import InvariantError


def fixture_path(name: str) -> str:
    return str(resources.files("stabcert").joinpath("fixtures", name))


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, data, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_origin_check_is_false(capsys):
    code, out, err = run(["check-lcp", fixture_path("example46_origin.json"), "--q0-samples", "300"], capsys)
    assert code == 3
    cert = json.loads(out)
    assert cert["verdict"] is False and cert["result"]["witness"] == ["0", "-1"]
    assert cert["result"]["modulus"]["estimate"] == "inf"
    assert "false" in err


def test_wedge_check_is_true(capsys):
    code, out, _ = run(["check-avi", fixture_path("example46_Q.json")], capsys)
    assert code == 0
    result = json.loads(out)["result"]
    assert result["cq_holds"] and result["condition_holds"] and result["path"] == "avi"


def test_domain_given_as_hrep_is_detected(capsys):
    code, out, _ = run(["check-avi", fixture_path("example46_domain_avi.json"), "--q0-samples", "300"], capsys)
    assert code == 3
    result = json.loads(out)["result"]
    assert result["q_set_is_domain"] and result["necessity"] == "sufficient_and_necessary"
    assert result["verdict"] is False


def test_solve_prints_four_solutions(capsys):
    code, out, err = run(["solve", fixture_path("example46_q21.json")], capsys)
    assert code == 0
    sols = json.loads(out)["result"]["solutions"]
    assert sorted(tuple(p["vertices"][0]) for p in sols) == [("0", "0"), ("0", "1"), ("1/2", "3/2"), ("2", "0")]
    assert "4 piece(s)" in err and "(1/2, 3/2)" in err


def test_classify_and_domain(capsys):
    code, out, _ = run(["classify", fixture_path("example46_q21.json")], capsys)
    assert code == 0 and json.loads(out)["result"]["combination"] == {"i1": [], "i2": [1, 2], "i3": []}
    code, out, _ = run(["domain", fixture_path("example46_origin.json"), "--q0-samples", "300"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["domain"]["rays"] == [["0", "1"], ["1", "-1"]]


def test_modulus_command(capsys):
    code, out, _ = run(["modulus", fixture_path("identity_interior.json"), "--q0-samples", "200"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["estimate"] == pytest.approx(1.0, rel=0.05)


def test_oracle_command_and_block(capsys):
    code, out, _ = run(["oracle", fixture_path("example46_origin.json")], capsys)
    assert code == 3
    assert json.loads(out)["result"]["oracle"]["classification"] == "divergent"
    code, out, _ = run(["check-lcp", fixture_path("example46_q21.json"), "--oracle", "--q0-samples", "200"], capsys)
    block = json.loads(out)["result"]["oracle"]
    assert code == 0 and block["classification"] == "stable" and block["brute_matches_solver"]


def test_out_file_moves_summary_to_stdout(tmp_path, capsys):
    target = tmp_path / "cert.json"
    code, out, err = run(["solve", fixture_path("example46_q21.json"), "--out", str(target)], capsys)
    assert code == 0 and "4 piece(s)" in out and err == ""
    assert json.loads(target.read_text())["command"] == "solve"
    code, out, err = run(["solve", fixture_path("example46_q21.json"), "--out", str(target), "--quiet"], capsys)
    assert out == "" and err == ""


@pytest.mark.parametrize("data, fragment", [
    ({"kind": "lcp", "m": [["1", "0"], ["0", "1"]], "q": ["1"]}, "q has length 1"),
    ({"kind": "lcp", "m": [["1", "0"]], "q": ["1"]}, "square"),
    ({"kind": "lcp", "m": [[1.5]], "q": ["1"]}, "schema"),
    ({"kind": "qp", "m": [["1"]]}, "schema"),
    ({"kind": "lcp", "m": [["1"]], "q_set": "domain", "c": {"a_le": [["-1"]], "b_le": ["0"]},
      "q_bar": ["0"], "x_bar": ["0"]}, "cannot be combined"),
])
def test_input_errors(tmp_path, capsys, data, fragment):
    code, _, err = run(["check-lcp", write(tmp_path, data)], capsys)
    assert code == 1 and fragment in err


def test_precondition_errors_name_the_module_error(tmp_path, capsys):
    data = {"kind": "lcp", "m": [["1"]], "q_bar": ["1"], "x_bar": ["1"]}
    code, _, err = run(["check-lcp", write(tmp_path, data)], capsys)
    assert code == 1 and "MembershipError" in err
    data = {"kind": "lcp", "m": [["0", "1"], ["0", "0"]], "q_bar": ["1", "1"], "x_bar": ["0", "0"]}
    code, _, err = run(["check-lcp", write(tmp_path, data), "--q0-samples", "500"], capsys)
    assert code == 1 and "NotQ0Error" in err


def test_malformed_json_and_missing_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["solve", str(bad)], capsys)
    assert code == 1 and "malformed JSON" in err
    code, _, err = run(["solve", str(tmp_path / "missing.json")], capsys)
    assert code == 1 and "cannot read" in err


def test_invariant_failure_exit_code(monkeypatch, capsys):
    def broken(p, args):
        raise InvariantError("re-check failed")
    monkeypatch.setitem(cli.HANDLERS, "solve", broken)
    code, _, err = run(["solve", fixture_path("example46_q21.json")], capsys)
    assert code == 2 and "InvariantError" in err


def test_certificates_are_deterministic(capsys):
    argv = ["check-lcp", fixture_path("identity_origin.json"), "--q0-samples", "300", "--seed", "5"]
    first = run(argv + ["--no-timing"], capsys)[1]
    second = run(argv + ["--no-timing"], capsys)[1]
    assert first == second
    a = json.loads(run(argv, capsys)[1])
    b = json.loads(run(argv, capsys)[1])
    a.pop("timing"), b.pop("timing")
    assert a == b


def test_schema_round_trip_on_fixtures():
    for name in cli.fixture_names():
        data = cli.read_fixture(name)
        assert cli.ProblemFile.parse(data).to_json() == data, name


def test_fixtures_command(tmp_path, capsys):
    code, out, _ = run(["fixtures", "--list"], capsys)
    assert code == 0 and "example46_origin.json" in out.split()
    code, _, _ = run(["fixtures", "--dir", str(tmp_path / "fx"), "--quiet"], capsys)
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "fx").iterdir()) == cli.fixture_names()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stabcert.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "stabcert" in proc.stdout
