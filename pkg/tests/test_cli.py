import json
import subprocess
import sys

import jsonschema
import pytest

from skewfold.cli import RunConfig, main, run
from skewfold.report import load_schema

CASE2 = "p=z^3; q=z^3*w^2+z^5"
CASE3 = "p=z^6; q=z^3*w^2+w^5"
CASE4 = "p=z^5; q=w^4+z^2*w^3+z^3*w"


def call(*argv):
    text, code = run(list(argv))
    return text, code


def payload(*argv):
    text, code = call(*argv)
    assert code == 0, text
    return json.loads(text)


def test_analyze_case2():
    out = payload("analyze", CASE2)
    plan = out["plans"][0]
    assert plan["case"] == 2 and plan["l1"] == "1" and plan["alpha0"] == "3"
    assert out["polygon"]["vertices"] == [["3", "2"], ["5", "0"]]


def test_analyze_case1_from_file(tmp_path):
    path = tmp_path / "m.map"
    path.write_text("# monomial\np = z^2\nq = z*w^2\n")
    assert payload("analyze", str(path))["plans"][0]["case"] == 1


def test_rejected_map():
    text, code = call("analyze", "p=z; q=w^2")
    assert code == 2 and "deg p = 1" in text


def test_parse_error_exit_code():
    text, code = call("analyze", "p=z^3; q=z^3*w^2 +* z")
    assert code == 4 and "line 1" in text and "column" in text


def test_missing_file():
    assert call("analyze", "/nonexistent/map")[1] == 2


def test_bottcher_case2():
    out = payload("bottcher", CASE2, "--random", "10", "--tol", "1e-10")
    assert len(out["rows"]) == 10 and out["passed"]
    assert max(r["residual"] for r in out["rows"]) < 1e-8


def test_bottcher_monomial_rows_are_identity():
    out = payload("bottcher", "p=z^2; q=z*w^2", "--point", "10", "20", "--point", "5+1i", "-30")
    for row in out["rows"]:
        assert row["phi1_re"] == pytest.approx(row["z_re"], rel=1e-15)
        assert row["phi2_im"] == pytest.approx(row["w_im"], rel=1e-15)


def test_bottcher_skips_points_outside():
    out = payload("bottcher", CASE2, "--point", "100", "1e5", "--point", "100", "1")
    assert len(out["rows"]) == 1 and len(out["skipped"]) == 1
    assert out["rows"][0]["z_re"] == 100


def test_bottcher_points_file(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("100 1e5\n# comment\n200 1e6\n")
    assert len(payload("bottcher", CASE2, "--points", str(path))["rows"]) == 2


def test_bottcher_degree_gate():
    text, code = call("bottcher", "p=z^3; q=z^2*w+z^3", "--plan-index", "0")
    assert code == 2 and "delta != T_k" in text


def test_two_plans_need_an_index():
    text, code = call("analyze", "p=z^3; q=z^2*w+z^3")
    assert code == 0
    text, code = call("bottcher", "p=z^3; q=z^2*w+z^3")
    assert code == 2 and "[0]" in text and "[1]" in text


def test_bottcher_nonconvergence_exit_code():
    text, code = call("bottcher", CASE2, "--max-iter", "2", "--random", "2")
    assert code == 3


def test_bottcher_extended_precision():
    a = payload("bottcher", CASE2, "--point", "100", "1e5")["rows"][0]
    b = payload("bottcher", CASE2, "--point", "100", "1e5", "--precision", "extended")["rows"][0]
    assert abs(a["phi2_re"] - b["phi2_re"]) < 1e-8 * abs(a["phi2_re"])


def test_infinity_commands():
    assert payload("infinity", CASE3)["report"]["basin"] == "A_minus"
    out = payload("infinity", CASE3, "--weighted", "4", "3")
    assert out["report"]["basin"] == "closure_union" and out["report"]["l"] == "3/4"
    assert call("infinity", CASE3, "--weighted", "2", "2")[1] == 2
    out = payload("infinity", CASE4, "--empirical", "--samples", "100")
    assert out["empirical"]["label"] == "closure_union"


def test_verify():
    out = payload("verify", CASE3, "--samples", "2000")
    assert out["passed"]
    text, code = call("verify", CASE2, "--R", "1.5", "--samples", "500")
    assert code == 2 and json.loads(text)["passed"] is False


def test_verify_d_one_includes_contraction():
    out = payload("verify", "p=z^6; q=z^3*w+w^2", "--samples", "500")
    assert out["passed"] and out["contraction"]["passed"]


def test_transform():
    out = payload("transform", CASE2, "--stage", "blowup1", "1")
    assert out["stages"][0]["normal_form"] and out["stages"][0]["dominant_exponents"]["second"] == ["2", "2"]
    text, code = call("transform", CASE4, "--stage", "blowup1", "1/2")
    assert code == 2 and "not in N" in text
    out = payload("transform", CASE4, "--stage", "cover1", "1", "1", "--stage", "cover2", "1", "1")
    assert out["stages"][0]["intermediate_case3"] and out["stages"][1]["normal_form"]
    assert call("transform", CASE2, "--stage", "blowup2", "1")[1] == 2


def test_afo():
    out = payload("afo", CASE3, "--check", "--samples", "2000")
    assert out["agreement"]["passed"] and out["afo"]["kind"] == "outside_unit_disk"
    assert out["preimages"][2]["lower_slope"] == "-6"
    out = payload("afo", "p=z^3; q=z^3*w^2", "--critical", "1", "1", "1", "0", "inf", "--samples", "400")
    assert out["critical"]["passed"] and not out["critical"]["warning"]


def test_grid_csv_and_json():
    text, code = call("grid", CASE2, "--box", "3", "5", "8", "12", "--nx", "3", "--ny", "2", "--csv")
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 1 + 6
    out = payload("grid", CASE2, "--kind", "basin", "--box", "3", "5", "8", "12", "--nx", "3", "--ny", "2")
    assert len(out["rows"]) == 6


@pytest.mark.parametrize(
    "argv",
    [
        ("analyze", CASE4),
        ("verify", CASE2, "--samples", "300"),
        ("bottcher", CASE4, "--random", "3"),
        ("transform", CASE3, "--stage", "blowup2", "1"),
        ("infinity", CASE2, "--weighted", "1", "3"),
        ("afo", CASE2, "--check", "--samples", "300"),
        ("grid", CASE3, "--box", "3", "6", "1", "3", "--nx", "2", "--ny", "2"),
    ],
)
def test_deterministic_and_schema_valid(argv, monkeypatch):
    monkeypatch.delenv("SKEWFOLD_SEED", raising=False)
    a, code_a = call(*argv, "--seed", "5")
    b, code_b = call(*argv, "--seed", "5")
    assert a == b and code_a == code_b == 0
    monkeypatch.setenv("SKEWFOLD_SEED", "5")
    assert call(*argv)[0] == a
    jsonschema.validate(json.loads(a), load_schema(argv[0]))


def test_seventeen_digits():
    text = call("bottcher", CASE2, "--point", "100", "1e5")[0]
    row = json.loads(text)["rows"][0]
    assert f'"phi2_re": {row["phi2_re"]:.17g}' in text


def test_run_config_validation():
    for bad in ({"eps": 0}, {"eps": 1}, {"tol": 0}, {"threads": 0}, {"plan_index": 2}, {"R": 1.0}, {"precision": "quad"}):
        with pytest.raises(ValueError):
            RunConfig(**bad)


def test_threads_do_not_change_output():
    argv = ("grid", CASE4, "--box", "4", "8", "6", "14", "--nx", "5", "--ny", "4")
    assert call(*argv, "--threads", "1")[0] == call(*argv, "--threads", "4")[0]


def test_main_writes_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["analyze", CASE2, "-o", str(out)]) == 0
    assert json.loads(out.read_text())["command"] == "analyze"
    assert main(["analyze", "p=z; q=w^2"]) == 2
    assert "hypothesis" in capsys.readouterr().err


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "skewfold.cli", "analyze", CASE2], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["plans"][0]["case"] == 2
