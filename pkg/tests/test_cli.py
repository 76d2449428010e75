import json

import pytest

from defent.cli import main
from conftest import HYP_TEXT, KR_TEXT, SQRT_TEXT

PAPER_MATRIX_TEXT = "1 0 2 3 0\n2 9 7 7 7\n9 3 3 3 0\n2 2 7 7 7\n"


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, argv):
    code, out = run(capsys, argv)
    assert code == 0, out
    return json.loads(out)


@pytest.fixture
def hyp_file(tmp_path):
    f = tmp_path / "hyp.ring"
    f.write_text(HYP_TEXT)
    return str(f)


@pytest.fixture
def sqrt_file(tmp_path):
    f = tmp_path / "sq.ring"
    f.write_text(SQRT_TEXT)
    return str(f)


@pytest.fixture
def matrix_file(tmp_path):
    f = tmp_path / "paper.mat"
    f.write_text(PAPER_MATRIX_TEXT)
    return str(f)


def test_count(capsys, hyp_file, sqrt_file):
    obj = run_json(capsys, ["count", hyp_file, "--p", "5"])
    assert obj["rows"][0] == {"count": 9, "e": 1, "q": 5}
    obj2 = run_json(capsys, ["count", sqrt_file, "--p", "7"])
    assert obj2["rows"][0]["count"] == 1


def test_profile_and_base(capsys, hyp_file):
    obj = run_json(capsys, ["profile", hyp_file, "--p", "5", "--base", "5"])
    assert obj["entries"]["x,y"] == {"terms": {"3": "2/1"}}
    assert obj["normalized"][""] == "0"
    assert abs(obj["normalized"]["y"] - 0.80966) < 1e-4


def test_profile_blocks_declared(capsys, tmp_path):
    f = tmp_path / "kr.ring"
    f.write_text(KR_TEXT)
    obj = run_json(capsys, ["profile", str(f), "--p", "5", "--blocks"])
    assert set(obj["ground_set"]) == {"A", "B", "C", "D"}
    assert len(obj["entries"]) == 16
    obj2 = run_json(
        capsys,
        ["profile", str(f), "--p", "5", "--blocks", "P=a1,a2,b1,b2;Q=c0,c1,d0,d1,d2"],
    )
    assert set(obj2["ground_set"]) == {"P", "Q"}


def test_profile_blocks_missing_declaration(capsys, hyp_file):
    code, _ = run(capsys, ["profile", hyp_file, "--p", "3", "--blocks"])
    assert code == 3  # Hyp declares no blocks


def test_tower_with_period(capsys, sqrt_file):
    obj = run_json(capsys, ["tower", sqrt_file, "--p", "7", "--emax", "6"])
    assert [r["count"] for r in obj["census"]["rows"]] == [1, 49, 1, 2401, 1, 117649]
    assert obj["period"]["m"] == 2
    assert obj["period"]["classes"]["1"] == {"d": 0, "mu": "1/1"}
    assert obj["period"]["classes"]["0"] == {"d": 1, "mu": "1/1"}


def test_lincong_and_snf(capsys, matrix_file, tmp_path):
    obj = run_json(capsys, ["lincong", matrix_file, "--m", "343", "--base", "7"])
    assert obj["normalized"]["1,2,3,4"] == "11"
    assert obj["normalized"]["2,4"] == "5"
    diag = tmp_path / "diag.mat"
    diag.write_text("2 0\n0 3\n")
    obj2 = run_json(capsys, ["snf", str(diag)])
    assert obj2["diagonal"] == [1, 6]
    S, T, U = obj2["S"], obj2["T"], obj2["U"]
    assert S[0][0] == 1 and S[1][1] == 6


def test_torus(capsys, tmp_path):
    f = tmp_path / "sq.mat"
    f.write_text("2\n")
    obj = run_json(capsys, ["torus", str(f), "--p", "5"])
    assert obj["entries"]["1"] == {"terms": {"2": "1/1"}}


def test_check_expr_and_gmm(capsys, matrix_file, tmp_path):
    prof_path = tmp_path / "prof.json"
    code, out = run(capsys, ["-o", str(prof_path), "lincong", matrix_file, "--m", "343"])
    assert code == 0
    obj = run_json(capsys, ["check", str(prof_path), "--expr", "I(1:2)"])
    assert obj["sign"] == 0
    obj2 = run_json(capsys, ["check", str(prof_path), "--expr", "ING(1:2|3:4)"])
    assert obj2["sign"] >= 0
    obj3 = run_json(capsys, ["check", str(prof_path), "--gmm"])
    assert obj3["all_zero"] is False and obj3["conclusive"] is False
    obj4 = run_json(capsys, ["check", str(prof_path), "--dfz", "2"])
    assert "functional" in obj4 and "sign" in obj4


def test_kr_commands(capsys):
    obj = run_json(capsys, ["kr", "--q", "7"])
    forms = obj["closed_forms"]
    assert forms["D(A:B)"]["value"]["terms"] == {"7": "1/1", "2": "-1/1", "3": "-1/1"}
    assert forms["D(C:D|A)"]["sign"] == 1
    obj2 = run_json(capsys, ["kr", "--scan", "--eps", "1/10", "--qmax", "10000"])
    assert obj2["q_star"] == 37 and obj2["prev_q"] == 31
    assert obj2["at_q_star"]["sign"] == -1 and obj2["at_prev"]["sign"] >= 0
    obj3 = run_json(capsys, ["kr", "--q", "7", "--eps", "0"])
    assert obj3["violation"]["sign"] == 1
    obj4 = run_json(capsys, ["kr", "--scan", "--eps", "0", "--qmax", "100"])
    assert obj4["q_star"] is None and "message" in obj4


def test_extend_commands(capsys, tmp_path, hyp_file):
    prof_path = tmp_path / "hyp_prof.json"
    assert main(["-o", str(prof_path), "profile", hyp_file, "--p", "3"]) == 0
    capsys.readouterr()
    sw = run_json(capsys, ["extend", "sw", str(prof_path), "--L", "y", "--alpha", "auto"])
    from defent import parse_functional

    assert [parse_functional(c).coeffs for c in sw["constraints"]] == [
        parse_functional("H(x,z) - H(x)").coeffs
    ]
    assert sw["entries"]["x,y,z"] is not None
    ak = run_json(capsys, ["extend", "ak", str(prof_path), "--L", "y"])
    assert len(ak["constraints"]) == 3
    dist_path = tmp_path / "dist.json"
    code, _ = run(capsys, ["-o", str(dist_path), "profile", hyp_file, "--p", "3"])
    # build a distribution file via the library (format is part of extend)
    from defent import Distribution, field, marginal_distribution, parse_set

    d = marginal_distribution(parse_set(HYP_TEXT), ["x", "y"], field(3))
    dist_path.write_text(json.dumps(d.to_json()))
    cp = run_json(capsys, ["extend", "copy", str(dist_path), "--L", "y"])
    assert cp["check"]["ok"] is True
    assert cp["tau"]["x'"] == "x"


def test_factor_and_convolve(capsys, tmp_path, matrix_file):
    prof_path = tmp_path / "prof.json"
    assert main(["-o", str(prof_path), "lincong", matrix_file, "--m", "7"]) == 0
    capsys.readouterr()
    obj = run_json(capsys, ["factor", str(prof_path), "--blocks", "X=1,2;Y=3,4"])
    assert set(obj["ground_set"]) == {"X", "Y"}
    # convolving with a non-modular second argument is a precondition error
    code, _ = run(capsys, ["convolve", str(prof_path), str(prof_path)])
    assert code == 3


def test_exit_codes(capsys, tmp_path, hyp_file, sqrt_file):
    bad = tmp_path / "bad.ring"
    bad.write_text("set Broken(x) := x +")
    code, _ = run(capsys, ["count", str(bad), "--p", "5"])
    assert code == 2
    code, _ = run(capsys, ["count", str(tmp_path / "missing.ring"), "--p", "5"])
    assert code == 2
    code, _ = run(capsys, ["count", hyp_file, "--p", "6"])
    assert code == 3  # 6 is not prime
    code, _ = run(capsys, ["count", hyp_file, "--p", "5", "--max-evals", "3"])
    assert code == 4
    code, _ = run(capsys, ["count", hyp_file])  # missing --p
    assert code == 2


def test_output_deterministic(capsys, hyp_file):
    _, out1 = run(capsys, ["profile", hyp_file, "--p", "5"])
    _, out2 = run(capsys, ["profile", hyp_file, "--p", "5"])
    assert out1 == out2
    _, out3 = run(capsys, ["count", hyp_file, "--p", "5", "--jobs", "2"])
    _, out4 = run(capsys, ["count", hyp_file, "--p", "5", "--jobs", "1"])
    assert out3 == out4
