from __future__ import annotations

import json

import pytest

from bvlab.cli import EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_OK, main

BROKEN = {"dim": 3, "basis": ["a", "b", "c"],
          "brackets": [{"i": "a", "j": "b", "value": [{"k": "c", "coeff": 1}]},
                       {"i": "b", "j": "c", "value": [{"k": "a", "coeff": 1}]},
                       {"i": "a", "j": "c", "value": [{"k": "a", "coeff": 1}]}]}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_preset_table(capsys):
    code, out, _ = run(capsys, "check", "--preset", "aff2_case2")
    assert code == EXIT_OK
    assert "D = [-1 * x, -]" in out
    assert "FAIL" not in out


def test_check_json_is_sorted_and_deterministic(capsys):
    _, first, _ = run(capsys, "check", "--preset", "sl2_standard", "--format", "json")
    _, second, _ = run(capsys, "check", "--preset", "sl2_standard", "--format", "json")
    assert first == second
    doc = json.loads(first)
    assert doc["all_pass"] is True
    assert list(doc) == sorted(doc)
    assert doc["tables"]["H_r"] == "-1 * h"


def test_broken_jacobi_file_exits_1_with_witness(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(BROKEN))
    code, out, _ = run(capsys, "check", "--file", str(p), "--format", "json")
    assert code == EXIT_FAIL
    report = json.loads(out)["reports"][0]
    assert report["identity"] == "jacobi" and not report["holds"]
    assert report["witness"]["inputs"] == ["1 * a", "1 * b", "1 * c"]


@pytest.mark.parametrize("argv", [
    ["check", "--preset", "aff2_case3", "--lambda", "0"],
    ["check", "--preset", "so5"],
    ["check", "--bivector", "x^^2"],
    ["poisson", "--bivector", "x + w"],
    ["poisson", "--max-degree", "1"],
    ["cohomology", "--degrees", "3..1"],
    ["cohomology", "--lambda", "abc"],
    ["nonsense"],
])
def test_input_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert err


def test_missing_file_key_exit_3(capsys, tmp_path):
    p = tmp_path / "partial.json"
    p.write_text('{"basis": ["a"], "brackets": []}')
    code, _, err = run(capsys, "cohomology", "--file", str(p))
    assert code == EXIT_INPUT
    assert "missing key 'dim'" in err


def test_non_diagonalizable_exits_2(capsys):
    code, out, _ = run(capsys, "cohomology", "--preset", "aff2_case2", "--invariant")
    assert code == EXIT_HYPOTHESIS
    assert "hypothesis failure" in out


def test_cohomology_sl2_json(capsys):
    code, out, _ = run(capsys, "cohomology", "--preset", "sl2_standard", "--invariant", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [d["betti"] for d in doc["full"]] == [1, 1, 0, 0]
    assert [d["betti"] for d in doc["invariant"]] == [1, 1, 0, 0]
    assert doc["certificate"]["acyclic"] and doc["agree"]


def test_cohomology_degree_range(capsys):
    code, out, _ = run(capsys, "cohomology", "--preset", "sl2_standard", "--degrees", "1..2", "--format", "json")
    assert code == EXIT_OK
    assert [d["degree"] for d in json.loads(out)["full"]] == [1, 2]


def test_poisson_r_squared(capsys):
    code, out, _ = run(capsys, "poisson", "--preset", "r2_squared", "--max-degree", "4", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["betti"] == [1, 2, 2]
    assert doc["x_delta"] == "(2*y) * dx + (-2*x) * dy"
    assert doc["orientation"] == -1
    assert not doc["unimodularity"]["unimodular_within_window"]


def test_poisson_symplectic(capsys):
    code, out, _ = run(capsys, "poisson", "--bivector", "1", "--max-degree", "3")
    assert code == EXIT_OK
    assert "unimodular: X_Delta = [Pi, a] with a = 0" in out


def test_check_bivector_small(capsys):
    code, out, _ = run(capsys, "check", "--bivector", "x*y", "--max-degree", "2", "--cases", "3")
    assert code == EXIT_OK
    assert "random bivectors: 3 cases, seed 0" in out


def test_cohomology_sl3_invariant_degrees(capsys):
    code, out, _ = run(capsys, "cohomology", "--preset", "sl3_standard", "--invariant", "--degrees", "0..2",
                       "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [d["representatives"] for d in doc["invariant"]] == [["1"], ["1 * h1", "1 * h2"], ["1 * h1^h2"]]
    assert doc["agree"]


def test_cohomology_aff2_trivial_is_whole_algebra(capsys):
    code, out, _ = run(capsys, "cohomology", "--preset", "aff2_trivial", "--format", "json")
    assert code == EXIT_OK
    assert [d["betti"] for d in json.loads(out)["full"]] == [1, 2, 1]


def test_poisson_xy(capsys):
    code, out, _ = run(capsys, "poisson", "--bivector", "x*y", "--max-degree", "5")
    assert code == EXIT_OK
    assert "X_Delta = Delta(Pi) = (x) * dx + (-y) * dy" in out
    assert "no polynomial a of degree <= 5" in out


def test_sl3_table_output(capsys):
    code, out, _ = run(capsys, "check", "--preset", "sl3_standard")
    assert code == EXIT_OK
    assert "1 * x1^y2       -1 * x1^h1^y2 + -1 * x1^h2^y2" in out
    assert "1 * h1^h2       0" in out


def test_huge_coefficients_use_exact_checks(capsys, tmp_path):
    big = 2**45
    data = {"dim": 2, "basis": ["h", "x"],
            "brackets": [{"i": "h", "j": "x", "value": [{"k": "x", "coeff": big}]}],
            "cobracket": {"r_matrix": [{"i": "h", "j": "x", "coeff": f"1/{big}"}]}}
    p = tmp_path / "big.json"
    p.write_text(json.dumps(data))
    code, out, err = run(capsys, "check", "--file", str(p))
    assert code == EXIT_OK, out + err
    assert "FAIL" not in out


def test_check_reports_anticommutator_bracket_derivation(capsys):
    code, out, _ = run(capsys, "check", "--preset", "sl2_standard")
    assert code == EXIT_OK
    assert any(line.startswith("PASS") and "derivation of the bracket" in line for line in out.splitlines())
