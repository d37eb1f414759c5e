import json
import subprocess
import sys

import pytest

from setfree.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_chi_examples(capsys):
    code, out, _ = run(capsys, "chi", "--family", "set", "--k", "3", "--char", "3")
    assert code == 0 and "t^3 - 4t^2 + 3t" in out and "6 flats" in out
    code, out, _ = run(capsys, "chi", "--family", "set", "--k", "2", "--char", "3")
    assert code == 0 and "chi(t) = t^2 - t" in out and "2 flats" in out
    code, out, _ = run(capsys, "chi", "--family", "set", "--k", "3", "--char", "generic")
    assert code == 0 and "t^3 - 4t^2 + 5t - 2" in out and "10 flats" in out


def test_chi_json(capsys):
    code, out, _ = run(capsys, "chi", "--k", "4", "--format", "json")
    doc = json.loads(out)
    assert set(doc) == {"query", "result", "checks"}
    assert doc["result"]["coefficients"] == [1, 10, 27, 18, 0]
    assert all(doc["checks"].values())


def test_count_examples(capsys):
    code, out, _ = run(capsys, "count", "--family", "set", "--n", "2", "--k", "3", "--ordered")
    assert code == 0 and "ordered count: 432" in out
    code, out, _ = run(capsys, "count", "--family", "set", "--n", "1", "--k", "3", "--ordered")
    assert code == 0 and "ordered count: 0" in out
    code, out, _ = run(capsys, "count", "--family", "set", "--n", "1", "--k", "2", "--unordered")
    assert code == 0 and "unordered count: 3" in out


def test_count_verify(capsys):
    code, out, _ = run(capsys, "count", "--family", "sumfree-5", "--n", "1", "--k", "3", "--verify")
    assert code == 0 and "[match]" in out


def test_coeffs_examples(capsys):
    code, out, _ = run(capsys, "coeffs", "--family", "set", "--i", "1", "--kmax", "4", "--holdout", "5")
    assert code == 0
    assert "c_1(k) = C(k,2) + C(k,3)" in out and "[ok]" in out
    code, out, _ = run(capsys, "coeffs", "--family", "set", "--i", "0", "--kmax", "3", "--holdout", "4")
    assert code == 0 and "c_0(k) = 1" in out


def test_coeffs_compare_paper(capsys):
    code, out, _ = run(capsys, "coeffs", "--i", "2", "--kmax", "6", "--holdout", "7", "--compare-paper",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    cmp_ = doc["result"]["comparison"]
    assert cmp_["first_disagreement_k"] == 3
    row3 = next(v for v in cmp_["values"] if v["k"] == 3)
    assert (row3["computed"], row3["reference"], row3["equal"]) == (3, 2, False)
    assert cmp_["generic_values"][3] == 5
    assert doc["checks"]["holdout"] is True


def test_prob_examples(capsys):
    code, out, _ = run(capsys, "prob", "--family", "set", "--n", "1", "--k", "2", "--samples", "1000", "--seed", "7")
    assert code == 0 and "estimate: 1.000000" in out
    code, out, err = run(capsys, "prob", "--family", "set", "--n", "1", "--k", "4")
    assert code == 2 and "exceeds" in err


def test_prob_echoes_seed(capsys):
    code, out, _ = run(capsys, "prob", "--n", "2", "--k", "3", "--samples", "2000", "--seed", "9", "--format", "json")
    doc = json.loads(out)
    assert doc["query"]["seed"] == 9 and doc["result"]["samples"] == 2000


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--family", "set", "--kmax", "3", "--nmax", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,n,q,chi_eval,oracle_count,match,c_0,c_1,c_2,c_3"
    assert "3,2,9,432,432,match,1,4,3,0" in lines
    for row in lines[1:]:
        f = row.split(",")
        if f[5] == "match":
            assert f[3] == f[4]


def test_table_small_kmax(capsys):
    code, out, _ = run(capsys, "table", "--kmax", "0", "--nmax", "1", "--format", "csv")
    assert out.strip().splitlines()[1:] == ["0,1,3,1,1,match,1"]
    code, out, _ = run(capsys, "table", "--kmax", "1", "--nmax", "1", "--format", "csv")
    assert "1,1,3,3,3,match,1,0" in out


def test_table_skips_over_budget(capsys):
    code, out, _ = run(capsys, "table", "--kmax", "3", "--nmax", "3", "--budget", "1000", "--format", "csv")
    assert code == 0
    assert "3,3,27,16848,,skipped,1,4,3,0" in out


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--k", "3")
    assert code == 0
    assert "F_3" in out and "differs from generic" in out


def test_validate_schema_file(capsys, tmp_path):
    good = tmp_path / "sf.json"
    good.write_text(json.dumps({"name": "sf7", "p": 7, "generators": [[1, 1, -1]]}))
    code, out, _ = run(capsys, "validate", "--schema", str(good))
    assert code == 0 and "valid" in out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "b", "p": 3, "generators": [[1, 1, 1]], "ensure_distinct": False}))
    code, _, err = run(capsys, "validate", "--schema", str(bad))
    assert code == 2 and "axiom (a)" in err


def test_schema_file_drives_chi(capsys, tmp_path):
    path = tmp_path / "set.json"
    path.write_text(json.dumps({"name": "set", "p": 3, "generators": [[1, -1], [1, 1, 1]]}))
    code, out, _ = run(capsys, "chi", "--schema", str(path), "--k", "3")
    assert code == 0 and "t^3 - 4t^2 + 3t" in out


# exit-code contract: 0 ok, 1 failed check, 2 bad input, 3 budget


def test_exit_0(capsys):
    assert run(capsys, "chi", "--k", "2")[0] == 0


def test_exit_1_failed_holdout(capsys):
    # four points cannot pin c_3, so the holdout prediction fails
    code, out, _ = run(capsys, "coeffs", "--i", "3", "--kmax", "4", "--holdout", "5")
    assert code == 1 and "FAILED" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["chi", "--k", "3", "--char", "4"],
        ["chi", "--k", "-1"],
        ["count", "--n", "1"],
        ["nosuch"],
        ["chi", "--k", "2", "--family", "nope"],
        ["count", "--n", "1", "--k", "2", "--char", "generic"],
        ["chi", "--k", "2", "--schema", "/nonexistent.json"],
    ],
)
def test_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_exit_3(capsys):
    code, _, err = run(capsys, "count", "--n", "3", "--k", "5", "--budget", "1000")
    assert code == 3 and "budget" in err
    code, _, _ = run(capsys, "chi", "--k", "6", "--max-flats", "100")
    assert code == 3


def test_output_is_deterministic():
    argv = [sys.executable, "-m", "setfree", "table", "--kmax", "3", "--nmax", "2", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a
    argv = [sys.executable, "-m", "setfree", "prob", "--n", "2", "--k", "3", "--samples", "5000", "--format", "csv"]
    assert subprocess.run(argv, capture_output=True).stdout == subprocess.run(argv, capture_output=True).stdout


def test_big_numbers_become_strings():
    from setfree.cli import jnum

    assert jnum(5) == 5
    assert jnum(2**70) == str(2**70)
