import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import DATA
from sfr.cli import DEFAULT_SEED, run

BOSTON = ["--data", str(DATA / "boston.csv"), "--outcome", "crim", "--features", "lstat"]
LABOR = ["--data", str(DATA / "labor.csv"), "--outcome", "earnings", "--features", "treatment"]


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_score_csv(capsys):
    code, out, _ = invoke(capsys, "score", *BOSTON, "--iterations", "1000", "--seed", "42")
    assert code == 0
    r = rows(out)
    assert len(r) == 506
    scores = [float(x["score"]) for x in r]
    assert min(scores) == 0.0 and max(scores) == 1.0


def test_score_exhaustive(tmp_path, capsys):
    p = tmp_path / "six.csv"
    p.write_text("x,y\n0,0\n1,1\n2,2\n3,3\n4,4\n2,10\n")
    code, out, _ = invoke(capsys, "score", "--data", str(p), "--outcome", "y", "--features", "x",
                          "--no-intercept", "--exhaustive")
    assert code == 0 and float(rows(out)[5]["score"]) == 0.0


def test_identical_output_across_runs_and_threads(capsys):
    args = ["fit", *LABOR, "--estimators", "ols,sfr", "--bootstrap", "30", "--iterations", "200"]
    _, a, _ = invoke(capsys, *args, "--threads", "1")
    _, b, _ = invoke(capsys, *args, "--threads", "3")
    _, c, _ = invoke(capsys, *args, "--threads", "1")
    assert a == b == c


def test_json_matches_csv(capsys):
    args = ["anneal", *BOSTON, "--bootstrap", "10", "--iterations", "100", "--steps", "6"]
    _, text, _ = invoke(capsys, *args)
    _, js, _ = invoke(capsys, *args, "--format", "json")
    doc = json.loads(js)
    assert doc["meta"]["seed"] == DEFAULT_SEED and doc["meta"]["command"] == "anneal"
    assert "sfr" in doc["meta"]["versions"]
    from_csv = rows(text)
    assert len(from_csv) == len(doc["data"]) == 6
    for c, j in zip(from_csv, doc["data"]):
        for key, value in c.items():
            assert float(value) == j[key]


def test_fit_labor(capsys):
    code, out, _ = invoke(capsys, "fit", *LABOR, "--estimators", "ols,huber,ransac,sfr",
                          "--bootstrap", "50", "--iterations", "200")
    assert code == 0
    effect = [r for r in rows(out) if r["coefficient"] == "treatment"]
    assert [r["estimator"] for r in effect] == ["ols", "huber", "ransac", "sfr"]
    assert float(effect[0]["coef"]) == pytest.approx(1794.34, abs=0.01)


def test_fit_table_format(capsys):
    code, out, _ = invoke(capsys, "fit", *LABOR, "--estimators", "ols", "--bootstrap", "20", "--format", "table")
    assert code == 0 and "Std.Err." in out and "OLS" in out


def test_simulate(tmp_path, capsys):
    draws = tmp_path / "draws.csv"
    code, out, _ = invoke(capsys, "simulate", "--scenario", "4", "--n", "300", "--alpha", "0.05",
                          "--reps", "20", "--estimators", "ols,sfr", "--seed", "7", "--dump-draws", str(draws))
    assert code == 0
    r = {x["estimator"]: float(x["mse"]) for x in rows(out)}
    assert r["sfr"] < r["ols"]
    assert len(rows(draws.read_text())) == 20


def test_describe_and_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = invoke(capsys, "describe", *BOSTON, "--output", str(target))
    assert code == 0 and out == ""
    r = rows(target.read_text())
    assert r[0]["column"] == "crim" and r[1]["count"] == "506"


def test_anneal_balance_goes_to_stderr(capsys):
    code, out, err = invoke(capsys, "anneal", *BOSTON, "--bootstrap", "0", "--balance", "--target", "lstat")
    assert code == 0 and "covariate balance" in err and "smd" not in out


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--data", "missing.csv", "--outcome", "a", "--features", "b"],
        ["fit", *BOSTON[:4], "--features", "nope"],
        ["simulate", "--scenario", "9"],
        ["score", *BOSTON, "--iterations", "0"],
        ["anneal", *BOSTON, "--share", "1.0", "--bootstrap", "0"],
        ["anneal", *BOSTON, "--target", "zeta", "--bootstrap", "0"],
        ["frobnicate"],
        ["score", "--outcome", "crim"],
    ],
)
def test_validation_exit_code(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 1 and out == "" and err.startswith("error [")


def test_computation_exit_code(tmp_path, capsys):
    p = tmp_path / "flat.csv"
    p.write_text("y,x\n" + "".join(f"{i},{1 if i else 0}\n" for i in range(8)))
    code, _, err = invoke(capsys, "fit", "--data", str(p), "--outcome", "y", "--features", "x",
                          "--estimators", "ols", "--bootstrap", "20")
    assert code == 0
    code, _, err = invoke(capsys, "score", "--data", str(p), "--outcome", "y", "--features", "x", "--iterations", "5")
    assert code == 2 and "error [" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sfr", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("sfr ")
