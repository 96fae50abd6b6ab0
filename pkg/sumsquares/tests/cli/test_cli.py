import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from sumsquares import __version__
from sumsquares.cli import entry_point

TESTS_PATH = Path(__file__).parent.parent
DATA_PATH = TESTS_PATH / "test_data_files"


@pytest.fixture
def runner():
    return CliRunner()


def _anova(runner, filename, *args):
    return runner.invoke(
        entry_point,
        ["anova", "--data", str(DATA_PATH / filename), "--formula", "y ~ A*B", *args],
    )


def test_version(runner):
    result = runner.invoke(entry_point, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_anova_text(runner):
    result = _anova(runner, "fixture.csv", "--type", "III")
    assert result.exit_code == 0
    assert result.stdout.startswith("Type III sums of squares\n")
    a_line = [line for line in result.stdout.splitlines() if line.startswith("A ")][0]
    assert a_line.split()[:3] == ["A", "1", "21.3333333333"]
    assert "Loaded 6 observations of 3 variables" in result.stderr
    assert "Running anova" in result.stderr


def test_anova_json(runner):
    result = _anova(runner, "fixture.csv", "--format", "json")
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document["type"] == "III"
    assert document["terms"][0]["term"] == "A"
    assert document["terms"][0]["ss"] == 21.3333333333
    assert document["terms"][0]["df"] == 1
    assert document["sse"] == 4
    assert document["dfe"] == 2
    assert document["mse"] == 2
    # Re-serializing gives the same bytes
    assert json.dumps(document, indent=2) + "\n" == result.stdout


def test_anova_text_and_json_agree(runner):
    text = _anova(runner, "unequal.csv", "--type", "II").stdout
    document = json.loads(_anova(runner, "unequal.csv", "--type", "II", "--format", "json").stdout)
    for row in document["terms"]:
        line = [line for line in text.splitlines() if line.split()[0] == row["term"]][0]
        assert float(line.split()[2]) == row["ss"]
    assert document["terms"][0]["ss"] == 38.4


def test_type1_matches_type3_when_balanced(runner):
    type1 = json.loads(_anova(runner, "balanced.csv", "--type", "I", "--format", "json").stdout)
    type3 = json.loads(_anova(runner, "balanced.csv", "--type", "III", "--format", "json").stdout)
    assert type1["terms"][0]["term"] == "(1)"
    assert [(r["term"], r["df"]) for r in type1["terms"][1:]] == [
        (r["term"], r["df"]) for r in type3["terms"]
    ]
    # Main effects agree; the interaction is zero up to rounding
    assert [r["ss"] for r in type1["terms"][1:3]] == [r["ss"] for r in type3["terms"][:2]] == [4, 1]
    assert type3["dfe"] == 0


def test_anova_bad_formula(runner):
    result = runner.invoke(
        entry_point, ["anova", "--data", str(DATA_PATH / "fixture.csv"), "--formula", "y ~ A +"]
    )
    assert result.exit_code == 1
    assert "unexpected end of formula at byte 7" in result.stderr
    assert result.stdout == ""


def test_anova_bad_data(runner):
    result = _anova(runner, "bad.csv")
    assert result.exit_code == 1
    assert "non-numeric value in row 3" in result.stderr


def test_anova_missing_file(runner):
    result = _anova(runner, "does_not_exist.csv")
    assert result.exit_code == 2


def test_anova_bad_type(runner):
    result = _anova(runner, "fixture.csv", "--type", "IV")
    assert result.exit_code == 2


def test_verify(runner):
    result = runner.invoke(
        entry_point, ["verify", "--data", str(DATA_PATH / "fixture.csv"), "--formula", "y ~ A*B"]
    )
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    a_block = lines[lines.index("A main effect") + 1 : lines.index("A main effect") + 6]
    assert [line.split()[0] for line in a_block] == ["Type", "RMFM", "MWSM", "Contrast", "Type"]
    assert all("ss=21.3333333333" in line for line in a_block)
    assert lines[-1] == "Verdict: PASS (tolerance 1e-08)"


def test_verify_json(runner):
    result = runner.invoke(
        entry_point,
        ["verify", "--data", str(DATA_PATH / "fixture.csv"), "--formula", "y ~ A + B", "--format", "json"],
    )
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document["passed"] is True
    assert document["factors"] == ["A", "B"]
    assert document["factor_comparisons"][0]["ss"]["MWSM"]["ss"] == 21.3333333333


def test_verify_empty_cell(runner):
    result = runner.invoke(
        entry_point, ["verify", "--data", str(DATA_PATH / "empty_cell.csv"), "--formula", "y ~ A*B"]
    )
    assert result.exit_code == 0
    assert "MWSM undefined (1 empty cell(s))" in result.stdout
    assert "Type III df 2, RMFM df 1" in result.stdout


@pytest.mark.parametrize("formula", ["y ~ A", "y ~ A*B*C"])
def test_verify_needs_two_factors(runner, formula):
    result = runner.invoke(
        entry_point, ["verify", "--data", str(DATA_PATH / "fixture.csv"), "--formula", formula]
    )
    assert result.exit_code == 2
    assert "exactly two factors" in result.stderr


def test_verify_corrupted(runner):
    result = runner.invoke(
        entry_point, ["verify", "--data", str(DATA_PATH / "missing.csv"), "--formula", "y ~ A*B"]
    )
    assert result.exit_code == 1
    assert "missing a value in row 2" in result.stderr


def test_simulate(runner):
    result = runner.invoke(entry_point, ["simulate", "--runs", "20", "--seed", "42"])
    assert result.exit_code == 0
    assert result.stdout.startswith("Simulated 20 layouts with seed 42 (PCG64)\n")
    assert "Passed 20/20" in result.stdout


def test_simulate_deterministic(runner):
    args = ["simulate", "--runs", "10", "--empty-prob", "0.2", "--format", "json"]
    first = runner.invoke(entry_point, args)
    second = runner.invoke(entry_point, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    assert json.loads(first.stdout)["seed"] == 42


def test_simulate_no_runs(runner):
    result = runner.invoke(entry_point, ["simulate", "--runs", "0"])
    assert result.exit_code == 0
    assert "Passed 0/0" in result.stdout


def test_simulate_empty_cells(runner):
    result = runner.invoke(
        entry_point,
        ["simulate", "--runs", "5", "--a-levels", "3-4", "--b-levels", "3", "--empty-cells", "1", "--jobs", "2"],
    )
    assert result.exit_code == 0
    assert "Passed 5/5" in result.stdout


@pytest.mark.parametrize(
    "args",
    [
        ["--a-levels", "1-3"],
        ["--b-levels", "x"],
        ["--cell-size", "4-2"],
        ["--runs", "-1"],
        ["--jobs", "0"],
        ["--empty-prob", "1.0"],
    ],
)
def test_simulate_usage_errors(runner, args):
    result = runner.invoke(entry_point, ["simulate", *args])
    assert result.exit_code == 2
