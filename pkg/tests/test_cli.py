import io
import json

import pytest

import asymid
from asymid.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def path(name):
    return str(asymid.corpus_path(name))


def test_validate_ok_and_errors():
    code, out = run("validate", path("dating.aid"))
    assert code == 0
    assert "verdict\tWellDefined" in out
    code, out = run("validate", path("invalid/arity.aid"))
    assert code == 1 and "ArityMismatch" in out
    code, out = run("validate", path("invalid/unbroken_cycle.aid"))
    assert code == 1 and "UnbrokenCycle" in out
    code, out = run("validate", path("invalid/restrict_clash.aid"))
    assert code == 1 and "IllDefinedRestrictives" in out


def test_reduce_prints_reduced_model():
    code, out = run("reduce", "dating.aid", "--assign", "Date?=n")
    assert code == 0
    nodes = next(l for l in out.splitlines() if l.startswith("# nodes: "))[len("# nodes: "):]
    assert "Accept?" in nodes.split(", ") and "Movie" not in nodes.split(", ")
    assert "# assigned: Date?=n" in out
    assert "format 1" in out


def test_reduce_rejects_non_initial_split():
    code, out = run("reduce", "dating.aid", "--assign", "Accept?=y")
    assert code == 1 and "NotInitialSplit" in out


def test_usage_errors():
    assert run("reduce", "dating.aid", "--assign", "oops")[0] == 2
    assert run("solve")[0] == 2
    assert run("frobnicate")[0] == 2


def test_splits_and_contexts():
    code, out = run("splits", "dating.aid")
    assert "(Date?=y, Accept?=y, To do?=movie)\texhaustive" in out
    assert "(Date?=n, Club?=n)\texhaustive" in out
    code, out = run("contexts", "dating.aid", "--decision", "Club?")
    assert out.splitlines()[1:] == ["Club?\tDate?=y, Accept?=n\t", "Club?\tDate?=n\t"]


def test_solve_oracle_check():
    code, out = run("solve", "dating.aid", "--oracle-check")
    assert code == 0
    assert "oracle agreement: meu Δ < 1e-9" in out


def test_solve_json_schema_and_determinism():
    code, first = run("solve", "dating.aid", "--json", "--seed", "3")
    _, second = run("solve", "dating.aid", "--json", "--seed", "3")
    assert code == 0 and first == second
    doc = json.loads(first)
    assert set(doc) == {"format", "meu", "strategies", "warnings"}
    s = doc["strategies"][0]
    assert set(s) == {"decision", "context", "function"}
    assert set(s["function"][0]) == {"observed", "choose"}


def test_solve_refuses_possibly_ill_defined():
    code, out = run("solve", "significant.aid")
    assert code == 1 and "--force" in out
    code, out = run("solve", "significant.aid", "--force", "--trials", "20")
    assert code == 0 and "Significant" in out


def test_oracle_and_probe():
    code, out = run("oracle", "oil_test.aid")
    assert "scenarios\t12" in out and "state_space\t16" in out
    code, out = run("probe", "significant.aid", "--trials", "10")
    assert "overall\tSignificant" in out


def test_report_writes_tables_and_figures(tmp_path):
    code, out = run("report", "conditioning.aid", "--out", str(tmp_path))
    assert code == 0
    for suffix in ("_summary.tsv", "_strategies.tsv", "_splits.png", "_oracle.png"):
        assert (tmp_path / f"conditioning{suffix}").stat().st_size > 0
    summary = (tmp_path / "conditioning_summary.tsv").read_text().splitlines()
    assert summary[0] == "key\tvalue"


def test_figure_option(tmp_path):
    fig = tmp_path / "tree.png"
    assert run("splits", "dating.aid", "--figure", str(fig))[0] == 0
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_missing_file():
    code, out = run("solve", "no/such/file.aid")
    assert code == 1 and "cannot read" in out
