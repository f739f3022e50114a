"""Command-line behaviour through click's test runner."""

import json

import pytest
from click.testing import CliRunner

from medrec.harness.cli import main
from medrec.harness.tables import bundled_tables_path


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory, runner):
    out = tmp_path_factory.mktemp("cli-corpus")
    result = runner.invoke(
        main,
        ["gen-corpus", "--seed", "9", "--patients", "2", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    return out


def test_gen_corpus_writes_the_layout(corpus_dir, runner):
    assert (corpus_dir / "corpus" / "cohorts.tsv").is_file()
    assert (corpus_dir / "gold.tsv").is_file()
    assert (corpus_dir / "manifest.json").is_file()
    result = runner.invoke(
        main,
        ["gen-corpus", "--seed", "9", "--patients", "2", "--no-noise",
         "--out", str(corpus_dir / "clean")],
    )
    assert result.exit_code == 0
    assert "wrote 2 patients" in result.output


def test_gen_corpus_rejects_bad_count(runner, tmp_path):
    result = runner.invoke(
        main, ["gen-corpus", "--patients", "0", "--out", str(tmp_path / "x")]
    )
    assert result.exit_code == 1
    assert "error:" in result.output


def test_run_nlp_end_to_end(corpus_dir, runner, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(
        main,
        [
            "run",
            "--setup", "nlp",
            "--corpus", str(corpus_dir / "corpus"),
            "--gold", str(corpus_dir / "gold.tsv"),
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "macro F1" in result.output
    assert f"report written to {out}" in result.output
    payload = json.loads((out / "report.json").read_text("utf-8"))
    assert payload["setup"] == "nlp"
    assert payload["macro_f1"] == pytest.approx(1.0)


def test_run_standalone_with_anomalies(corpus_dir, runner):
    result = runner.invoke(
        main,
        [
            "run",
            "--setup", "standalone",
            "--corpus", str(corpus_dir / "corpus"),
            "--gold", str(corpus_dir / "gold.tsv"),
            "--anomaly", "all",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "macro F1" in result.output


def test_run_rejects_unknown_setup_and_anomaly(corpus_dir, runner):
    base = [
        "run",
        "--corpus", str(corpus_dir / "corpus"),
        "--gold", str(corpus_dir / "gold.tsv"),
    ]
    assert runner.invoke(main, base + ["--setup", "hybrid"]).exit_code == 2
    assert (
        runner.invoke(
            main, base + ["--setup", "standalone", "--anomaly", "bogus"]
        ).exit_code
        == 2
    )


def test_run_missing_corpus_is_a_usage_error(runner, corpus_dir):
    result = runner.invoke(
        main,
        [
            "run",
            "--setup", "nlp",
            "--corpus", "/nonexistent/corpus",
            "--gold", str(corpus_dir / "gold.tsv"),
        ],
    )
    assert result.exit_code == 2


def test_run_reports_runtime_errors(runner, corpus_dir, tmp_path):
    bad_gold = tmp_path / "gold.tsv"
    bad_gold.write_text("p000\tMedications\tconcept:not_a_real_drug\n", "utf-8")
    result = runner.invoke(
        main,
        [
            "run",
            "--setup", "nlp",
            "--corpus", str(corpus_dir / "corpus"),
            "--gold", str(bad_gold),
        ],
    )
    assert result.exit_code == 1
    assert "error:" in result.output


def test_verify_tables_passes_on_bundled_data(runner):
    result = runner.invoke(main, ["verify-tables"])
    assert result.exit_code == 0, result.output
    assert "checked 195 F1 cells: 195 consistent" in result.output
    assert "checked 4 macro averages: 4 consistent" in result.output


def test_verify_tables_flags_a_tampered_cell(runner, tmp_path):
    tables = json.loads(bundled_tables_path().read_text("utf-8"))
    tables["rows"][0]["f1"][0] += 2.0
    path = tmp_path / "tables.json"
    path.write_text(json.dumps(tables), "utf-8")
    result = runner.invoke(main, ["verify-tables", "--tables", str(path)])
    assert result.exit_code == 1
    assert "MISMATCH" in result.output


def test_verify_tables_rejects_misshapen_file(runner, tmp_path):
    tables = json.loads(bundled_tables_path().read_text("utf-8"))
    tables["rows"][0]["recall"] = tables["rows"][0]["recall"][:3]
    path = tmp_path / "tables.json"
    path.write_text(json.dumps(tables), "utf-8")
    result = runner.invoke(main, ["verify-tables", "--tables", str(path)])
    assert result.exit_code == 1
    assert "error:" in result.output
