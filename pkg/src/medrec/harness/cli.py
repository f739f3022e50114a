"""Command-line entry points: run, gen-corpus, verify-tables."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from medrec.corpus.synthetic import generate_corpus
from medrec.harness.pipeline import RunConfig, SetupKind, run_setup
from medrec.harness.report import format_table
from medrec.harness.tables import load_tables, verify_tables
from medrec.llm import (
    ANOMALY_MODES,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_K,
    BackendConfig,
    BackendKind,
)
from medrec.preprocess import DEFAULT_SEGMENT_MIN_LEN
from medrec.reasoning import DEFAULT_TAU

_SETUPS = {kind.value: kind for kind in SetupKind}


@click.group()
def main():
    """Abstract cancer variables from per-patient document collections."""


@main.command()
@click.option(
    "--setup",
    type=click.Choice(sorted(_SETUPS)),
    required=True,
    help="Topology to evaluate.",
)
@click.option(
    "--corpus",
    "corpus_path",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
)
@click.option(
    "--gold",
    "gold_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
)
@click.option(
    "--ontology",
    "ontology_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Concept graph file; bundled toy ontology when omitted.",
)
@click.option(
    "--questions",
    "questions_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Question list; bundled bank when omitted.",
)
@click.option("--embedder", default="mock", show_default=True, help="'mock' or an http(s) URL.")
@click.option("--generator", default="mock", show_default=True, help="'mock' or an http(s) URL.")
@click.option("--chunk-size", default=DEFAULT_CHUNK_SIZE, show_default=True)
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--tau", default=DEFAULT_TAU, show_default=True)
@click.option("--temperature", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--segment-min-len", default=DEFAULT_SEGMENT_MIN_LEN, show_default=True)
@click.option(
    "--anomaly",
    "anomalies",
    multiple=True,
    type=click.Choice(sorted(ANOMALY_MODES) + ["all"]),
    help="Mock-generator fault to inject; repeatable.",
)
@click.option(
    "--out",
    "out_path",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory for report.json, report.txt, predictions.json.",
)
def run(
    setup,
    corpus_path,
    gold_path,
    ontology_path,
    questions_path,
    embedder,
    generator,
    chunk_size,
    k,
    tau,
    temperature,
    seed,
    workers,
    segment_min_len,
    anomalies,
    out_path,
):
    """Evaluate one topology over a corpus and score against gold."""
    kind = _SETUPS[setup]
    needs_embedder = kind is not SetupKind.NLP_REASONING
    needs_generator = kind in (
        SetupKind.GEN_NLP_REASONING,
        SetupKind.RET_GEN_NLP_REASONING,
        SetupKind.STANDALONE_LLM,
    )
    try:
        cfg = RunConfig(
            setup=kind,
            corpus_path=corpus_path,
            gold_path=gold_path,
            ontology_path=ontology_path,
            questions_path=questions_path,
            out_path=out_path,
            embedder=(
                BackendConfig(
                    "embedder",
                    BackendKind.EMBEDDER,
                    endpoint=None if embedder == "mock" else embedder,
                    chunk_size=chunk_size,
                    k=k,
                )
                if needs_embedder
                else None
            ),
            generator=(
                BackendConfig(
                    "generator",
                    BackendKind.GENERATOR,
                    endpoint=None if generator == "mock" else generator,
                    chunk_size=chunk_size,
                    temperature=temperature,
                )
                if needs_generator
                else None
            ),
            chunk_size=chunk_size,
            k=k,
            tau=tau,
            seed=seed,
            workers=workers,
            segment_min_len=segment_min_len,
            anomalies=tuple(anomalies),
        )
        result = run_setup(cfg)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    click.echo(format_table(result.report), nl=False)
    for failure in result.failures:
        click.echo(f"patient {failure.patient_id} failed: {failure.error}", err=True)
    if out_path is not None:
        click.echo(f"report written to {out_path}")


@main.command("gen-corpus")
@click.option("--seed", default=0, show_default=True)
@click.option("--patients", "n_patients", default=10, show_default=True)
@click.option(
    "--out",
    "out_path",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
)
@click.option("--noise/--no-noise", default=True, show_default=True)
def gen_corpus(seed, n_patients, out_path, noise):
    """Write a synthetic corpus, gold file, and manifest."""
    try:
        manifest = generate_corpus(
            out_path, seed=seed, n_patients=n_patients, noise=noise
        )
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(
        f"wrote {manifest['n_patients']} patients, "
        f"{manifest['total_documents']} documents, to {out_path}"
    )


@main.command("verify-tables")
@click.option(
    "--tables",
    "tables_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Benchmark table file; bundled transcription when omitted.",
)
def verify_tables_cmd(tables_path):
    """Check published P/R/F1 cells and macro averages for consistency."""
    try:
        tables = load_tables(tables_path)
        cells, macros = verify_tables(tables)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    bad_cells = [c for c in cells if not c.ok]
    bad_macros = [m for m in macros if not m.ok]
    click.echo(f"checked {len(cells)} F1 cells: {len(cells) - len(bad_cells)} consistent")
    for cell in bad_cells:
        click.echo(
            f"  MISMATCH {cell.setup}/{cell.llm or '-'} {cell.variable}: "
            f"reported {cell.reported_f1:.2f}, recomputed {cell.recomputed_f1:.2f}",
            err=True,
        )
    click.echo(f"checked {len(macros)} macro averages: {len(macros) - len(bad_macros)} consistent")
    for macro in bad_macros:
        click.echo(
            f"  MISMATCH macro {macro.setup}/{macro.llm}: "
            f"reported {macro.reported:.2f}, recomputed {macro.recomputed:.4f}",
            err=True,
        )
    if bad_cells or bad_macros:
        sys.exit(1)


if __name__ == "__main__":
    main()
