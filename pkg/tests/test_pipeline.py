"""Topology wiring, failure isolation, worker invariance, report emission."""

import json
import re

import pytest

import medrec.harness.pipeline as pipeline
from medrec.corpus import generate_corpus, load_patient_corpus
from medrec.harness import (
    EvalReport,
    RunConfig,
    SetupKind,
    load_report,
    metrics_table,
    run_setup,
    sum_counts,
)
from medrec.harness.metrics import MatchCounts
from medrec.harness.pipeline import (
    chunks_to_documents,
    dedupe_chunks,
    preprocess_records,
    reason_documents,
    retrieve_question_contexts,
)
from medrec.llm import (
    BackendConfig,
    BackendKind,
    Chunk,
    chunk_documents,
    load_bundled_question_bank,
    make_embedder,
)
from medrec.ontology import load_bundled_ontology
from medrec.preprocess import bundled_gazetteer_path, load_gazetteer
from medrec.variables import ALL_VARIABLES

EMB = BackendConfig("embedder", BackendKind.EMBEDDER)
GEN = BackendConfig("generator", BackendKind.GENERATOR)


@pytest.fixture(scope="module")
def root(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline-corpus")
    generate_corpus(out, seed=23, n_patients=3, noise=True)
    return out


def config(root, setup, **kw):
    needs = {
        SetupKind.NLP_REASONING: {},
        SetupKind.RET_NLP_REASONING: {"embedder": EMB},
        SetupKind.GEN_NLP_REASONING: {"embedder": EMB, "generator": GEN},
        SetupKind.RET_GEN_NLP_REASONING: {"embedder": EMB, "generator": GEN},
        SetupKind.STANDALONE_LLM: {"embedder": EMB, "generator": GEN},
    }
    return RunConfig(
        setup=setup,
        corpus_path=root / "corpus",
        gold_path=root / "gold.tsv",
        **{**needs[setup], **kw},
    )


class TestRunConfig:
    def test_backend_requirements_per_setup(self, root):
        config(root, SetupKind.NLP_REASONING)  # no backends needed
        with pytest.raises(ValueError, match="requires an embedder"):
            config(root, SetupKind.RET_NLP_REASONING, embedder=None)
        with pytest.raises(ValueError, match="requires a generator"):
            config(root, SetupKind.GEN_NLP_REASONING, generator=None)
        with pytest.raises(ValueError, match="requires a generator"):
            config(root, SetupKind.STANDALONE_LLM, generator=None)

    def test_backend_kind_mismatch_rejected(self, root):
        with pytest.raises(ValueError, match="wrong backend kind"):
            config(root, SetupKind.RET_NLP_REASONING, embedder=GEN)

    @pytest.mark.parametrize(
        "bad", [{"workers": 0}, {"chunk_size": 0}, {"k": -1}, {"tau": 1.5}]
    )
    def test_numeric_validation(self, root, bad):
        with pytest.raises(ValueError):
            config(root, SetupKind.NLP_REASONING, **bad)

    def test_payload_echo(self, root):
        cfg = config(root, SetupKind.STANDALONE_LLM, anomalies=("all",))
        payload = cfg.as_payload()
        assert payload["setup"] == "standalone"
        assert payload["embedder"]["endpoint"] == "mock"
        assert payload["ontology"] == "bundled"
        assert payload["anomalies"] == ["all"]
        json.dumps(payload)


@pytest.fixture(scope="module")
def stage_env(root):
    patients = load_patient_corpus(root / "corpus")
    return {
        "patient": patients[0],
        "onto": load_bundled_ontology(),
        "bank": load_bundled_question_bank(),
        "gazetteer": load_gazetteer(bundled_gazetteer_path()),
    }


class TestStages:
    def test_preprocess_redacts_and_classifies(self, stage_env):
        docs = preprocess_records(stage_env["patient"], stage_env["gazetteer"])
        assert docs
        for doc in docs:
            assert doc.patient_id == stage_env["patient"].patient_id
            assert doc.category is not None
            assert not re.search(r"\d{3}-\d{2}-\d{4}", doc.text)

    def test_synthetic_documents_fit_one_chunk(self, stage_env):
        docs = preprocess_records(stage_env["patient"], stage_env["gazetteer"])
        chunks = chunk_documents(docs)
        assert [c.chunk_id for c in chunks] == [d.doc_id for d in docs]

    def test_chunks_inherit_source_category(self, stage_env):
        docs = preprocess_records(stage_env["patient"], stage_env["gazetteer"])
        by_id = {d.doc_id: d for d in docs}
        for doc in chunks_to_documents(chunk_documents(docs, 50), docs):
            src = by_id[doc.doc_id.split("#c")[0]]
            assert doc.category is src.category
            assert doc.provenance == src.provenance

    def test_dedupe_keeps_question_order_without_repeats(self):
        def chunk(cid):
            return Chunk(cid, "p", "d", "text", 1)

        a, b, c = chunk("a"), chunk("b"), chunk("c")
        out = dedupe_chunks({4: [a, b], 2: [b, c]})
        assert [ch.chunk_id for ch in out] == ["b", "c", "a"]

    def test_full_recall_retrieval_reproduces_reasoning_input(self, stage_env):
        docs = preprocess_records(stage_env["patient"], stage_env["gazetteer"])
        pid = stage_env["patient"].patient_id
        nlp_graph, nlp_readout = reason_documents(
            docs, stage_env["onto"], patient_id=pid
        )

        chunks = chunk_documents(docs)
        contexts = retrieve_question_contexts(
            chunks, stage_env["bank"], make_embedder("mock"), k=len(chunks)
        )
        retained = chunks_to_documents(dedupe_chunks(contexts), docs)
        ret_graph, ret_readout = reason_documents(
            retained, stage_env["onto"], patient_id=pid
        )
        assert ret_graph == nlp_graph
        assert ret_readout == nlp_readout


class TestRuns:
    def test_nlp_scores_synthetic_perfectly(self, root):
        result = run_setup(config(root, SetupKind.NLP_REASONING))
        assert result.report.macro_f1 == pytest.approx(1.0)
        assert result.report.patients_evaluated == 3
        assert not result.failures

    def test_ret_at_full_recall_matches_nlp(self, root):
        nlp = run_setup(config(root, SetupKind.NLP_REASONING))
        ret = run_setup(config(root, SetupKind.RET_NLP_REASONING, k=500))
        assert ret.readouts == nlp.readouts
        assert ret.report.variables == nlp.report.variables

    @pytest.mark.parametrize(
        "setup",
        [
            SetupKind.GEN_NLP_REASONING,
            SetupKind.RET_GEN_NLP_REASONING,
            SetupKind.STANDALONE_LLM,
        ],
    )
    def test_generation_setups_produce_wellformed_reports(self, root, setup):
        result = run_setup(config(root, setup))
        report = result.report
        assert [r.variable for r in report.variables] == list(ALL_VARIABLES)
        assert 0.0 <= report.macro_f1 <= 1.0
        assert report.patients_evaluated == 3
        assert report.config["setup"] == setup.value

    def test_worker_count_does_not_change_metrics(self, root):
        serial = run_setup(config(root, SetupKind.RET_GEN_NLP_REASONING))
        pooled = run_setup(config(root, SetupKind.RET_GEN_NLP_REASONING, workers=3))
        assert pooled.report.variables == serial.report.variables
        assert pooled.report.macro_f1 == serial.report.macro_f1
        assert pooled.readouts == serial.readouts

    def test_patient_failure_is_isolated(self, root, monkeypatch):
        real = pipeline.run_patient

        def flaky(cfg, patient, *args, **kw):
            if patient.patient_id == "p001":
                raise RuntimeError("synthetic fault")
            return real(cfg, patient, *args, **kw)

        monkeypatch.setattr(pipeline, "run_patient", flaky)
        result = run_setup(config(root, SetupKind.NLP_REASONING))
        assert [(f.patient_id, f.error) for f in result.failures] == [
            ("p001", "synthetic fault")
        ]
        assert result.report.failures == (("p001", "synthetic fault"),)
        assert result.report.patients_evaluated == 2
        assert "p001" not in result.readouts
        assert result.report.macro_f1 == pytest.approx(1.0)

    def test_anomalies_reach_the_generator(self, root):
        clean = run_setup(config(root, SetupKind.STANDALONE_LLM))
        shaken = run_setup(
            config(root, SetupKind.STANDALONE_LLM, anomalies=("all",))
        )
        assert shaken.report.config["anomalies"] == ["all"]
        assert shaken.report.macro_f1 < clean.report.macro_f1


class TestReports:
    def test_emit_and_reload_round_trip(self, root, tmp_path):
        out = tmp_path / "report"
        result = run_setup(config(root, SetupKind.NLP_REASONING, out_path=out))

        loaded = load_report(out / "report.json")
        assert loaded["schema_version"] == 1
        assert loaded["setup"] == "nlp"
        f1s = [row["f1"] for row in loaded["variables"]]
        assert sum(f1s) / len(f1s) == pytest.approx(loaded["macro_f1"])
        assert sorted(loaded["metadata"]) == [
            "duration_seconds",
            "finished_at",
            "started_at",
        ]

        table = (out / "report.txt").read_text(encoding="utf-8")
        assert "macro F1" in table and "Neoplasm" in table

        predictions = json.loads((out / "predictions.json").read_text("utf-8"))
        assert sorted(predictions) == sorted(result.readouts)

    def test_reemission_is_byte_identical(self, root, tmp_path):
        result = run_setup(config(root, SetupKind.NLP_REASONING))
        from medrec.harness import emit_report

        a = emit_report(result.report, tmp_path / "a", readouts=result.readouts)
        b = emit_report(result.report, tmp_path / "b", readouts=result.readouts)
        for name in ("report", "table", "predictions"):
            assert a[name].read_bytes() == b[name].read_bytes()

    def test_report_rejects_wrong_row_set(self, root):
        totals = {kind: MatchCounts(1, 0, 0) for kind in ALL_VARIABLES}
        rows = metrics_table(sum_counts([totals]))
        with pytest.raises(ValueError, match="canonical order"):
            EvalReport(
                setup="nlp",
                variables=rows[:-1],
                macro_f1=1.0,
                config={},
                patients_evaluated=0,
            )
