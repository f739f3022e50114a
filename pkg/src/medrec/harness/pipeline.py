"""End-to-end orchestration of the five system topologies.

Every topology shares the same preprocessing front (redact, segment,
classify) and the same scoring tail; they differ only in which documents
reach the reasoning engine:

* ``nlp``        - every preprocessed document.
* ``ret``        - the per-question top-k retrieved chunks, deduplicated,
                   as the sole input.
* ``gen``        - only the generated per-question answers.
* ``retgen``     - retrieved chunks plus generated answers.
* ``standalone`` - no reasoning at all; answers are parsed directly.

Patients are independent: one patient's failure is recorded and the rest
continue.  Metric accumulation is a commutative count sum, so the report
is identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from time import perf_counter

from medrec.corpus import load_gold_standard, load_patient_corpus
from medrec.corpus.loader import GoldStandard, PatientRecordSet, RawDocumentText
from medrec.documents import ClinicalDocument
from medrec.extraction import build_tag_graph
from medrec.harness.metrics import (
    MatchCounts,
    macro_average,
    match_patient,
    metrics_table,
    sum_counts,
)
from medrec.harness.report import EvalReport, emit_report
from medrec.llm import (
    DEFAULT_CHUNK_SIZE,
    DEFAULT_K,
    BackendConfig,
    BackendKind,
    Chunk,
    QuestionBank,
    answers_to_documents,
    chunk_documents,
    generate_answer,
    load_bundled_question_bank,
    load_question_bank,
    make_embedder,
    make_generator,
    parse_answer_readout,
    retrieve_top_k,
)
from medrec.ontology import OntologyGraph, load_bundled_ontology, load_ontology
from medrec.preprocess import (
    DEFAULT_SEGMENT_MIN_LEN,
    bundled_gazetteer_path,
    classify_document,
    deidentify,
    load_gazetteer,
    segment_documents,
)
from medrec.reasoning import (
    DEFAULT_TAU,
    PatientGraph,
    VariableReadout,
    consolidate_patient,
    extract_variables,
    ground_tag_graph,
)
from medrec.validation import check_fraction, check_positive_int


class SetupKind(enum.Enum):
    NLP_REASONING = "nlp"
    RET_NLP_REASONING = "ret"
    GEN_NLP_REASONING = "gen"
    RET_GEN_NLP_REASONING = "retgen"
    STANDALONE_LLM = "standalone"


_NEEDS_EMBEDDER = frozenset(SetupKind) - {SetupKind.NLP_REASONING}
_NEEDS_GENERATOR = frozenset(
    {SetupKind.GEN_NLP_REASONING, SetupKind.RET_GEN_NLP_REASONING, SetupKind.STANDALONE_LLM}
)


@dataclass(frozen=True)
class RunConfig:
    setup: SetupKind
    corpus_path: Path
    gold_path: Path
    ontology_path: Path | None = None  # None -> bundled
    questions_path: Path | None = None  # None -> bundled
    out_path: Path | None = None
    embedder: BackendConfig | None = None
    generator: BackendConfig | None = None
    chunk_size: int = DEFAULT_CHUNK_SIZE
    k: int = DEFAULT_K
    tau: float = DEFAULT_TAU
    seed: int = 0
    workers: int = 1
    segment_min_len: int = DEFAULT_SEGMENT_MIN_LEN
    anomalies: tuple[str, ...] = ()

    def __post_init__(self):
        check_positive_int(self.chunk_size, "chunk_size")
        check_positive_int(self.k, "k")
        check_positive_int(self.workers, "workers")
        check_fraction(self.tau, "tau")
        if self.setup in _NEEDS_EMBEDDER and self.embedder is None:
            raise ValueError(f"setup {self.setup.value!r} requires an embedder")
        if self.setup in _NEEDS_GENERATOR and self.generator is None:
            raise ValueError(f"setup {self.setup.value!r} requires a generator")
        if self.embedder is not None and self.embedder.kind is not BackendKind.EMBEDDER:
            raise ValueError("embedder config has the wrong backend kind")
        if self.generator is not None and self.generator.kind is not BackendKind.GENERATOR:
            raise ValueError("generator config has the wrong backend kind")

    def as_payload(self) -> dict:
        """JSON-safe echo for the report."""
        def backend(cfg: BackendConfig | None):
            if cfg is None:
                return None
            return {"endpoint": cfg.endpoint or "mock", "temperature": cfg.temperature}

        return {
            "setup": self.setup.value,
            "corpus": str(self.corpus_path),
            "gold": str(self.gold_path),
            "ontology": str(self.ontology_path) if self.ontology_path else "bundled",
            "questions": str(self.questions_path) if self.questions_path else "bundled",
            "embedder": backend(self.embedder),
            "generator": backend(self.generator),
            "chunk_size": self.chunk_size,
            "k": self.k,
            "tau": self.tau,
            "seed": self.seed,
            "workers": self.workers,
            "segment_min_len": self.segment_min_len,
            "anomalies": list(self.anomalies),
        }


@dataclass(frozen=True)
class PatientFailure:
    patient_id: str
    error: str


@dataclass
class RunResult:
    report: EvalReport
    readouts: dict[str, VariableReadout] = field(default_factory=dict)
    failures: list[PatientFailure] = field(default_factory=list)


# ------------------------------------------------------------------ stages


def preprocess_records(
    patient: PatientRecordSet,
    gazetteer: frozenset[str],
    *,
    min_len: int = DEFAULT_SEGMENT_MIN_LEN,
    boundary_model=None,
) -> list[ClinicalDocument]:
    """Redact, segment, and classify every record of one patient."""
    docs: list[ClinicalDocument] = []
    for record in patient.records:
        redacted = deidentify(record.text, gazetteer).redacted_text
        segments = segment_documents(
            RawDocumentText(record.source_id, redacted),
            boundary_model,
            patient_id=patient.patient_id,
            min_len=min_len,
        )
        docs.extend(seg.with_category(classify_document(seg)) for seg in segments)
    return docs


def reason_documents(
    docs: list[ClinicalDocument],
    onto: OntologyGraph,
    *,
    patient_id: str,
    tau: float = DEFAULT_TAU,
) -> tuple[PatientGraph, VariableReadout]:
    graphs = [
        ground_tag_graph(
            build_tag_graph(doc, onto),
            onto,
            category=doc.category,
            provenance_kind=doc.provenance.kind,
        )
        for doc in docs
    ]
    patient_graph = consolidate_patient(graphs, onto, patient_id=patient_id)
    return patient_graph, extract_variables(patient_graph, onto, tau=tau)


def chunks_to_documents(
    chunks: list[Chunk], source_docs: list[ClinicalDocument]
) -> list[ClinicalDocument]:
    """Chunks re-enter reasoning with their source document's category."""
    by_id = {doc.doc_id: doc for doc in source_docs}
    out = []
    for chunk in chunks:
        src = by_id[chunk.source_doc_id]
        out.append(
            ClinicalDocument(
                doc_id=chunk.chunk_id,
                patient_id=src.patient_id,
                text=chunk.text,
                category=src.category,
                provenance=src.provenance,
            )
        )
    return out


def retrieve_question_contexts(
    chunks: list[Chunk], bank: QuestionBank, embedder, k: int
) -> dict[int, list[Chunk]]:
    return {
        index: retrieve_top_k(question, chunks, embedder, k)
        for index, question in bank.items()
    }


def dedupe_chunks(contexts: dict[int, list[Chunk]]) -> list[Chunk]:
    """Union of all retrieved chunks, first occurrence in question order."""
    seen: set[str] = set()
    out: list[Chunk] = []
    for index in sorted(contexts):
        for chunk in contexts[index]:
            if chunk.chunk_id not in seen:
                seen.add(chunk.chunk_id)
                out.append(chunk)
    return out


def _generate_all(
    bank: QuestionBank,
    contexts: dict[int, list[Chunk]],
    generator,
    temperature: float | None,
):
    return [
        generate_answer(
            question,
            contexts[index],
            generator,
            question_index=index,
            temperature=temperature,
        )
        for index, question in bank.items()
    ]


def run_patient(
    cfg: RunConfig,
    patient: PatientRecordSet,
    onto: OntologyGraph,
    bank: QuestionBank,
    gazetteer: frozenset[str],
    embedder=None,
    generator=None,
) -> VariableReadout:
    """One patient through the configured topology."""
    docs = preprocess_records(patient, gazetteer, min_len=cfg.segment_min_len)
    pid = patient.patient_id

    if cfg.setup is SetupKind.NLP_REASONING:
        _, readout = reason_documents(docs, onto, patient_id=pid, tau=cfg.tau)
        return readout

    chunks = chunk_documents(docs, cfg.chunk_size)
    contexts = retrieve_question_contexts(chunks, bank, embedder, cfg.k)

    if cfg.setup is SetupKind.RET_NLP_REASONING:
        retained = chunks_to_documents(dedupe_chunks(contexts), docs)
        _, readout = reason_documents(retained, onto, patient_id=pid, tau=cfg.tau)
        return readout

    temperature = cfg.generator.temperature if cfg.generator else None
    answers = _generate_all(bank, contexts, generator, temperature)

    if cfg.setup is SetupKind.STANDALONE_LLM:
        return parse_answer_readout(answers, pid, onto, bank)

    answer_docs = answers_to_documents(answers, pid)
    if cfg.setup is SetupKind.GEN_NLP_REASONING:
        _, readout = reason_documents(answer_docs, onto, patient_id=pid, tau=cfg.tau)
        return readout

    retained = chunks_to_documents(dedupe_chunks(contexts), docs)
    _, readout = reason_documents(retained + answer_docs, onto, patient_id=pid, tau=cfg.tau)
    return readout


# --------------------------------------------------------------------- run


def _build_backends(cfg: RunConfig):
    embedder = None
    generator = None
    if cfg.embedder is not None:
        embedder = make_embedder(cfg.embedder.endpoint or "mock")
    if cfg.generator is not None:
        generator = make_generator(
            cfg.generator.endpoint or "mock",
            anomalies=cfg.anomalies,
            temperature=cfg.generator.temperature or 0.0,
        )
    return embedder, generator


def run_setup(cfg: RunConfig) -> RunResult:
    """Evaluate every patient under ``cfg`` and score against gold."""
    started = datetime.now(timezone.utc)
    clock = perf_counter()

    onto = (
        load_ontology(cfg.ontology_path)
        if cfg.ontology_path is not None
        else load_bundled_ontology()
    )
    bank = (
        load_question_bank(cfg.questions_path)
        if cfg.questions_path is not None
        else load_bundled_question_bank()
    )
    gazetteer = load_gazetteer(bundled_gazetteer_path())
    patients = load_patient_corpus(cfg.corpus_path)
    gold = load_gold_standard(cfg.gold_path, onto)
    embedder, generator = _build_backends(cfg)

    readouts: dict[str, VariableReadout] = {}
    failures: list[PatientFailure] = []

    def evaluate(patient: PatientRecordSet):
        return run_patient(cfg, patient, onto, bank, gazetteer, embedder, generator)

    if cfg.workers == 1:
        for patient in patients:
            try:
                readouts[patient.patient_id] = evaluate(patient)
            except Exception as exc:
                failures.append(PatientFailure(patient.patient_id, str(exc)))
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {
                pool.submit(evaluate, patient): patient.patient_id
                for patient in patients
            }
            for future in concurrent.futures.as_completed(futures):
                pid = futures[future]
                try:
                    readouts[pid] = future.result()
                except Exception as exc:
                    failures.append(PatientFailure(pid, str(exc)))
    failures.sort(key=lambda f: f.patient_id)

    per_patient = [
        match_patient(readouts[pid], gold.get(pid) or GoldStandard(pid), onto)
        for pid in sorted(readouts)
    ]
    rows = metrics_table(sum_counts(per_patient))

    finished = datetime.now(timezone.utc)
    report = EvalReport(
        setup=cfg.setup.value,
        variables=rows,
        macro_f1=macro_average(rows),
        config=cfg.as_payload(),
        patients_evaluated=len(readouts),
        failures=tuple((f.patient_id, f.error) for f in failures),
        metadata={
            "started_at": started.isoformat(),
            "finished_at": finished.isoformat(),
            "duration_seconds": perf_counter() - clock,
        },
    )
    if cfg.out_path is not None:
        emit_report(report, cfg.out_path, readouts=readouts)
    return RunResult(report=report, readouts=readouts, failures=failures)
