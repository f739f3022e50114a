"""Prompting, answer generation, and answer-to-document conversion."""

from __future__ import annotations

from dataclasses import dataclass

from medrec.documents import ClinicalDocument, DocumentCategory, DocumentProvenance
from medrec.llm.backends import NO_INFORMATION, BackendError
from medrec.llm.chunking import Chunk
from medrec.llm.questions import N_QUESTIONS

PROMPT_TEMPLATE = (
    "Answer the question using only the context.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Context:\n"
    "{context}\n"
)


@dataclass(frozen=True)
class GeneratedAnswer:
    question_index: int
    answer_text: str
    backend_id: str
    temperature: float

    def __post_init__(self):
        if not 1 <= self.question_index <= N_QUESTIONS:
            raise ValueError(
                f"question_index {self.question_index} outside 1..{N_QUESTIONS}"
            )


def build_prompt(question: str, chunks: list[Chunk]) -> str:
    context = "\n\n".join(chunk.text for chunk in chunks)
    return PROMPT_TEMPLATE.format(question=question, context=context)


def _token_count(text: str) -> int:
    return len(text.split())


def generate_answer(
    question: str,
    context_chunks: list[Chunk],
    backend,
    *,
    question_index: int,
    temperature: float | None = None,
) -> GeneratedAnswer:
    """One answer per question; context overflow drops lowest-ranked chunks.

    ``context_chunks`` arrive ranked, so trimming from the tail removes the
    least relevant ones first.
    """
    if temperature is None:
        temperature = getattr(backend, "temperature", 0.0)
    backend_id = getattr(backend, "backend_id", "unknown")
    if not context_chunks:
        return GeneratedAnswer(question_index, NO_INFORMATION, backend_id, temperature)

    chunks = list(context_chunks)
    budget = getattr(backend, "context_budget", None)
    prompt = build_prompt(question, chunks)
    while budget is not None and _token_count(prompt) > budget and len(chunks) > 1:
        chunks.pop()
        prompt = build_prompt(question, chunks)

    try:
        text = backend.generate(prompt, temperature)
    except BackendError as exc:
        raise BackendError(
            str(exc),
            exc.backend_id,
            retriable=exc.retriable,
            question_index=question_index,
        ) from exc
    return GeneratedAnswer(question_index, text, backend_id, temperature)


def answers_to_documents(
    answers: list[GeneratedAnswer], patient_id: str
) -> list[ClinicalDocument]:
    """Wrap answers as LlmAnswer documents, ordered by question index."""
    docs = []
    for answer in sorted(answers, key=lambda a: a.question_index):
        docs.append(
            ClinicalDocument(
                doc_id=f"llm:{patient_id}:q{answer.question_index:02d}",
                patient_id=patient_id,
                text=answer.answer_text,
                category=DocumentCategory.LLM_ANSWER,
                provenance=DocumentProvenance.llm_answer(answer.question_index),
            )
        )
    return docs
