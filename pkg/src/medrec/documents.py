"""Clinical document unit shared by the pipeline stages."""

from __future__ import annotations

import enum
from dataclasses import dataclass

N_QUESTIONS = 31


class DocumentCategory(enum.Enum):
    PATHOLOGY = "Pathology"
    ADMINISTRATIVE = "Administrative"
    LAB_RESULTS = "LabResults"
    SOAP_NOTE = "SoapNote"
    LLM_ANSWER = "LlmAnswer"
    OTHER = "Other"


class ProvenanceKind(enum.Enum):
    SOURCE_RECORD = "SourceRecord"
    LLM_ANSWER = "LlmAnswer"


@dataclass(frozen=True)
class DocumentProvenance:
    """Where a document came from: a source record, or one generated answer."""

    kind: ProvenanceKind
    question_index: int | None = None

    def __post_init__(self):
        if self.kind is ProvenanceKind.LLM_ANSWER:
            qi = self.question_index
            if not isinstance(qi, int) or not (1 <= qi <= N_QUESTIONS):
                raise ValueError(
                    f"LlmAnswer provenance needs question_index in 1..{N_QUESTIONS}, "
                    f"got {qi!r}"
                )
        elif self.question_index is not None:
            raise ValueError("question_index is only valid for LlmAnswer provenance")

    @classmethod
    def source_record(cls) -> "DocumentProvenance":
        return cls(ProvenanceKind.SOURCE_RECORD)

    @classmethod
    def llm_answer(cls, question_index: int) -> "DocumentProvenance":
        return cls(ProvenanceKind.LLM_ANSWER, question_index)

    @property
    def weight(self) -> float:
        """Vote weight in consolidation; generated answers count half."""
        return 0.5 if self.kind is ProvenanceKind.LLM_ANSWER else 1.0


SOURCE_RECORD = DocumentProvenance.source_record()


@dataclass(frozen=True)
class ClinicalDocument:
    """One segmented document; category is None until classification."""

    doc_id: str
    patient_id: str
    text: str
    category: DocumentCategory | None = None
    provenance: DocumentProvenance = SOURCE_RECORD

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"document {self.doc_id!r} has empty text")

    def with_category(self, category: DocumentCategory) -> "ClinicalDocument":
        return ClinicalDocument(
            self.doc_id, self.patient_id, self.text, category, self.provenance
        )
