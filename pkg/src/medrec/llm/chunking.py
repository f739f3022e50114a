"""Split documents into retrieval chunks of bounded whitespace-token size."""

from __future__ import annotations

import re
from dataclasses import dataclass

from medrec.documents import ClinicalDocument
from medrec.validation import check_positive_int

DEFAULT_CHUNK_SIZE = 3000

_TOKEN = re.compile(r"\S+")
_SENTENCE_END = re.compile(r"[.!?][\"')\]]*$")


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    patient_id: str
    source_doc_id: str
    text: str
    token_count: int

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"chunk {self.chunk_id!r} has empty text")
        if self.token_count < 1:
            raise ValueError(f"chunk {self.chunk_id!r} has no tokens")


def _break_index(tokens, start: int, chunk_size: int) -> int:
    """End index (exclusive) for the chunk starting at ``start``.

    Prefers the last sentence-final token within the final tenth of the
    budget so chunks tend to end on sentence boundaries.
    """
    hard_end = min(start + chunk_size, len(tokens))
    if hard_end == len(tokens):
        return hard_end
    window_start = start + max(1, chunk_size - chunk_size // 10)
    for i in range(hard_end - 1, window_start - 1, -1):
        if _SENTENCE_END.search(tokens[i].group()):
            return i + 1
    return hard_end


def chunk_documents(
    docs: list[ClinicalDocument], chunk_size: int = DEFAULT_CHUNK_SIZE
) -> list[Chunk]:
    """Greedy packing of whitespace tokens, one document at a time.

    Chunks slice the original text between token boundaries, so joining a
    document's chunks reconstructs it up to the whitespace that fell
    between chunks.  No chunk ever spans two documents.  A document that
    fits in one chunk keeps its own id, so a full-recall retrieval run is
    indistinguishable from reasoning over the source documents.
    """
    check_positive_int(chunk_size, "chunk_size")
    chunks: list[Chunk] = []
    for doc in docs:
        tokens = list(_TOKEN.finditer(doc.text))
        spans = []
        start = 0
        while start < len(tokens):
            end = _break_index(tokens, start, chunk_size)
            spans.append((start, end))
            start = end
        for index, (lo, hi) in enumerate(spans):
            chunks.append(
                Chunk(
                    chunk_id=(
                        doc.doc_id if len(spans) == 1 else f"{doc.doc_id}#c{index}"
                    ),
                    patient_id=doc.patient_id,
                    source_doc_id=doc.doc_id,
                    text=doc.text[tokens[lo].start() : tokens[hi - 1].end()],
                    token_count=hi - lo,
                )
            )
    return chunks
