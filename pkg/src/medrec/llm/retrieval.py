"""Top-k chunk retrieval by cosine similarity against a question embedding."""

from __future__ import annotations

import numpy as np

from medrec.llm.backends import embed
from medrec.llm.chunking import Chunk
from medrec.validation import check_positive_int

DEFAULT_K = 4


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Scalar cosine; zero vectors compare as 0.

    Rankings compare these floats exactly, so every ranker must call this
    one function: different float evaluation orders disagree in the last
    ulp and would make ties formula-dependent.
    """
    scale = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if scale == 0.0:
        return 0.0
    return float(np.dot(a, b)) / scale


def retrieve_top_k(
    question: str, chunks: list[Chunk], backend, k: int = DEFAULT_K
) -> list[Chunk]:
    """The k most similar chunks, descending; ties go to source order."""
    check_positive_int(k, "k")
    if not chunks:
        raise ValueError("retrieve_top_k needs a non-empty chunk list")
    vectors = embed([question] + [c.text for c in chunks], backend)
    sims = [cosine_similarity(vectors[0], row) for row in vectors[1:]]
    order = sorted(
        range(len(chunks)),
        key=lambda i: (-sims[i], chunks[i].source_doc_id, i),
    )
    return [chunks[i] for i in order[:k]]
