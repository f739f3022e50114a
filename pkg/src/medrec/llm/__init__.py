from medrec.llm.answers import (
    GeneratedAnswer,
    answers_to_documents,
    build_prompt,
    generate_answer,
)
from medrec.llm.backends import (
    ANOMALY_MODES,
    CONFUSED_MEDICATIONS,
    EMBEDDING_DIM,
    NO_INFORMATION,
    BackendConfig,
    BackendError,
    BackendKind,
    HttpEmbedder,
    HttpGenerator,
    MockEmbedder,
    MockGenerator,
    embed,
    make_embedder,
    make_generator,
)
from medrec.llm.chunking import DEFAULT_CHUNK_SIZE, Chunk, chunk_documents
from medrec.llm.questions import (
    N_QUESTIONS,
    QuestionBank,
    bundled_question_path,
    load_bundled_question_bank,
    load_question_bank,
)
from medrec.llm.retrieval import DEFAULT_K, cosine_similarity, retrieve_top_k
from medrec.llm.standalone import parse_answer_readout

__all__ = [
    "ANOMALY_MODES",
    "CONFUSED_MEDICATIONS",
    "DEFAULT_CHUNK_SIZE",
    "DEFAULT_K",
    "EMBEDDING_DIM",
    "NO_INFORMATION",
    "BackendConfig",
    "BackendError",
    "BackendKind",
    "Chunk",
    "GeneratedAnswer",
    "HttpEmbedder",
    "HttpGenerator",
    "MockEmbedder",
    "MockGenerator",
    "N_QUESTIONS",
    "QuestionBank",
    "answers_to_documents",
    "build_prompt",
    "bundled_question_path",
    "chunk_documents",
    "cosine_similarity",
    "embed",
    "generate_answer",
    "load_bundled_question_bank",
    "load_question_bank",
    "make_embedder",
    "make_generator",
    "parse_answer_readout",
    "retrieve_top_k",
]
