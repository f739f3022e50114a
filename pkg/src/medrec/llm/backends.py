"""Embedding and generation backends: deterministic mocks plus HTTP adapters.

The mock generator answers by scanning its prompt context for the canonical
fact sentences, so its behavior is a pure function of the prompt and the
configured anomaly modes.
"""

from __future__ import annotations

import enum
import re
import time
import zlib
from dataclasses import dataclass

import numpy as np
import requests

from medrec.factpatterns import scan_facts
from medrec.llm.questions import QuestionBank, load_bundled_question_bank

EMBEDDING_DIM = 512

ANOMALY_MODES = ("inconsistent", "hallucinate", "confuse_generic")

# deliberately plausible but wrong medication list for the confusion mode
CONFUSED_MEDICATIONS = ("osimertinib", "fulvestrant", "irinotecan")
HALLUCINATED_MEDICATION = "investigational agent xq-17"

NO_INFORMATION = "no information found"


class BackendKind(enum.Enum):
    EMBEDDER = "Embedder"
    GENERATOR = "Generator"


class BackendError(RuntimeError):
    def __init__(self, message, backend_id, *, retriable=False, question_index=None):
        super().__init__(message)
        self.backend_id = backend_id
        self.retriable = retriable
        self.question_index = question_index


@dataclass(frozen=True)
class BackendConfig:
    backend_id: str
    kind: BackendKind
    endpoint: str | None = None
    chunk_size: int = 3000
    temperature: float | None = None
    k: int = 4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.kind is BackendKind.EMBEDDER and self.temperature is not None:
            raise ValueError("temperature applies only to generator backends")
        if self.temperature is not None and self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")


# ----------------------------------------------------------------- embedding


class MockEmbedder:
    """Unit-norm term-frequency vectors over lowercased alphanumeric tokens.

    Tokens are hashed into a fixed number of buckets, so the dimension never
    depends on the corpus.
    """

    backend_id = "mock-embedder"

    def __init__(self, dim: int = EMBEDDING_DIM):
        self.dim = dim

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            for token in re.findall(r"[a-z0-9]+", text.lower()):
                out[row, zlib.crc32(token.encode()) % self.dim] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class HttpEmbedder:
    def __init__(self, endpoint, *, backend_id=None, timeout=30.0, retries=2):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = backend_id or endpoint
        self.timeout = timeout
        self.retries = retries

    def embed(self, texts: list[str]) -> np.ndarray:
        payload = _post_json(
            f"{self.endpoint}/embed",
            {"texts": list(texts)},
            backend_id=self.backend_id,
            timeout=self.timeout,
            retries=self.retries,
        )
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise BackendError(
                f"embedder returned {0 if not isinstance(vectors, list) else len(vectors)} "
                f"vectors for {len(texts)} texts",
                self.backend_id,
            )
        return np.asarray(vectors, dtype=float)


def embed(texts: list[str], backend) -> np.ndarray:
    """One vector per text; a ragged or mismatched batch is fatal."""
    if not texts:
        return np.zeros((0, 0))
    try:
        vectors = np.asarray(backend.embed(list(texts)), dtype=float)
    except ValueError as exc:
        raise BackendError(
            f"embedding batch has inconsistent dimensions: {exc}",
            getattr(backend, "backend_id", "unknown"),
        ) from exc
    if vectors.ndim != 2 or vectors.shape[0] != len(texts):
        raise BackendError(
            f"expected {len(texts)} vectors of one dimension, got shape {vectors.shape}",
            getattr(backend, "backend_id", "unknown"),
        )
    return vectors


# ---------------------------------------------------------------- generation

_QUESTION_LINE = re.compile(r"^Question: (.*)$", re.MULTILINE)
_CONTEXT_SPLIT = re.compile(r"^Context:$", re.MULTILINE)

_COHORT_SWAP = (
    ("lung", "breast cancer"),
    ("breast", "lung cancer"),
    ("colorectal", "lung cancer"),
    ("colon", "lung cancer"),
    ("rectal", "lung cancer"),
)


def _swap_cohort(name: str) -> str:
    lowered = name.lower()
    for needle, replacement in _COHORT_SWAP:
        if needle in lowered:
            return replacement
    return "lung cancer"


def _dedup(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


class MockGenerator:
    """Deterministic template reader for the canonical fact sentences.

    Anomaly modes inject the failure shapes the pipeline is measured
    against: a self-contradictory summary, a hallucinated medication, and
    a generic (wrong) medication list.
    """

    backend_id = "mock-generator"

    def __init__(self, anomalies=(), question_bank: QuestionBank | None = None):
        if isinstance(anomalies, str):
            anomalies = (anomalies,)
        if "all" in anomalies:
            anomalies = ANOMALY_MODES
        unknown = set(anomalies) - set(ANOMALY_MODES)
        if unknown:
            raise ValueError(f"unknown anomaly modes: {sorted(unknown)}")
        self.anomalies = frozenset(anomalies)
        self.bank = question_bank or load_bundled_question_bank()

    def generate(self, prompt: str, temperature: float = 0.0) -> str:
        del temperature  # recorded upstream; the mock is deterministic
        question_match = _QUESTION_LINE.search(prompt)
        context_parts = _CONTEXT_SPLIT.split(prompt, maxsplit=1)
        context = context_parts[1] if len(context_parts) == 2 else ""
        if not question_match or not context.strip():
            return NO_INFORMATION
        index = self.bank.index_of(question_match.group(1))
        if index is None:
            return NO_INFORMATION
        return self._answer(index, scan_facts(context))

    # -- per-question templates

    def _answer(self, index: int, facts) -> str:
        def first(names, field):
            for fact in facts:
                if fact.name in names and fact.get(field):
                    return fact.get(field)
            return None

        def paired(names, field, date_field="date"):
            out = []
            for fact in facts:
                if fact.name not in names:
                    continue
                value = fact.get(field)
                when = fact.get(date_field)
                out.append(f"{value} ({when})" if when else value)
            return _dedup(out)

        neoplasm = first(("neoplasm_dated", "neoplasm_assessment"), "neoplasm")
        staging = next((f for f in facts if f.name == "staging"), None)

        if index == 1:
            pieces = []
            if neoplasm:
                shown = (
                    _swap_cohort(neoplasm)
                    if "inconsistent" in self.anomalies
                    else neoplasm
                )
                pieces.append(f"primary diagnosis {shown}")
            morphology = first(("morphology",), "morphology")
            if morphology:
                pieces.append(f"morphology {morphology}")
            if staging:
                pieces.append(
                    f"staging {staging.get('t')} {staging.get('n')} "
                    f"{staging.get('m')} ({staging.get('stage_group')})"
                )
            return "Patient summary: " + "; ".join(pieces) + "." if pieces else NO_INFORMATION
        if index == 2:
            return neoplasm or NO_INFORMATION
        if index == 3:
            return first(("morphology",), "morphology") or NO_INFORMATION
        if index == 4:
            if staging is None:
                return NO_INFORMATION
            return f"{staging.get('t')}; {staging.get('n')}; {staging.get('m')}"
        if index == 5:
            return staging.get("stage_group") if staging else NO_INFORMATION
        if index == 7:
            for fact in facts:
                if fact.name == "neoplasm_dated":
                    return f"{fact.get('neoplasm')} diagnosed {fact.get('date')}"
            return NO_INFORMATION
        if index in (10, 11, 12):
            return self._medication_answer(facts, dated=index != 10)
        if index in (13, 14, 15):
            values = paired(("surgery_performed", "surgery_recovery"), "surgery")
            return "; ".join(values) if values else NO_INFORMATION
        if index in (16, 17):
            values = paired(("outcome",), "outcome")
            return "; ".join(values) if values else NO_INFORMATION
        if index in (18, 19, 20):
            values = paired(("response",), "response")
            return "; ".join(values) if values else NO_INFORMATION
        if index in (21, 22, 23, 24, 25):
            values = paired(("biomarker",), "biomarker", date_field="interpretation")
            if index == 21:
                values = _dedup(v.split(" (")[0] for v in values)
            return "; ".join(values) if values else NO_INFORMATION
        if index in (26, 27):
            values = paired(("biomarker",), "biomarker", date_field="method")
            return "; ".join(values) if values else NO_INFORMATION
        if index in (28, 29, 30, 31):
            values = paired(
                ("procedure_completed", "procedure_findings"), "procedure"
            )
            return "; ".join(values) if values else NO_INFORMATION
        # 6, 8, 9: dates and treatments the fact sentences never state
        return NO_INFORMATION

    def _medication_answer(self, facts, *, dated: bool) -> str:
        if "confuse_generic" in self.anomalies:
            values = list(CONFUSED_MEDICATIONS)
        else:
            values = []
            for fact in facts:
                if fact.name == "medication_started":
                    when = fact.get("date")
                    values.append(
                        f"{fact.get('medication')} ({when})"
                        if dated
                        else fact.get("medication")
                    )
                elif fact.name == "medication_current":
                    values.append(fact.get("medication"))
            values = _dedup(values)
        if not values:
            return NO_INFORMATION
        if "hallucinate" in self.anomalies:
            values.append(HALLUCINATED_MEDICATION)
        return "; ".join(values)


class HttpGenerator:
    def __init__(
        self,
        endpoint,
        *,
        backend_id=None,
        temperature=0.0,
        timeout=60.0,
        retries=2,
        context_budget=None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = backend_id or endpoint
        self.temperature = temperature
        self.timeout = timeout
        self.retries = retries
        self.context_budget = context_budget

    def generate(self, prompt: str, temperature: float = 0.0) -> str:
        payload = _post_json(
            f"{self.endpoint}/generate",
            {"prompt": prompt, "temperature": temperature},
            backend_id=self.backend_id,
            timeout=self.timeout,
            retries=self.retries,
        )
        text = payload.get("text")
        if not isinstance(text, str):
            raise BackendError("generator returned no text field", self.backend_id)
        return text


def _post_json(url, body, *, backend_id, timeout, retries):
    last_error = None
    for attempt in range(retries + 1):
        try:
            response = requests.post(url, json=body, timeout=timeout)
            if response.status_code >= 500:
                last_error = f"server error {response.status_code}"
            else:
                response.raise_for_status()
                return response.json()
        except requests.RequestException as exc:
            last_error = str(exc)
        if attempt < retries:
            time.sleep(min(0.2 * 2**attempt, 2.0))
    raise BackendError(
        f"POST {url} failed after {retries + 1} attempts: {last_error}",
        backend_id,
        retriable=True,
    )


# ------------------------------------------------------------------ factories


def _endpoint_of(spec: str) -> str | None:
    if spec == "mock":
        return None
    if spec.startswith(("http://", "https://")):
        return spec
    if spec.startswith("http:"):
        return spec[len("http:") :]
    raise ValueError(f"backend spec must be 'mock' or an http(s) URL, got {spec!r}")


def make_embedder(spec: str = "mock"):
    endpoint = _endpoint_of(spec)
    return MockEmbedder() if endpoint is None else HttpEmbedder(endpoint)


def make_generator(spec: str = "mock", *, anomalies=(), temperature=0.0):
    endpoint = _endpoint_of(spec)
    if endpoint is None:
        return MockGenerator(anomalies=anomalies)
    return HttpGenerator(endpoint, temperature=temperature)
