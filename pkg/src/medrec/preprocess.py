"""De-identification, segmentation, and category classification.

The three stages are exposed both as plain functions and as sklearn-style
estimators so they can sit in a pipeline: params in ``__init__``, validated
in ``fit``, fitted state on trailing-underscore attributes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from medrec.corpus.loader import RawDocumentText
from medrec.documents import ClinicalDocument, DocumentCategory, ProvenanceKind
from medrec.validation import check_fraction, check_positive_int, check_text

# --------------------------------------------------------------- redaction


@dataclass(frozen=True)
class RedactionResult:
    """Redacted text plus the PHI spans found in the ORIGINAL text."""

    redacted_text: str
    phi_spans: tuple[tuple[int, int, str], ...]


# Dates are deliberately absent: diagnosis dates are extraction targets.
_BUILTIN_PHI_PATTERNS: tuple[tuple[str, re.Pattern], ...] = (
    ("SSN", re.compile(r"\b\d{3}-\d{2}-\d{4}\b")),
    ("PHONE", re.compile(r"\(\d{3}\)\s*\d{3}[-.]\d{4}|\b\d{3}[-.]\d{3}[-.]\d{4}\b|\b\d{3}[-.]\d{4}\b")),
    ("MRN", re.compile(r"\bMRN[:#\s]?\s*\d{5,10}\b")),
    ("EMAIL", re.compile(r"\b[\w.+-]+@[\w-]+(?:\.[\w-]+)*\.[A-Za-z]{2,}\b")),
    ("ADDRESS", re.compile(
        r"\b\d{1,5}\s+[A-Z][A-Za-z]*\s+(?:Street|Avenue|Road|Drive|Lane|Boulevard|Court|Way)\b"
    )),
)

_REDACTION_KINDS = frozenset(k for k, _ in _BUILTIN_PHI_PATTERNS) | {"NAME"}


def bundled_gazetteer_path() -> Path:
    return Path(__file__).parent / "data" / "gazetteer.txt"


def load_gazetteer(path: str | Path) -> frozenset[str]:
    names = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        name = line.strip()
        # redaction-kind words would break idempotence if ever redacted
        if name and not name.startswith("#") and name not in _REDACTION_KINDS:
            names.add(name)
    return frozenset(names)


def _compile_gazetteer(names: frozenset[str]) -> re.Pattern | None:
    if not names:
        return None
    alternates = "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
    return re.compile(rf"\b(?:{alternates})\b")


def deidentify(text: str, gazetteer: frozenset[str] | None = None) -> RedactionResult:
    """Redact gazetteer names and built-in PHI patterns; keep dates.

    Idempotent: replacement tokens contain nothing any pattern matches.
    """
    check_text(text)
    if gazetteer is None:
        gazetteer = load_gazetteer(bundled_gazetteer_path())
    hits: list[tuple[int, int, str]] = []
    name_pattern = _compile_gazetteer(gazetteer)
    if name_pattern is not None:
        hits.extend((m.start(), m.end(), "NAME") for m in name_pattern.finditer(text))
    for kind, pattern in _BUILTIN_PHI_PATTERNS:
        hits.extend((m.start(), m.end(), kind) for m in pattern.finditer(text))

    # earliest start wins; on equal start the longer match wins
    hits.sort(key=lambda h: (h[0], -(h[1] - h[0])))
    kept: list[tuple[int, int, str]] = []
    cursor = 0
    for start, end, kind in hits:
        if start >= cursor:
            kept.append((start, end, kind))
            cursor = end

    pieces = []
    cursor = 0
    for start, end, kind in kept:
        pieces.append(text[cursor:start])
        pieces.append(f"[REDACTED:{kind}]")
        cursor = end
    pieces.append(text[cursor:])
    return RedactionResult("".join(pieces), tuple(kept))


class Deidentifier(BaseEstimator, TransformerMixin):
    """Estimator wrapper around :func:`deidentify`.

    Parameters
    ----------
    gazetteer_path : str or Path or None
        Name list to load in ``fit``; None loads the bundled list.
    extra_names : iterable of str or None
        Names added on top of the file.
    """

    def __init__(self, gazetteer_path=None, extra_names=None):
        self.gazetteer_path = gazetteer_path
        self.extra_names = extra_names

    def fit(self, X=None, y=None):
        path = self.gazetteer_path or bundled_gazetteer_path()
        names = set(load_gazetteer(path))
        if self.extra_names is not None:
            names.update(str(n) for n in self.extra_names)
        self.gazetteer_ = frozenset(names)
        return self

    def transform(self, X):
        if not hasattr(self, "gazetteer_"):
            raise NotFittedError("Deidentifier is not fitted; call fit first")
        return [deidentify(text, self.gazetteer_) for text in X]


# ------------------------------------------------------------ segmentation

_HEADER_LINE = re.compile(r"^[A-Z][A-Z0-9&/ .-]{6,}$")
_PAGE_LINE = re.compile(r"^Page\s+\d+\s+of\s+\d+$")

DEFAULT_SEGMENT_MIN_LEN = 200
DEFAULT_SIMILARITY_THRESHOLD = 0.35


def _is_header_line(line: str) -> bool:
    stripped = line.strip()
    if len(stripped) < 8 or len(stripped.split()) < 2:
        return False
    return bool(_HEADER_LINE.match(stripped))


def _rule_cut_positions(text: str) -> set[int]:
    cuts: set[int] = set()
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if _is_header_line(line) or _PAGE_LINE.match(stripped):
            cuts.add(offset)
        offset += len(line)
    for i, ch in enumerate(text):
        if ch == "\f":
            cuts.add(i)
    cuts.discard(0)
    return cuts


def _scorer_cut_positions(text: str, scorer, threshold: float) -> set[int]:
    # candidate boundaries: blank lines; cut where adjacent windows diverge
    cuts: set[int] = set()
    window = 400
    for m in re.finditer(r"\n\s*\n", text):
        pos = m.end()
        before = text[max(0, m.start() - window):m.start()]
        after = text[pos:pos + window]
        if not before.strip() or not after.strip():
            continue
        if scorer(before, after) < threshold:
            cuts.add(pos)
    cuts.discard(0)
    return cuts


def segment_documents(
    record: RawDocumentText,
    boundary_model=None,
    *,
    patient_id: str = "",
    min_len: int = DEFAULT_SEGMENT_MIN_LEN,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> list[ClinicalDocument]:
    """Split one raw record into uncategorized documents.

    Segments are exact slices of the input, so concatenating their texts
    reconstructs the record verbatim.  ``boundary_model`` is an optional
    callable ``(left_text, right_text) -> similarity`` in [0, 1]; cuts are
    added where similarity falls below ``threshold``.
    """
    text = record.text
    cuts = _rule_cut_positions(text)
    if boundary_model is not None:
        cuts |= _scorer_cut_positions(text, boundary_model, threshold)

    bounds = [0, *sorted(c for c in cuts if 0 < c < len(text)), len(text)]
    segments = [text[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]

    # short segments merge into the preceding one; a short head merges forward
    merged: list[str] = []
    for seg in segments:
        if merged and len(merged[-1].strip()) < min_len:
            merged[-1] += seg
        elif merged and len(seg.strip()) < min_len:
            merged[-1] += seg
        else:
            merged.append(seg)
    if len(merged) > 1 and len(merged[0].strip()) < min_len:
        merged[1] = merged[0] + merged[1]
        merged.pop(0)

    return [
        ClinicalDocument(
            doc_id=f"{record.source_id}#s{i}",
            patient_id=patient_id,
            text=seg,
        )
        for i, seg in enumerate(merged)
    ]


class DocumentSegmenter(BaseEstimator, TransformerMixin):
    """Estimator wrapper around :func:`segment_documents`.

    ``transform`` takes ``(patient_id, RawDocumentText)`` pairs and returns
    one list of documents per input record.
    """

    def __init__(
        self,
        min_len=DEFAULT_SEGMENT_MIN_LEN,
        boundary_model=None,
        threshold=DEFAULT_SIMILARITY_THRESHOLD,
    ):
        self.min_len = min_len
        self.boundary_model = boundary_model
        self.threshold = threshold

    def fit(self, X=None, y=None):
        self.min_len_ = check_positive_int(self.min_len, "min_len", minimum=1)
        self.threshold_ = check_fraction(self.threshold, "threshold")
        return self

    def transform(self, X):
        if not hasattr(self, "min_len_"):
            raise NotFittedError("DocumentSegmenter is not fitted; call fit first")
        return [
            segment_documents(
                record,
                self.boundary_model,
                patient_id=patient_id,
                min_len=self.min_len_,
                threshold=self.threshold_,
            )
            for patient_id, record in X
        ]


# ----------------------------------------------------------- classification

# cue term -> weight, per category; matched case-insensitively on word bounds
_CATEGORY_CUES: dict[DocumentCategory, dict[str, int]] = {
    DocumentCategory.PATHOLOGY: {
        "pathology": 3,
        "pathologic": 2,
        "specimen": 2,
        "histology": 2,
        "histologic": 2,
        "margins": 2,
        "microscopic": 2,
        "gross description": 2,
    },
    DocumentCategory.LAB_RESULTS: {
        "laboratory": 3,
        "assay": 2,
        "serum": 2,
        "reference range": 2,
        "biomarker": 2,
        "panel": 1,
    },
    DocumentCategory.SOAP_NOTE: {
        "progress note": 3,
        "subjective": 2,
        "objective": 2,
        "assessment": 1,
        "plan": 1,
        "interval history": 2,
    },
    DocumentCategory.ADMINISTRATIVE: {
        "administrative": 3,
        "insurance": 2,
        "billing": 2,
        "authorization": 2,
        "registration": 2,
        "consent": 1,
    },
}

_CATEGORY_PRECEDENCE = (
    DocumentCategory.PATHOLOGY,
    DocumentCategory.LAB_RESULTS,
    DocumentCategory.SOAP_NOTE,
    DocumentCategory.ADMINISTRATIVE,
    DocumentCategory.OTHER,
)

_CUE_PATTERNS = {
    category: [
        (re.compile(rf"\b{re.escape(term)}\b", re.IGNORECASE), weight)
        for term, weight in cues.items()
    ]
    for category, cues in _CATEGORY_CUES.items()
}


def classify_document(doc: ClinicalDocument) -> DocumentCategory:
    """Weighted cue-count argmax; ties fall to the precedence order."""
    if doc.provenance.kind is ProvenanceKind.LLM_ANSWER:
        return DocumentCategory.LLM_ANSWER
    scores = {}
    for category, patterns in _CUE_PATTERNS.items():
        scores[category] = sum(
            weight * len(pattern.findall(doc.text)) for pattern, weight in patterns
        )
    best = max(_CATEGORY_PRECEDENCE, key=lambda c: (scores.get(c, 0), -_CATEGORY_PRECEDENCE.index(c)))
    if scores.get(best, 0) <= 0:
        return DocumentCategory.OTHER
    return best


class DocumentClassifier(BaseEstimator):
    """Assigns one category per document; pure keyword scoring."""

    def fit(self, X=None, y=None):
        self.categories_ = _CATEGORY_PRECEDENCE
        return self

    def predict(self, X):
        self._check_fitted()
        return [classify_document(doc) for doc in X]

    def transform(self, X):
        self._check_fitted()
        return [doc.with_category(classify_document(doc)) for doc in X]

    def _check_fitted(self):
        if not hasattr(self, "categories_"):
            raise NotFittedError("DocumentClassifier is not fitted; call fit first")
