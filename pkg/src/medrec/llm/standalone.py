"""Direct answer parsing: variable values straight from answer text.

This path bypasses grounding and consolidation on purpose.  It trusts
answers in question order, takes the first value it sees for single-valued
variables, and falls back to literal strings it cannot resolve, so its
failure shape under contradictory or hallucinated answers differs from the
reasoning path's.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass

from medrec.documents import ClinicalDocument
from medrec.llm.backends import NO_INFORMATION
from medrec.llm.answers import GeneratedAnswer
from medrec.llm.questions import QuestionBank, load_bundled_question_bank
from medrec.ontology import OntologyGraph
from medrec.extraction import tag_entities
from medrec.reasoning import (
    _DATED_MULTI,
    _MULTI_VALUED,
    _SINGLE_VALUED,
    ReadoutValue,
    VariableReadout,
)
from medrec.variables import VariableKind

_PIECE_PAREN = re.compile(r"^(?P<body>.*?)\s*\((?P<paren>[^()]*)\)\s*$")
_ISO_DATE = re.compile(r"\b(\d{4}-\d{2}-\d{2})\b")

_PARSE_CONFIDENCE = 0.5
_LITERAL_MAX_TOKENS = 4


@dataclass
class _Candidate:
    value: str
    is_literal: bool = False
    date: datetime.date | None = None
    qualifier: str | None = None


def _split_piece(piece: str):
    m = _PIECE_PAREN.match(piece)
    if not m:
        return piece, None, None
    body, paren = m.group("body"), m.group("paren").strip()
    try:
        return body, datetime.date.fromisoformat(paren), None
    except ValueError:
        return body, None, paren or None


def _axis_concepts(body: str, onto: OntologyGraph, axis):
    doc = ClinicalDocument("parse", "parse", body)
    hits = []
    for mention in tag_entities(doc, onto):
        if mention.is_date or mention.entity_type is not axis:
            continue
        hits.append(mention.top_concept)
    return hits


def parse_answer_readout(
    answers: list[GeneratedAnswer],
    patient_id: str,
    onto: OntologyGraph,
    bank: QuestionBank | None = None,
) -> VariableReadout:
    """Build a readout from answer text alone, first value wins."""
    bank = bank or load_bundled_question_bank()
    candidates: dict[VariableKind, list[_Candidate]] = {}

    def add(kind, candidate):
        bucket = candidates.setdefault(kind, [])
        if all(
            (c.value, c.date) != (candidate.value, candidate.date) for c in bucket
        ):
            bucket.append(candidate)

    for answer in sorted(answers, key=lambda a: a.question_index):
        text = answer.answer_text.strip()
        if not text or text.lower() == NO_INFORMATION:
            continue
        targets = bank.targets_of(answer.question_index)
        for piece in (p.strip() for p in text.split(";")):
            if not piece:
                continue
            body, date, qualifier = _split_piece(piece)
            if not body.strip():
                continue
            hit_any = False
            for kind in targets:
                if kind is VariableKind.CANCER_DIAGNOSIS_DATE:
                    found = _ISO_DATE.search(piece)
                    if found:
                        hit_any = True
                        add(
                            kind,
                            _Candidate(
                                found.group(1),
                                is_literal=True,
                                date=datetime.date.fromisoformat(found.group(1)),
                            ),
                        )
                    continue
                axis = (
                    _SINGLE_VALUED.get(kind)
                    or _MULTI_VALUED.get(kind)
                    or _DATED_MULTI.get(kind)
                )
                for concept in _axis_concepts(body, onto, axis):
                    hit_any = True
                    add(kind, _Candidate(concept, date=date, qualifier=qualifier))
            if (
                not hit_any
                and len(targets) == 1
                and len(body.split()) <= _LITERAL_MAX_TOKENS
            ):
                (kind,) = targets
                if kind in _MULTI_VALUED or kind in _DATED_MULTI:
                    add(
                        kind,
                        _Candidate(
                            body.strip(), is_literal=True, date=date, qualifier=qualifier
                        ),
                    )

    values: dict[VariableKind, frozenset[ReadoutValue]] = {}
    for kind, bucket in candidates.items():
        if kind in _SINGLE_VALUED or kind is VariableKind.CANCER_DIAGNOSIS_DATE:
            bucket = bucket[:1]
        values[kind] = frozenset(
            ReadoutValue(
                value=c.value,
                is_literal=c.is_literal,
                date=c.date,
                qualifier=c.qualifier,
                confidence=_PARSE_CONFIDENCE,
            )
            for c in bucket
        )
    return VariableReadout(patient_id, values)
