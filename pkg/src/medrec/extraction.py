"""Entity mention tagging and pairwise relation classification.

Output is a per-document tag graph: mention nodes (ontology concepts,
dates, TNM stage codes) and typed relation edges between them.
"""

from __future__ import annotations

import datetime
import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from medrec.documents import ClinicalDocument
from medrec.ontology import OntologyGraph, SemanticAxis

DATE_ENTITY = "Date"

_STAGE_AXES = (
    SemanticAxis.T_STAGE,
    SemanticAxis.N_STAGE,
    SemanticAxis.M_STAGE,
    SemanticAxis.STAGE_GROUP,
)


@dataclass(frozen=True)
class EntityMention:
    mention_id: str
    surface: str
    span: tuple[int, int]
    entity_type: SemanticAxis | str
    candidate_concepts: tuple[tuple[str, float], ...] = ()
    parsed_date: datetime.date | None = None
    stage_value: str | None = None

    def __post_init__(self):
        if self.entity_type == DATE_ENTITY:
            if self.parsed_date is None or self.candidate_concepts:
                raise ValueError("Date mentions carry a parsed date and no concepts")
        else:
            if not isinstance(self.entity_type, SemanticAxis):
                raise ValueError(f"bad entity_type {self.entity_type!r}")
            if not self.candidate_concepts:
                raise ValueError("concept mentions need at least one candidate")
            scores = [s for _, s in self.candidate_concepts]
            if scores != sorted(scores, reverse=True):
                raise ValueError("candidates must be sorted by score descending")

    @property
    def is_date(self) -> bool:
        return self.entity_type == DATE_ENTITY

    @property
    def top_concept(self) -> str | None:
        return self.candidate_concepts[0][0] if self.candidate_concepts else None


class RelationKind(enum.Enum):
    HAS_DATE = "HasDate"
    HAS_STAGE = "HasStage"
    HAS_MORPHOLOGY = "HasMorphology"
    HAS_INTERPRETATION = "HasInterpretation"
    HAS_METHOD = "HasMethod"
    TREATED_WITH = "TreatedWith"
    RESULTED_IN = "ResultedIn"


@dataclass(frozen=True)
class RelationEdge:
    from_mention: str
    to_mention: str
    relation_kind: RelationKind
    score: float

    def __post_init__(self):
        if self.from_mention == self.to_mention:
            raise ValueError("self-edges are not allowed")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class TagGraph:
    doc_id: str
    mentions: tuple[EntityMention, ...]
    edges: tuple[RelationEdge, ...]

    def __post_init__(self):
        ids = {m.mention_id for m in self.mentions}
        for edge in self.edges:
            if edge.from_mention not in ids or edge.to_mention not in ids:
                raise ValueError(f"edge endpoint missing from graph: {edge}")

    def mention(self, mention_id: str) -> EntityMention:
        for m in self.mentions:
            if m.mention_id == mention_id:
                return m
        raise KeyError(mention_id)


# ------------------------------------------------------------- date parsing

_MONTHS = (
    "January February March April May June July August "
    "September October November December"
).split()
_MONTH_NUM = {name: i + 1 for i, name in enumerate(_MONTHS)}

_DATE_PATTERNS = (
    re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b"),
    re.compile(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b"),
    re.compile(rf"\b({'|'.join(_MONTHS)})\s+(\d{{1,2}}),\s+(\d{{4}})\b"),
)


def _parse_date_match(pattern_index: int, m: re.Match) -> datetime.date | None:
    try:
        if pattern_index == 0:
            return datetime.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        if pattern_index == 1:
            return datetime.date(int(m.group(3)), int(m.group(1)), int(m.group(2)))
        return datetime.date(int(m.group(3)), _MONTH_NUM[m.group(1)], int(m.group(2)))
    except ValueError:
        return None


# --------------------------------------------------------------- TNM codes

_TNM_PATTERN = re.compile(r"\b[cp]?(?:T[0-4Xx][ab]?|N[0-3Xx]|M[01Xx][ab]?)\b")

_TNM_AXIS = {
    "T": SemanticAxis.T_STAGE,
    "N": SemanticAxis.N_STAGE,
    "M": SemanticAxis.M_STAGE,
}


def _normalize_tnm(code: str) -> str:
    # "pT2" -> "T2", "cTx" -> "TX"; a/b subdivisions stay lowercase
    return code.lstrip("cp").replace("x", "X")


# ----------------------------------------------------------------- tagging


class Lexicon:
    """Compiled surface index for one (ontology, synonym policy) pair.

    The regex is a zero-width lookahead whose alternation is length-sorted,
    so every start position reports the longest surface beginning there;
    overlapping hits are resolved afterwards.
    """

    def __init__(self, onto: OntologyGraph, include_synonyms: bool = True):
        self.onto = onto
        by_surface: dict[str, list] = {}
        for cid in sorted(onto.concepts):
            concept = onto.concepts[cid]
            surfaces = concept.surfaces if include_synonyms else (concept.preferred_name,)
            for surface in surfaces:
                by_surface.setdefault(surface.lower(), []).append(concept)
        ordered = sorted(by_surface, key=lambda s: (-len(s), s))
        alternation = "|".join(re.escape(s) for s in ordered)
        self.by_surface = by_surface
        self.regex = re.compile(
            rf"(?<![A-Za-z0-9])(?=(?P<hit>{alternation})(?![A-Za-z0-9]))",
            re.IGNORECASE,
        )


_LEXICON_CACHE: dict[tuple[int, bool], Lexicon] = {}


def _lexicon_for(onto: OntologyGraph, include_synonyms: bool) -> Lexicon:
    key = (id(onto), include_synonyms)
    cached = _LEXICON_CACHE.get(key)
    if cached is None or cached.onto is not onto:
        cached = Lexicon(onto, include_synonyms)
        _LEXICON_CACHE[key] = cached
    return cached


class _Candidate:
    __slots__ = ("start", "end", "kind", "payload")

    def __init__(self, start, end, kind, payload):
        self.start = start
        self.end = end
        self.kind = kind
        self.payload = payload


def tag_entities(
    doc: ClinicalDocument,
    onto: OntologyGraph,
    *,
    include_synonyms: bool = True,
    lexicon: Lexicon | None = None,
) -> list[EntityMention]:
    """All maximal lexicon matches plus date and TNM pattern mentions.

    Overlaps resolve longest-first, ties by earliest start; surfaces equal
    their document slice exactly.
    """
    text = doc.text
    if lexicon is None:
        lexicon = _lexicon_for(onto, include_synonyms)

    candidates = []
    for m in lexicon.regex.finditer(text):
        hit = m.group("hit")
        candidates.append(
            _Candidate(m.start(), m.start() + len(hit), "lexicon",
                       lexicon.by_surface[hit.lower()])
        )
    for pi, pattern in enumerate(_DATE_PATTERNS):
        for m in pattern.finditer(text):
            parsed = _parse_date_match(pi, m)
            if parsed is not None:
                candidates.append(_Candidate(m.start(), m.end(), "date", parsed))
    for m in _TNM_PATTERN.finditer(text):
        normalized = _normalize_tnm(m.group())
        cid = normalized.lower()
        if cid in onto:
            candidates.append(_Candidate(m.start(), m.end(), "tnm", (normalized, cid)))

    candidates.sort(key=lambda c: (-(c.end - c.start), c.start))
    taken: list[_Candidate] = []
    occupied: list[tuple[int, int]] = []
    for cand in candidates:
        if any(cand.start < e and s < cand.end for s, e in occupied):
            continue
        taken.append(cand)
        occupied.append((cand.start, cand.end))

    taken.sort(key=lambda c: c.start)
    mentions: list[EntityMention] = []
    for i, cand in enumerate(taken):
        surface = text[cand.start:cand.end]
        mid = f"m{i}"
        if cand.kind == "date":
            mentions.append(
                EntityMention(mid, surface, (cand.start, cand.end), DATE_ENTITY,
                              parsed_date=cand.payload)
            )
            continue
        if cand.kind == "tnm":
            normalized, cid = cand.payload
            concept = onto.get(cid)
            mentions.append(
                EntityMention(
                    mid, surface, (cand.start, cand.end), concept.axis,
                    candidate_concepts=((cid, float(len(surface))),),
                    stage_value=normalized,
                )
            )
            continue
        concepts = cand.payload
        scored = tuple(
            (c.concept_id, float(cand.end - cand.start))
            for c in sorted(concepts, key=lambda c: (c.axis.value, c.concept_id))
        )
        axis = concepts[0].axis if len(concepts) == 1 else min(
            (c.axis for c in concepts), key=lambda a: a.value
        )
        stage_value = None
        if axis in _TNM_AXIS.values():
            stage_value = onto.get(scored[0][0]).preferred_name
        elif axis is SemanticAxis.STAGE_GROUP:
            stage_value = onto.get(scored[0][0]).preferred_name
        mentions.append(
            EntityMention(mid, surface, (cand.start, cand.end), axis,
                          candidate_concepts=scored, stage_value=stage_value)
        )
    return mentions


# ---------------------------------------------------------------- relations

_SENTENCE_SPLIT = re.compile(r"[.!?;\n]+")

HAS_DATE_MAX_GAP = 150
CUE_SCOPE_WINDOW = 200


@dataclass(frozen=True)
class CueRule:
    relation_kind: RelationKind
    left_axis: SemanticAxis
    right_axis: SemanticAxis
    cue_pattern: re.Pattern
    weight: float


def _rule(kind, left, right, pattern, weight) -> CueRule:
    return CueRule(kind, left, right, re.compile(pattern, re.IGNORECASE), weight)


DEFAULT_CUE_RULES: tuple[CueRule, ...] = (
    _rule(RelationKind.HAS_STAGE, SemanticAxis.NEOPLASM, SemanticAxis.T_STAGE, r".*", 0.8),
    _rule(RelationKind.HAS_STAGE, SemanticAxis.NEOPLASM, SemanticAxis.N_STAGE, r".*", 0.8),
    _rule(RelationKind.HAS_STAGE, SemanticAxis.NEOPLASM, SemanticAxis.M_STAGE, r".*", 0.8),
    _rule(RelationKind.HAS_STAGE, SemanticAxis.NEOPLASM, SemanticAxis.STAGE_GROUP, r".*", 0.8),
    _rule(RelationKind.HAS_MORPHOLOGY, SemanticAxis.NEOPLASM, SemanticAxis.MORPHOLOGY, r".*", 0.7),
    _rule(RelationKind.HAS_INTERPRETATION, SemanticAxis.BIOMARKER, SemanticAxis.OTHER, r"returned|tested|\(", 0.9),
    _rule(RelationKind.HAS_METHOD, SemanticAxis.BIOMARKER, SemanticAxis.OTHER, r"\bby\b|method", 0.8),
    _rule(RelationKind.TREATED_WITH, SemanticAxis.NEOPLASM, SemanticAxis.MEDICATION, r".*", 0.6),
    _rule(RelationKind.RESULTED_IN, SemanticAxis.NEOPLASM, SemanticAxis.OUTCOME, r".*", 0.5),
)


def load_cue_rules(path: str | Path) -> tuple[CueRule, ...]:
    """Parse override rules: ``relation_kind|left_axis|right_axis|cue_pattern|weight``.

    Rows replace any default with the same (kind, left, right) triple;
    new triples are appended.
    """
    by_kind = {k.value: k for k in RelationKind}
    by_axis = {a.value: a for a in SemanticAxis}
    overrides: list[CueRule] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        if len(parts) != 5:
            raise ValueError(f"{path}, line {lineno}: expected 5 fields")
        kind, left, right, pattern, weight = parts
        if kind not in by_kind or left not in by_axis or right not in by_axis:
            raise ValueError(f"{path}, line {lineno}: unknown kind or axis")
        overrides.append(
            _rule(by_kind[kind], by_axis[left], by_axis[right], pattern, float(weight))
        )
    merged = {
        (r.relation_kind, r.left_axis, r.right_axis): r for r in DEFAULT_CUE_RULES
    }
    for rule in overrides:
        merged[(rule.relation_kind, rule.left_axis, rule.right_axis)] = rule
    return tuple(merged.values())


def _sentence_ids(text: str) -> list[int]:
    ids = [0] * len(text)
    sid = 0
    for i, ch in enumerate(text):
        ids[i] = sid
        if _SENTENCE_SPLIT.match(ch):
            sid += 1
    return ids


def _same_sentence(ids: list[int], a: EntityMention, b: EntityMention) -> bool:
    if not ids:
        return False
    pa = min(a.span[0], len(ids) - 1)
    pb = min(b.span[0], len(ids) - 1)
    return ids[pa] == ids[pb]


def _has_date_edges(
    mentions: list[EntityMention], ids: list[int]
) -> list[RelationEdge]:
    entities = [m for m in mentions if not m.is_date]
    edges = []
    for date_mention in (m for m in mentions if m.is_date):
        best = None
        for entity in entities:
            if not _same_sentence(ids, entity, date_mention):
                continue
            lo, hi = sorted([entity, date_mention], key=lambda m: m.span[0])
            gap = hi.span[0] - lo.span[1]
            if gap > HAS_DATE_MAX_GAP:
                continue
            blocked = any(
                other is not entity
                and not other.is_date
                and lo.span[1] <= other.span[0] < hi.span[0]
                for other in entities
            )
            if blocked:
                continue
            precedes = entity.span[0] < date_mention.span[0]
            key = (gap, 0 if precedes else 1, entity.span[0])
            if best is None or key < best[0]:
                best = (key, entity)
        if best is not None:
            edges.append(
                RelationEdge(best[1].mention_id, date_mention.mention_id,
                             RelationKind.HAS_DATE, 1.0)
            )
    return edges


def classify_relations(
    mentions: list[EntityMention],
    doc_text: str,
    cue_rules: tuple[CueRule, ...] = DEFAULT_CUE_RULES,
) -> list[RelationEdge]:
    """HasDate by dated-sentence adjacency; other kinds by between-text cues.

    Scope for cue rules: same sentence, or a gap of at most 200 characters.
    At most one edge per (pair, kind).
    """
    ids = _sentence_ids(doc_text)
    edges = _has_date_edges(mentions, ids)
    seen = {(e.from_mention, e.to_mention, e.relation_kind) for e in edges}

    concept_mentions = [m for m in mentions if not m.is_date]
    for left in concept_mentions:
        for right in concept_mentions:
            if left is right:
                continue
            for rule in cue_rules:
                if left.entity_type is not rule.left_axis:
                    continue
                if right.entity_type is not rule.right_axis:
                    continue
                first, second = sorted([left, right], key=lambda m: m.span[0])
                gap = second.span[0] - first.span[1]
                if gap < 0:
                    continue
                if not _same_sentence(ids, first, second) and gap > CUE_SCOPE_WINDOW:
                    continue
                between = doc_text[first.span[1]:second.span[0]]
                if not rule.cue_pattern.search(between):
                    continue
                key = (left.mention_id, right.mention_id, rule.relation_kind)
                if key in seen:
                    continue
                seen.add(key)
                edges.append(
                    RelationEdge(left.mention_id, right.mention_id,
                                 rule.relation_kind, rule.weight)
                )
    return edges


def build_tag_graph(
    doc: ClinicalDocument,
    onto: OntologyGraph,
    cue_rules: tuple[CueRule, ...] = DEFAULT_CUE_RULES,
    *,
    include_synonyms: bool = True,
) -> TagGraph:
    mentions = tag_entities(doc, onto, include_synonyms=include_synonyms)
    edges = classify_relations(mentions, doc.text, cue_rules)
    return TagGraph(doc.doc_id, tuple(mentions), tuple(edges))


# --------------------------------------------------------------- estimators


class EntityTagger(BaseEstimator, TransformerMixin):
    """Lexicon/pattern mention tagger over an ontology.

    ``include_synonyms=False`` gives the deliberately minimal variant used
    to prove downstream stages only depend on the mention contract.
    """

    def __init__(self, ontology=None, include_synonyms=True):
        self.ontology = ontology
        self.include_synonyms = include_synonyms

    def fit(self, X=None, y=None):
        if self.ontology is None or not isinstance(self.ontology, OntologyGraph):
            raise ValueError("EntityTagger needs an OntologyGraph")
        self.ontology_ = self.ontology
        self.lexicon_ = Lexicon(self.ontology, bool(self.include_synonyms))
        return self

    def transform(self, X):
        if not hasattr(self, "ontology_"):
            raise NotFittedError("EntityTagger is not fitted; call fit first")
        return [
            tag_entities(doc, self.ontology_, lexicon=self.lexicon_)
            for doc in X
        ]


class RelationTagger(BaseEstimator, TransformerMixin):
    """Pairwise relation classifier; ``X`` is (doc_text, mentions) pairs."""

    def __init__(self, cue_rules=None, cue_rules_path=None):
        self.cue_rules = cue_rules
        self.cue_rules_path = cue_rules_path

    def fit(self, X=None, y=None):
        if self.cue_rules is not None:
            self.rules_ = tuple(self.cue_rules)
        elif self.cue_rules_path is not None:
            self.rules_ = load_cue_rules(self.cue_rules_path)
        else:
            self.rules_ = DEFAULT_CUE_RULES
        return self

    def transform(self, X):
        if not hasattr(self, "rules_"):
            raise NotFittedError("RelationTagger is not fitted; call fit first")
        return [classify_relations(mentions, text, self.rules_) for text, mentions in X]
