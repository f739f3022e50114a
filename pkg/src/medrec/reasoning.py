"""Ground tag graphs into object graphs, consolidate them per patient,
and read out the 13 medical variables.

Clustering here is greedy with full-member compatibility checks because
concept compatibility is deliberately not transitive: two sibling concepts
must never merge through their shared parent.  Consolidation iterates the
greedy pass to a fixpoint so the result is stable under re-consolidation.
"""

from __future__ import annotations

import datetime
import functools
from dataclasses import dataclass, field, replace

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from medrec.documents import DocumentCategory, ProvenanceKind
from medrec.extraction import EntityMention, RelationKind, TagGraph
from medrec.ontology import OntologyGraph, SemanticAxis
from medrec.validation import check_fraction
from medrec.variables import ALL_VARIABLES, VariableKind

DEFAULT_TAU = 0.25

_PROVENANCE_WEIGHT = {
    ProvenanceKind.SOURCE_RECORD: 1.0,
    ProvenanceKind.LLM_ANSWER: 0.5,
}


@dataclass(frozen=True)
class DateOrigin:
    date: datetime.date
    doc_id: str
    category: DocumentCategory | None

    def sort_key(self):
        return (self.date, self.doc_id, self.category.value if self.category else "")


@dataclass(frozen=True)
class MedicalObject:
    object_id: str
    concept: str
    axis: SemanticAxis
    date: datetime.date | None = None
    stage_value: str | None = None
    qualifier: str | None = None
    date_origins: tuple[DateOrigin, ...] = ()
    provenance: tuple[tuple[str, str, ProvenanceKind], ...] = ()
    member_concepts: tuple[str, ...] = ()
    confidence: float = 0.0

    def __post_init__(self):
        if not self.provenance:
            raise ValueError(f"object {self.object_id!r} has empty provenance")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def weighted_support(self) -> float:
        return sum(_PROVENANCE_WEIGHT[kind] for _, _, kind in self.provenance)

    @property
    def source_doc_id(self) -> str:
        return self.provenance[0][0]


@dataclass(frozen=True)
class ObjectLink:
    from_object: str
    to_object: str
    relation_kind: RelationKind
    score: float

    def __post_init__(self):
        if self.from_object == self.to_object:
            raise ValueError("self-links are not allowed")


def _check_links(objects, links, owner):
    ids = {o.object_id for o in objects}
    for link in links:
        if link.from_object not in ids or link.to_object not in ids:
            raise ValueError(f"{owner}: link endpoint missing: {link}")


@dataclass(frozen=True)
class ObjectGraph:
    doc_id: str
    objects: tuple[MedicalObject, ...]
    links: tuple[ObjectLink, ...] = ()

    def __post_init__(self):
        _check_links(self.objects, self.links, f"object graph {self.doc_id}")


@dataclass(frozen=True)
class PatientGraph:
    patient_id: str
    objects: tuple[MedicalObject, ...]
    links: tuple[ObjectLink, ...] = ()

    def __post_init__(self):
        _check_links(self.objects, self.links, f"patient graph {self.patient_id}")


# ---------------------------------------------------------------- grounding


class _MentionCluster:
    __slots__ = ("axis", "members", "date", "stage_value", "index")

    def __init__(self, axis, index):
        self.axis = axis
        self.members: list[EntityMention] = []
        self.date: datetime.date | None = None
        self.stage_value: str | None = None
        self.index = index


def _join_candidates(cluster, mention, mdate, onto):
    if cluster.axis is not mention.entity_type:
        return False
    top = mention.top_concept
    if any(not onto.compatible(top, m.top_concept) for m in cluster.members):
        return False
    if mdate is not None and cluster.date is not None and cluster.date != mdate:
        return False
    if (
        mention.stage_value is not None
        and cluster.stage_value is not None
        and mention.stage_value != cluster.stage_value
    ):
        return False
    return True


def _vote(cluster, onto: OntologyGraph) -> str:
    votes: dict[str, float] = {}
    for mention in cluster.members:
        for cid, score in mention.candidate_concepts:
            if onto.get(cid).axis is cluster.axis:
                votes[cid] = votes.get(cid, 0.0) + score
    return min(votes, key=lambda cid: (-votes[cid], -onto.depth(cid), cid))


def ground_tag_graph(
    tg: TagGraph,
    onto: OntologyGraph,
    *,
    category: DocumentCategory | None = None,
    provenance_kind: ProvenanceKind = ProvenanceKind.SOURCE_RECORD,
) -> ObjectGraph:
    """One object per mention cluster; concepts chosen by vote mass.

    Mentions cluster within the document when their top concepts are
    pairwise compatible and their linked dates and stage values do not
    conflict; an undated mention prefers the earliest-dated cluster.
    """
    by_id = {m.mention_id: m for m in tg.mentions}
    date_of: dict[str, datetime.date] = {}
    for edge in tg.edges:
        if edge.relation_kind is RelationKind.HAS_DATE:
            target = by_id[edge.to_mention]
            if target.is_date:
                date_of.setdefault(edge.from_mention, target.parsed_date)

    clusters: list[_MentionCluster] = []
    far_future = datetime.date.max
    for mention in sorted(
        (m for m in tg.mentions if not m.is_date), key=lambda m: m.span
    ):
        mdate = date_of.get(mention.mention_id)
        eligible = [c for c in clusters if _join_candidates(c, mention, mdate, onto)]
        if eligible:
            if mdate is not None:
                chosen = min(
                    eligible, key=lambda c: (0 if c.date == mdate else 1, c.index)
                )
            else:
                chosen = min(eligible, key=lambda c: (c.date or far_future, c.index))
        else:
            chosen = _MentionCluster(mention.entity_type, len(clusters))
            clusters.append(chosen)
        chosen.members.append(mention)
        if mdate is not None and chosen.date is None:
            chosen.date = mdate
        if mention.stage_value is not None and chosen.stage_value is None:
            chosen.stage_value = mention.stage_value

    # qualifier: highest-scored interpretation link per entity mention
    qualifier_of: dict[str, tuple[float, str]] = {}
    for edge in tg.edges:
        if edge.relation_kind is not RelationKind.HAS_INTERPRETATION:
            continue
        interp = by_id[edge.to_mention]
        if interp.is_date or interp.top_concept is None:
            continue
        name = onto.get(interp.top_concept).preferred_name
        current = qualifier_of.get(edge.from_mention)
        if current is None or edge.score > current[0]:
            qualifier_of[edge.from_mention] = (edge.score, name)

    concepts = [_vote(c, onto) for c in clusters]
    supports = [
        sum(_PROVENANCE_WEIGHT[provenance_kind] for _ in c.members) for c in clusters
    ]

    objects: list[MedicalObject] = []
    mention_to_object: dict[str, str] = {}
    for i, cluster in enumerate(clusters):
        k = sum(
            supports[j]
            for j, other in enumerate(clusters)
            if j != i
            and other.axis is cluster.axis
            and not onto.compatible(concepts[j], concepts[i])
        )
        s = supports[i]
        qualifier = None
        for member in cluster.members:
            if member.mention_id in qualifier_of:
                qualifier = qualifier_of[member.mention_id][1]
                break
        object_id = f"{tg.doc_id}/o{i:04d}"
        origins = (
            (DateOrigin(cluster.date, tg.doc_id, category),) if cluster.date else ()
        )
        objects.append(
            MedicalObject(
                object_id=object_id,
                concept=concepts[i],
                axis=cluster.axis,
                date=cluster.date,
                stage_value=cluster.stage_value,
                qualifier=qualifier,
                date_origins=origins,
                provenance=tuple(
                    (tg.doc_id, m.mention_id, provenance_kind)
                    for m in cluster.members
                ),
                member_concepts=tuple(
                    sorted({m.top_concept for m in cluster.members})
                ),
                confidence=(s + 1.0) / (s + k + 2.0),
            )
        )
        for member in cluster.members:
            mention_to_object[member.mention_id] = object_id

    links: dict[tuple[str, str, RelationKind], float] = {}
    for edge in tg.edges:
        if edge.relation_kind is RelationKind.HAS_DATE:
            continue
        src = mention_to_object.get(edge.from_mention)
        dst = mention_to_object.get(edge.to_mention)
        if src is None or dst is None or src == dst:
            continue
        key = (src, dst, edge.relation_kind)
        links[key] = max(links.get(key, 0.0), edge.score)

    return ObjectGraph(
        tg.doc_id,
        tuple(objects),
        tuple(
            ObjectLink(src, dst, kind, score)
            for (src, dst, kind), score in sorted(
                links.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)
            )
        ),
    )


# ------------------------------------------------------------ consolidation


def _pool_sort_key(obj: MedicalObject):
    return (-obj.weighted_support, obj.source_doc_id, obj.object_id)


def _attributes_consistent(cluster: list[MedicalObject], obj: MedicalObject) -> bool:
    for member in cluster:
        if obj.date and member.date and obj.date != member.date:
            return False
        if (
            obj.stage_value
            and member.stage_value
            and obj.stage_value != member.stage_value
        ):
            return False
    return True


def _greedy_clusters(
    objects: list[MedicalObject], onto: OntologyGraph
) -> list[list[MedicalObject]]:
    clusters: list[list[MedicalObject]] = []
    for obj in sorted(objects, key=_pool_sort_key):
        for cluster in clusters:
            if cluster[0].axis is not obj.axis:
                continue
            if any(not onto.compatible(obj.concept, m.concept) for m in cluster):
                continue
            if not _attributes_consistent(cluster, obj):
                continue
            cluster.append(obj)
            break
        else:
            clusters.append([obj])
    return clusters


def _merge_cluster(members: list[MedicalObject], onto: OntologyGraph) -> MedicalObject:
    concept = functools.reduce(
        onto.most_specific, (m.concept for m in members)
    )
    date = next((m.date for m in members if m.date), None)
    stage_value = next((m.stage_value for m in members if m.stage_value), None)
    qualifier = next((m.qualifier for m in members if m.qualifier), None)
    origins = sorted(
        {o for m in members for o in m.date_origins}, key=DateOrigin.sort_key
    )
    provenance = tuple(
        sorted({p for m in members for p in m.provenance})
    )
    return MedicalObject(
        object_id=f"merge/{provenance[0][0]}/{provenance[0][1]}",
        concept=concept,
        axis=members[0].axis,
        date=date,
        stage_value=stage_value,
        qualifier=qualifier,
        date_origins=tuple(origins),
        provenance=provenance,
        member_concepts=tuple(sorted({m.concept for m in members})),
        confidence=0.0,
    )


def consolidate_patient(
    graphs: list[ObjectGraph],
    onto: OntologyGraph,
    *,
    patient_id: str = "",
) -> PatientGraph:
    """Merge compatible objects across a patient's documents.

    The greedy pass repeats until stable, so consolidating an already
    consolidated graph changes nothing.  Confidence per cluster is
    (s + 1) / (s + k + 2): s the cluster's weighted provenance, k the
    weighted provenance of same-axis clusters with incompatible concepts.
    """
    pool: list[MedicalObject] = [obj for g in graphs for obj in g.objects]
    origin_map: dict[str, str] = {o.object_id: o.object_id for o in pool}

    while True:
        clusters = _greedy_clusters(pool, onto)
        if len(clusters) == len(pool):
            break
        merged = []
        pass_map: dict[str, str] = {}
        for members in clusters:
            if len(members) == 1:
                merged.append(members[0])
            else:
                obj = _merge_cluster(members, onto)
                merged.append(obj)
                for member in members:
                    pass_map[member.object_id] = obj.object_id
        origin_map = {
            original: pass_map.get(target, target)
            for original, target in origin_map.items()
        }
        pool = merged

    pool_sorted = sorted(pool, key=lambda o: (o.axis.value, _pool_sort_key(o)))
    supports = [o.weighted_support for o in pool_sorted]
    final_ids: dict[str, str] = {}
    objects: list[MedicalObject] = []
    for i, obj in enumerate(pool_sorted):
        k = sum(
            supports[j]
            for j, other in enumerate(pool_sorted)
            if j != i
            and other.axis is obj.axis
            and not onto.compatible(other.concept, obj.concept)
        )
        s = supports[i]
        final_id = f"{patient_id or 'patient'}/g{i:04d}"
        final_ids[obj.object_id] = final_id
        objects.append(
            replace(
                obj,
                object_id=final_id,
                member_concepts=obj.member_concepts or (obj.concept,),
                confidence=(s + 1.0) / (s + k + 2.0),
            )
        )

    remap = {
        original: final_ids[target] for original, target in origin_map.items()
    }
    links: dict[tuple[str, str, RelationKind], float] = {}
    for g in graphs:
        for link in g.links:
            src = remap.get(link.from_object)
            dst = remap.get(link.to_object)
            if src is None or dst is None or src == dst:
                continue
            key = (src, dst, link.relation_kind)
            links[key] = max(links.get(key, 0.0), link.score)

    return PatientGraph(
        patient_id,
        tuple(objects),
        tuple(
            ObjectLink(src, dst, kind, score)
            for (src, dst, kind), score in sorted(
                links.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)
            )
        ),
    )


def reinterpret_as_object_graph(pg: PatientGraph) -> ObjectGraph:
    """View a patient graph as a single document graph for re-consolidation."""
    return ObjectGraph(f"consolidated:{pg.patient_id}", pg.objects, pg.links)


# ------------------------------------------------------------------ readout


@dataclass(frozen=True)
class ReadoutValue:
    value: str
    is_literal: bool = False
    date: datetime.date | None = None
    qualifier: str | None = None
    confidence: float = 0.0


@dataclass(frozen=True)
class VariableReadout:
    patient_id: str
    values: dict[VariableKind, frozenset[ReadoutValue]] = field(default_factory=dict)

    def __post_init__(self):
        filled = {kind: self.values.get(kind, frozenset()) for kind in ALL_VARIABLES}
        object.__setattr__(self, "values", filled)

    def get(self, kind: VariableKind) -> frozenset[ReadoutValue]:
        return self.values[kind]


_SINGLE_VALUED = {
    VariableKind.NEOPLASM: SemanticAxis.NEOPLASM,
    VariableKind.MORPHOLOGY: SemanticAxis.MORPHOLOGY,
    VariableKind.T_STAGE: SemanticAxis.T_STAGE,
    VariableKind.N_STAGE: SemanticAxis.N_STAGE,
    VariableKind.M_STAGE: SemanticAxis.M_STAGE,
    VariableKind.STAGE_GROUP: SemanticAxis.STAGE_GROUP,
}

_MULTI_VALUED = {
    VariableKind.MEDICATIONS: SemanticAxis.MEDICATION,
    VariableKind.SURGERIES: SemanticAxis.SURGERY,
    VariableKind.TESTED_BIOMARKERS: SemanticAxis.BIOMARKER,
    VariableKind.DIAGNOSTIC_PROCEDURES: SemanticAxis.DIAGNOSTIC_PROCEDURE,
}

_DATED_MULTI = {
    VariableKind.OUTCOME: SemanticAxis.OUTCOME,
    VariableKind.RESPONSE: SemanticAxis.RESPONSE,
}


def _to_readout(obj: MedicalObject) -> ReadoutValue:
    return ReadoutValue(
        value=obj.concept,
        date=obj.date,
        qualifier=obj.qualifier,
        confidence=obj.confidence,
    )


def _pick_single(objects: list[MedicalObject], onto: OntologyGraph) -> MedicalObject:
    return min(
        objects,
        key=lambda o: (-o.confidence, -onto.depth(o.concept), o.concept),
    )


def extract_variables(
    pg: PatientGraph,
    onto: OntologyGraph,
    tau: float = DEFAULT_TAU,
) -> VariableReadout:
    """Read the 13 variables off a consolidated patient graph.

    Single-valued variables take the highest-confidence cluster (ties to
    the more specific concept); multi-valued variables take every cluster
    at or above ``tau``; the diagnosis date prefers the earliest
    pathology-documented date on the chosen neoplasm cluster.
    """
    by_axis: dict[SemanticAxis, list[MedicalObject]] = {}
    for obj in pg.objects:
        by_axis.setdefault(obj.axis, []).append(obj)

    values: dict[VariableKind, frozenset[ReadoutValue]] = {}

    chosen_neoplasm: MedicalObject | None = None
    for kind, axis in _SINGLE_VALUED.items():
        axis_objects = by_axis.get(axis, [])
        if not axis_objects:
            values[kind] = frozenset()
            continue
        best = _pick_single(axis_objects, onto)
        if kind is VariableKind.NEOPLASM:
            chosen_neoplasm = best
        values[kind] = frozenset({_to_readout(best)})

    for kind, axis in _MULTI_VALUED.items():
        values[kind] = frozenset(
            _to_readout(o) for o in by_axis.get(axis, []) if o.confidence >= tau
        )

    for kind, axis in _DATED_MULTI.items():
        values[kind] = frozenset(
            _to_readout(o) for o in by_axis.get(axis, []) if o.confidence >= tau
        )

    cdd = None
    if chosen_neoplasm is not None:
        pathology_dates = [
            o.date
            for o in chosen_neoplasm.date_origins
            if o.category is DocumentCategory.PATHOLOGY
        ]
        if pathology_dates:
            cdd = min(pathology_dates)
        else:
            all_dates = [
                origin.date
                for obj in by_axis.get(SemanticAxis.NEOPLASM, [])
                for origin in obj.date_origins
            ]
            if all_dates:
                cdd = min(all_dates)
    if cdd is not None:
        values[VariableKind.CANCER_DIAGNOSIS_DATE] = frozenset(
            {
                ReadoutValue(
                    value=cdd.isoformat(),
                    is_literal=True,
                    date=cdd,
                    confidence=chosen_neoplasm.confidence,
                )
            }
        )
    else:
        values[VariableKind.CANCER_DIAGNOSIS_DATE] = frozenset()

    return VariableReadout(pg.patient_id, values)


# --------------------------------------------------------------- estimators


class MentionGrounder(BaseEstimator, TransformerMixin):
    """Grounds (TagGraph, ClinicalDocument) pairs into object graphs."""

    def __init__(self, ontology=None):
        self.ontology = ontology

    def fit(self, X=None, y=None):
        if not isinstance(self.ontology, OntologyGraph):
            raise ValueError("MentionGrounder needs an OntologyGraph")
        self.ontology_ = self.ontology
        return self

    def transform(self, X):
        if not hasattr(self, "ontology_"):
            raise NotFittedError("MentionGrounder is not fitted; call fit first")
        out = []
        for tg, doc in X:
            out.append(
                ground_tag_graph(
                    tg,
                    self.ontology_,
                    category=doc.category,
                    provenance_kind=doc.provenance.kind,
                )
            )
        return out


class PatientConsolidator(BaseEstimator, TransformerMixin):
    """Consolidates (patient_id, [ObjectGraph]) pairs into patient graphs."""

    def __init__(self, ontology=None):
        self.ontology = ontology

    def fit(self, X=None, y=None):
        if not isinstance(self.ontology, OntologyGraph):
            raise ValueError("PatientConsolidator needs an OntologyGraph")
        self.ontology_ = self.ontology
        return self

    def transform(self, X):
        if not hasattr(self, "ontology_"):
            raise NotFittedError("PatientConsolidator is not fitted; call fit first")
        return [
            consolidate_patient(graphs, self.ontology_, patient_id=pid)
            for pid, graphs in X
        ]


class VariableReader(BaseEstimator, TransformerMixin):
    """Reads variable values from patient graphs at threshold ``tau``."""

    def __init__(self, ontology=None, tau=DEFAULT_TAU):
        self.ontology = ontology
        self.tau = tau

    def fit(self, X=None, y=None):
        if not isinstance(self.ontology, OntologyGraph):
            raise ValueError("VariableReader needs an OntologyGraph")
        self.ontology_ = self.ontology
        self.tau_ = check_fraction(self.tau, "tau")
        return self

    def transform(self, X):
        if not hasattr(self, "tau_"):
            raise NotFittedError("VariableReader is not fitted; call fit first")
        return [extract_variables(pg, self.ontology_, self.tau_) for pg in X]

    predict = transform
