"""Concept ontology: a DAG of typed medical concepts with subsumption queries.

The ontology file format is line oriented::

    concept_id|axis|preferred_name|parent_ids|synonyms

where ``parent_ids`` and ``synonyms`` are comma separated and may be empty.
Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path


class SemanticAxis(enum.Enum):
    NEOPLASM = "Neoplasm"
    MORPHOLOGY = "Morphology"
    T_STAGE = "TStage"
    N_STAGE = "NStage"
    M_STAGE = "MStage"
    STAGE_GROUP = "StageGroup"
    MEDICATION = "Medication"
    OUTCOME = "Outcome"
    RESPONSE = "Response"
    BIOMARKER = "Biomarker"
    SURGERY = "Surgery"
    DIAGNOSTIC_PROCEDURE = "DiagnosticProcedure"
    BODY_SITE = "BodySite"
    OTHER = "Other"


_AXIS_BY_NAME = {axis.value: axis for axis in SemanticAxis}


class OntologyError(Exception):
    """Malformed ontology source or an unresolvable query."""


class OntologyCycleError(OntologyError):
    """The is-a graph is not acyclic; carries one offending cycle."""

    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("is-a cycle: " + " -> ".join(cycle + cycle[:1]))


class UnknownConceptError(OntologyError, KeyError):
    def __init__(self, concept_id: str):
        self.concept_id = concept_id
        OntologyError.__init__(self, f"unknown concept id: {concept_id!r}")


@dataclass(frozen=True)
class Concept:
    concept_id: str
    axis: SemanticAxis
    preferred_name: str
    parent_ids: tuple[str, ...] = ()
    synonyms: tuple[str, ...] = ()

    @property
    def surfaces(self) -> tuple[str, ...]:
        return (self.preferred_name,) + self.synonyms


@dataclass
class OntologyGraph:
    """Immutable concept DAG with O(1) subsumption after load."""

    concepts: dict[str, Concept]
    _ancestors: dict[str, frozenset[str]] = field(repr=False, default_factory=dict)
    _depth: dict[str, int] = field(repr=False, default_factory=dict)
    _synonym_index: dict[tuple[str, SemanticAxis], str] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.concepts, dict):
            by_id: dict[str, Concept] = {}
            for concept in self.concepts:
                if concept.concept_id in by_id:
                    raise OntologyError(f"duplicate concept id {concept.concept_id!r}")
                by_id[concept.concept_id] = concept
            self.concepts = by_id
        self._validate()
        order = self._toposort()
        for cid in order:
            concept = self.concepts[cid]
            ancestors = {cid}
            depth = 0
            for pid in concept.parent_ids:
                ancestors |= self._ancestors[pid]
                depth = max(depth, self._depth[pid] + 1)
            self._ancestors[cid] = frozenset(ancestors)
            self._depth[cid] = depth
        self._build_synonym_index()

    # ------------------------------------------------------------------
    # validation

    def _validate(self) -> None:
        for cid, concept in self.concepts.items():
            for pid in concept.parent_ids:
                parent = self.concepts.get(pid)
                if parent is None:
                    raise OntologyError(f"concept {cid!r} names missing parent {pid!r}")
                if parent.axis is not concept.axis:
                    raise OntologyError(
                        f"concept {cid!r} ({concept.axis.value}) has parent "
                        f"{pid!r} on a different axis ({parent.axis.value})"
                    )

    def _toposort(self) -> list[str]:
        # Iterative DFS; on a back edge, reconstruct the cycle for the error.
        WHITE, GRAY, BLACK = 0, 1, 2
        color = dict.fromkeys(self.concepts, WHITE)
        order: list[str] = []
        for root in sorted(self.concepts):
            if color[root] != WHITE:
                continue
            stack: list[tuple[str, int]] = [(root, 0)]
            path = [root]
            color[root] = GRAY
            while stack:
                cid, idx = stack[-1]
                parents = self.concepts[cid].parent_ids
                if idx < len(parents):
                    stack[-1] = (cid, idx + 1)
                    pid = parents[idx]
                    if color[pid] == GRAY:
                        cycle = path[path.index(pid):]
                        raise OntologyCycleError(cycle)
                    if color[pid] == WHITE:
                        color[pid] = GRAY
                        stack.append((pid, 0))
                        path.append(pid)
                else:
                    color[cid] = BLACK
                    order.append(cid)
                    stack.pop()
                    path.pop()
        return order

    def _build_synonym_index(self) -> None:
        for cid in sorted(self.concepts):
            concept = self.concepts[cid]
            for surface in concept.surfaces:
                key = (surface.lower(), concept.axis)
                other = self._synonym_index.get(key)
                if other is not None and other != cid:
                    raise OntologyError(
                        f"surface {surface!r} maps to both {other!r} and {cid!r} "
                        f"on axis {concept.axis.value}"
                    )
                self._synonym_index[key] = cid

    # ------------------------------------------------------------------
    # queries

    def __contains__(self, concept_id: str) -> bool:
        return concept_id in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def get(self, concept_id: str) -> Concept:
        try:
            return self.concepts[concept_id]
        except KeyError:
            raise UnknownConceptError(concept_id) from None

    def depth(self, concept_id: str) -> int:
        self.get(concept_id)
        return self._depth[concept_id]

    def is_subtype_of(self, descendant: str, ancestor: str) -> bool:
        """Reflexive, transitive is-a reachability."""
        self.get(ancestor)
        return ancestor in self._ancestors[self.get(descendant).concept_id]

    def compatible(self, a: str, b: str) -> bool:
        """True when the concepts share an axis and one subsumes the other.

        Deliberately not transitive: two siblings are each compatible with
        their common parent yet incompatible with each other.
        """
        ca, cb = self.get(a), self.get(b)
        if ca.axis is not cb.axis:
            return False
        return self.is_subtype_of(a, b) or self.is_subtype_of(b, a)

    def most_specific(self, a: str, b: str) -> str:
        """Of two compatible concepts, the descendant."""
        if not self.compatible(a, b):
            raise OntologyError(f"concepts {a!r} and {b!r} are not compatible")
        return a if self.is_subtype_of(a, b) else b

    def lookup_surface(self, surface: str, axis: SemanticAxis) -> Concept | None:
        """Case-insensitive synonym/name lookup; at most one concept per axis."""
        cid = self._synonym_index.get((surface.lower(), axis))
        return None if cid is None else self.concepts[cid]

    def surface_index(self) -> dict[str, tuple[Concept, ...]]:
        """All lowercased surfaces mapped to their concepts, across axes."""
        index: dict[str, list[Concept]] = {}
        for (surface, _axis), cid in sorted(
            self._synonym_index.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
        ):
            index.setdefault(surface, []).append(self.concepts[cid])
        return {s: tuple(cs) for s, cs in index.items()}

    def axes_populated(self) -> set[SemanticAxis]:
        return {c.axis for c in self.concepts.values()}

    def roots(self, axis: SemanticAxis) -> list[Concept]:
        return [
            c for cid, c in sorted(self.concepts.items())
            if c.axis is axis and not c.parent_ids
        ]


def parse_ontology(text: str, source: str = "<string>") -> OntologyGraph:
    concepts: dict[str, Concept] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("|")
        if len(parts) != 5:
            raise OntologyError(
                f"{source}, line {lineno}: expected 5 pipe-separated fields, got {len(parts)}"
            )
        cid, axis_name, name, parents_field, synonyms_field = (p.strip() for p in parts)
        if not cid or not name:
            raise OntologyError(f"{source}, line {lineno}: empty concept id or name")
        axis = _AXIS_BY_NAME.get(axis_name)
        if axis is None:
            raise OntologyError(f"{source}, line {lineno}: unknown axis {axis_name!r}")
        if cid in concepts:
            raise OntologyError(f"{source}, line {lineno}: duplicate concept id {cid!r}")
        parents = tuple(p.strip() for p in parents_field.split(",") if p.strip())
        synonyms = tuple(s.strip() for s in synonyms_field.split(",") if s.strip())
        concepts[cid] = Concept(cid, axis, name, parents, synonyms)
    if not concepts:
        raise OntologyError(f"{source}: no concepts defined")
    return OntologyGraph(concepts)


def load_ontology(path: str | Path) -> OntologyGraph:
    path = Path(path)
    return parse_ontology(path.read_text(encoding="utf-8"), source=str(path))


def bundled_ontology_path() -> Path:
    return Path(__file__).parent / "data" / "ontology.txt"


def load_bundled_ontology() -> OntologyGraph:
    return load_ontology(bundled_ontology_path())
