"""Shared helpers for the test suite.

The random-DAG builder and the reachability oracle here are written
against raw parent lists on purpose: they must not share logic with the
graph implementation they are used to check.
"""

from __future__ import annotations

import random

from medrec.ontology import Concept, OntologyGraph, SemanticAxis


def build_random_parent_lists(rng: random.Random, n_concepts: int) -> list[list[int]]:
    """Random DAG as parent index lists; parents always precede children.

    Index 0 is the sole guaranteed root; later nodes pick 0..2 parents
    among earlier indices, so the result is acyclic by construction.
    """
    parents: list[list[int]] = [[]]
    for i in range(1, n_concepts):
        k = rng.choice((0, 1, 1, 2))
        k = min(k, i)
        parents.append(sorted(rng.sample(range(i), k)) if k else [])
    return parents


def ontology_from_parent_lists(
    parents: list[list[int]], axis: SemanticAxis = SemanticAxis.OTHER
) -> OntologyGraph:
    """Wrap parent index lists into a single-axis OntologyGraph."""
    concepts = []
    for i, ps in enumerate(parents):
        concepts.append(
            Concept(
                concept_id=f"c{i}",
                axis=axis,
                preferred_name=f"node {i}",
                parent_ids=tuple(f"c{p}" for p in ps),
            )
        )
    return OntologyGraph(concepts)


def dfs_reachable(parents: list[list[int]], descendant: int, ancestor: int) -> bool:
    """Oracle: walk raw parent links from descendant looking for ancestor."""
    stack = [descendant]
    seen = set()
    while stack:
        node = stack.pop()
        if node == ancestor:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(parents[node])
    return False
