"""Scoring: value matching, per-variable micro P/R/F1, macro average.

A predicted value matches a gold value when the concepts are equal or the
prediction is a subtype of the gold concept; literal values must be equal
verbatim.  When the gold value carries a date the prediction's date must
equal it exactly.  Matching is one-to-one and greedy: predictions are tried
in descending confidence, each consuming at most one gold value.

Counts aggregate by summation across patients within a variable (micro);
the macro average is the unweighted mean over exactly the 13 variables.
Qualifiers are never scored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from medrec.corpus.loader import GoldStandard, GoldValue
from medrec.ontology import OntologyGraph
from medrec.reasoning import ReadoutValue, VariableReadout
from medrec.variables import ALL_VARIABLES, VariableKind


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def value_matches(pred: ReadoutValue, gold: GoldValue, onto: OntologyGraph) -> bool:
    if gold.date is not None and pred.date != gold.date:
        return False
    if gold.is_literal or pred.is_literal:
        return gold.is_literal and pred.is_literal and pred.value == gold.value
    return pred.value == gold.value or onto.is_subtype_of(pred.value, gold.value)


def match_variable(
    predictions: Iterable[ReadoutValue],
    gold_values: Iterable[GoldValue],
    onto: OntologyGraph,
) -> MatchCounts:
    ordered = sorted(
        predictions, key=lambda v: (-v.confidence, v.value, str(v.date))
    )
    unmatched = sorted(gold_values, key=lambda g: (g.value, str(g.date)))
    tp = fp = 0
    for pred in ordered:
        hit = next((g for g in unmatched if value_matches(pred, g, onto)), None)
        if hit is None:
            fp += 1
        else:
            tp += 1
            unmatched.remove(hit)
    return MatchCounts(tp, fp, len(unmatched))


def match_patient(
    readout: VariableReadout, gold: GoldStandard, onto: OntologyGraph
) -> dict[VariableKind, MatchCounts]:
    return {
        kind: match_variable(readout.values[kind], gold.get(kind), onto)
        for kind in ALL_VARIABLES
    }


def sum_counts(
    per_patient: Iterable[Mapping[VariableKind, MatchCounts]],
) -> dict[VariableKind, MatchCounts]:
    totals = {kind: MatchCounts() for kind in ALL_VARIABLES}
    for counts in per_patient:
        for kind, c in counts.items():
            totals[kind] = totals[kind] + c
    return totals


@dataclass(frozen=True)
class VariableMetrics:
    variable: VariableKind
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def harmonic_mean(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def compute_metrics(variable: VariableKind, counts: MatchCounts) -> VariableMetrics:
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    return VariableMetrics(
        variable,
        counts.tp,
        counts.fp,
        counts.fn,
        precision,
        recall,
        harmonic_mean(precision, recall),
    )


def metrics_table(
    totals: Mapping[VariableKind, MatchCounts],
) -> tuple[VariableMetrics, ...]:
    return tuple(compute_metrics(kind, totals[kind]) for kind in ALL_VARIABLES)


def macro_average(rows: Iterable[VariableMetrics]) -> float:
    rows = tuple(rows)
    if len(rows) != len(ALL_VARIABLES):
        raise ValueError(
            f"macro average needs exactly {len(ALL_VARIABLES)} rows, got {len(rows)}"
        )
    return sum(row.f1 for row in rows) / len(rows)
