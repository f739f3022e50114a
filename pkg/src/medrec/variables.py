"""The 13 cancer variables the abstraction pipeline reads out per patient."""

from __future__ import annotations

import enum


class VariableKind(enum.Enum):
    NEOPLASM = "Neoplasm"
    MORPHOLOGY = "Morphology"
    T_STAGE = "T-Stage"
    N_STAGE = "N-Stage"
    M_STAGE = "M-Stage"
    STAGE_GROUP = "Neoplasm Stage Group"
    MEDICATIONS = "Medications"
    OUTCOME = "Outcome"
    RESPONSE = "Response"
    TESTED_BIOMARKERS = "Tested Biomarkers"
    SURGERIES = "Surgeries"
    DIAGNOSTIC_PROCEDURES = "Diagnostic Procedures"
    CANCER_DIAGNOSIS_DATE = "Cancer Diagnosis Date"

    @property
    def label(self) -> str:
        return self.value


#: Canonical readout order, used for reports and the macro average.
ALL_VARIABLES: tuple[VariableKind, ...] = tuple(VariableKind)

_BY_LABEL = {kind.value: kind for kind in VariableKind}

# "Stage Group" appears as a short form in result tables; accept it on input.
_BY_LABEL["Stage Group"] = VariableKind.STAGE_GROUP


def variable_from_label(label: str) -> VariableKind:
    """Resolve a canonical variable name; unknown names raise ValueError."""
    try:
        return _BY_LABEL[label]
    except KeyError:
        raise ValueError(f"unknown variable name: {label!r}") from None
