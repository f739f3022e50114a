"""The 31-question bank driving retrieval and generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from medrec.variables import ALL_VARIABLES, VariableKind

N_QUESTIONS = 31

_V = VariableKind

# question index -> variables the question is aimed at
QUESTION_TARGETS: dict[int, frozenset[VariableKind]] = {
    1: frozenset(ALL_VARIABLES),
    2: frozenset({_V.NEOPLASM}),
    3: frozenset({_V.MORPHOLOGY}),
    4: frozenset({_V.T_STAGE, _V.N_STAGE, _V.M_STAGE}),
    5: frozenset({_V.STAGE_GROUP}),
    6: frozenset({_V.T_STAGE, _V.N_STAGE, _V.M_STAGE}),
    7: frozenset({_V.CANCER_DIAGNOSIS_DATE}),
    8: frozenset({_V.M_STAGE}),
    9: frozenset({_V.OUTCOME}),
    10: frozenset({_V.MEDICATIONS}),
    11: frozenset({_V.MEDICATIONS}),
    12: frozenset({_V.MEDICATIONS}),
    13: frozenset({_V.SURGERIES}),
    14: frozenset({_V.SURGERIES}),
    15: frozenset({_V.SURGERIES}),
    16: frozenset({_V.OUTCOME}),
    17: frozenset({_V.OUTCOME}),
    18: frozenset({_V.RESPONSE}),
    19: frozenset({_V.RESPONSE}),
    20: frozenset({_V.RESPONSE}),
    21: frozenset({_V.TESTED_BIOMARKERS}),
    22: frozenset({_V.TESTED_BIOMARKERS}),
    23: frozenset({_V.TESTED_BIOMARKERS}),
    24: frozenset({_V.TESTED_BIOMARKERS}),
    25: frozenset({_V.TESTED_BIOMARKERS}),
    26: frozenset({_V.TESTED_BIOMARKERS}),
    27: frozenset({_V.TESTED_BIOMARKERS}),
    28: frozenset({_V.DIAGNOSTIC_PROCEDURES}),
    29: frozenset({_V.DIAGNOSTIC_PROCEDURES}),
    30: frozenset({_V.DIAGNOSTIC_PROCEDURES}),
    31: frozenset({_V.DIAGNOSTIC_PROCEDURES}),
}


@dataclass(frozen=True)
class QuestionBank:
    questions: tuple[str, ...]
    targets: dict[int, frozenset[VariableKind]] = field(
        default_factory=lambda: dict(QUESTION_TARGETS)
    )

    def __post_init__(self):
        if len(self.questions) != N_QUESTIONS:
            raise ValueError(
                f"expected {N_QUESTIONS} questions, got {len(self.questions)}"
            )
        if set(self.targets) != set(range(1, N_QUESTIONS + 1)):
            raise ValueError("targets must cover question indices 1..31 exactly")
        covered = frozenset().union(*self.targets.values())
        missing = set(ALL_VARIABLES) - covered
        if missing:
            raise ValueError(f"variables never targeted: {sorted(v.value for v in missing)}")

    def __len__(self) -> int:
        return len(self.questions)

    def question(self, index: int) -> str:
        if not 1 <= index <= N_QUESTIONS:
            raise IndexError(f"question index {index} outside 1..{N_QUESTIONS}")
        return self.questions[index - 1]

    def targets_of(self, index: int) -> frozenset[VariableKind]:
        if not 1 <= index <= N_QUESTIONS:
            raise IndexError(f"question index {index} outside 1..{N_QUESTIONS}")
        return self.targets[index]

    def index_of(self, question: str) -> int | None:
        text = question.strip()
        for i, q in enumerate(self.questions, start=1):
            if q == text:
                return i
        return None

    def items(self):
        return list(enumerate(self.questions, start=1))


def load_question_bank(path) -> QuestionBank:
    questions = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                questions.append(line)
    return QuestionBank(tuple(questions))


def bundled_question_path() -> Path:
    return Path(__file__).parent.parent / "data" / "questions.txt"


def load_bundled_question_bank() -> QuestionBank:
    return load_question_bank(bundled_question_path())
