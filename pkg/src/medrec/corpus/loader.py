"""Load patient record sets and gold-standard annotations from disk.

Corpus layout: ``<root>/<patient_id>/<doc_id>.txt`` (UTF-8).  An optional
``<root>/cohorts.tsv`` sidecar (``patient_id<TAB>cohort``) assigns cancer
cohorts; patients without an entry fall back to the Other cohort.

Gold format, one value per line::

    patient_id <TAB> variable <TAB> value [<TAB> date [<TAB> qualifier]]

where ``value`` is ``concept:<id>`` or ``lit:<string>`` and ``date`` is
``YYYY-MM-DD``.
"""

from __future__ import annotations

import datetime
import enum
from dataclasses import dataclass, field
from pathlib import Path

from medrec.ontology import OntologyGraph
from medrec.variables import ALL_VARIABLES, VariableKind, variable_from_label


class CorpusError(Exception):
    """Unloadable corpus or gold file."""


class CancerCohort(enum.Enum):
    COLORECTAL = "Colorectal"
    BREAST = "Breast"
    LUNG = "Lung"
    OTHER = "Other"


@dataclass(frozen=True)
class RawDocumentText:
    source_id: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"record {self.source_id!r} is empty")

    @property
    def byte_length(self) -> int:
        return len(self.text.encode("utf-8"))


@dataclass(frozen=True)
class PatientRecordSet:
    patient_id: str
    records: tuple[RawDocumentText, ...]
    cancer_cohort: CancerCohort = CancerCohort.OTHER

    def __post_init__(self):
        if not self.patient_id:
            raise ValueError("patient_id must be non-empty")
        if not self.records:
            raise ValueError(f"patient {self.patient_id!r} has no records")


@dataclass(frozen=True)
class CorpusWarning:
    patient_id: str
    source: str
    message: str


def _load_cohorts(root: Path) -> dict[str, CancerCohort]:
    sidecar = root / "cohorts.tsv"
    if not sidecar.is_file():
        return {}
    by_value = {c.value: c for c in CancerCohort}
    cohorts: dict[str, CancerCohort] = {}
    for lineno, line in enumerate(sidecar.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in by_value:
            raise CorpusError(f"{sidecar}, line {lineno}: bad cohort row {line!r}")
        cohorts[parts[0]] = by_value[parts[1]]
    return cohorts


def load_patient_corpus(
    root_path: str | Path, warnings: list[CorpusWarning] | None = None
) -> list[PatientRecordSet]:
    """One PatientRecordSet per patient directory, records in file-name order.

    Empty files are skipped with a warning; a patient whose files are all
    empty is skipped entirely (also warned).  ``warnings``, when given, is
    appended to in place.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} does not exist")
    sink = warnings if warnings is not None else []
    cohorts = _load_cohorts(root)

    patients: list[PatientRecordSet] = []
    for patient_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        patient_id = patient_dir.name
        records = []
        for txt_path in sorted(patient_dir.glob("*.txt")):
            text = txt_path.read_text(encoding="utf-8")
            if not text.strip():
                sink.append(
                    CorpusWarning(patient_id, txt_path.name, "empty file skipped")
                )
                continue
            records.append(RawDocumentText(txt_path.stem, text))
        if not records:
            sink.append(
                CorpusWarning(patient_id, str(patient_dir), "no non-empty records; patient skipped")
            )
            continue
        patients.append(
            PatientRecordSet(
                patient_id,
                tuple(records),
                cohorts.get(patient_id, CancerCohort.OTHER),
            )
        )
    return patients


# ----------------------------------------------------------------- gold


@dataclass(frozen=True)
class GoldValue:
    """One annotated value: an ontology concept or a literal string."""

    value: str
    is_literal: bool = False
    date: datetime.date | None = None
    qualifier: str | None = None


@dataclass(frozen=True)
class GoldStandard:
    """Per-patient map from every variable kind to its annotated value set."""

    patient_id: str
    values: dict[VariableKind, frozenset[GoldValue]] = field(default_factory=dict)

    def __post_init__(self):
        filled = {kind: self.values.get(kind, frozenset()) for kind in ALL_VARIABLES}
        object.__setattr__(self, "values", filled)

    def get(self, kind: VariableKind) -> frozenset[GoldValue]:
        return self.values[kind]


def _parse_gold_value(
    raw: str, ontology: OntologyGraph, where: str
) -> tuple[str, bool]:
    if raw.startswith("concept:"):
        cid = raw[len("concept:"):]
        if cid not in ontology:
            raise CorpusError(f"{where}: unknown ontology concept {cid!r}")
        return cid, False
    if raw.startswith("lit:"):
        literal = raw[len("lit:"):]
        if not literal:
            raise CorpusError(f"{where}: empty literal value")
        return literal, True
    raise CorpusError(f"{where}: value must start with 'concept:' or 'lit:', got {raw!r}")


def load_gold_standard(
    path: str | Path, ontology: OntologyGraph
) -> dict[str, GoldStandard]:
    """Parse the gold TSV; every referenced concept must resolve."""
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"gold file {path} does not exist")

    staged: dict[str, dict[VariableKind, set[GoldValue]]] = {}
    seen_rows: set[tuple] = set()
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw_line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        where = f"{path}, line {lineno}"
        parts = line.split("\t")
        if not 3 <= len(parts) <= 5:
            raise CorpusError(f"{where}: expected 3 to 5 tab-separated fields")
        parts += [""] * (5 - len(parts))
        patient_id, var_label, value_field, date_field, qualifier = (
            p.strip() for p in parts
        )
        if not patient_id:
            raise CorpusError(f"{where}: empty patient_id")
        try:
            kind = variable_from_label(var_label)
        except ValueError as exc:
            raise CorpusError(f"{where}: {exc}") from None
        value, is_literal = _parse_gold_value(value_field, ontology, where)
        date = None
        if date_field:
            try:
                date = datetime.date.fromisoformat(date_field)
            except ValueError:
                raise CorpusError(f"{where}: bad date {date_field!r}") from None

        row_key = (patient_id, kind, value, is_literal, date, qualifier or None)
        if row_key in seen_rows:
            raise CorpusError(f"{where}: duplicate gold entry {line!r}")
        seen_rows.add(row_key)
        staged.setdefault(patient_id, {}).setdefault(kind, set()).add(
            GoldValue(value, is_literal, date, qualifier or None)
        )

    return {
        pid: GoldStandard(pid, {k: frozenset(vs) for k, vs in kinds.items()})
        for pid, kinds in sorted(staged.items())
    }
