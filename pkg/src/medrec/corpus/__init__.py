from medrec.corpus.loader import (
    CancerCohort,
    CorpusError,
    CorpusWarning,
    GoldStandard,
    GoldValue,
    PatientRecordSet,
    RawDocumentText,
    load_gold_standard,
    load_patient_corpus,
)
from medrec.corpus.synthetic import (
    COHORT_PROFILES,
    MAX_DOCS_PER_PATIENT,
    MEAN_DOCS_PER_PATIENT,
    MIN_DOCS_PER_PATIENT,
    CohortProfile,
    generate_corpus,
)

__all__ = [
    "COHORT_PROFILES",
    "CancerCohort",
    "CohortProfile",
    "CorpusError",
    "CorpusWarning",
    "GoldStandard",
    "GoldValue",
    "MAX_DOCS_PER_PATIENT",
    "MEAN_DOCS_PER_PATIENT",
    "MIN_DOCS_PER_PATIENT",
    "PatientRecordSet",
    "RawDocumentText",
    "generate_corpus",
    "load_gold_standard",
    "load_patient_corpus",
]
