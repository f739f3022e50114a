"""Deterministic synthetic patient corpus with aligned gold annotations.

Every draw flows through one ``random.Random(seed)``, and file contents
depend only on (seed, n_patients, noise), so two runs with the same inputs
are byte-identical.  Fact sentences are rendered through the shared
templates in :mod:`medrec.factpatterns`; gold rows are derived from the
same plan that wrote the sentences, never re-extracted from the text.

Layout under ``out_dir``::

    corpus/<patient_id>/r###.txt   record files, 1-3 documents each
    corpus/cohorts.tsv             patient cohort assignments
    gold.tsv                       gold annotations, loader format
    manifest.json                  generation plan, for test oracles

Mention-count discipline:  each gold value of a multi-valued variable is
mentioned 4 times when it is the only value, else twice; distractor values
(noise mode) are mentioned exactly once.  With the support-based confidence
rule this keeps every gold value above the 0.25 readout threshold and every
distractor below it.  Gold dates are attached only to Outcome, Response,
and the diagnosis date; every dated mention of one value reuses that
value's single event date so grounding never splits its clusters.
"""

from __future__ import annotations

import datetime
import json
import random
from dataclasses import dataclass
from pathlib import Path

from medrec.corpus.loader import CancerCohort
from medrec.factpatterns import render_fact
from medrec.ontology import OntologyGraph, load_bundled_ontology
from medrec.preprocess import bundled_gazetteer_path, load_gazetteer
from medrec.validation import check_positive_int
from medrec.variables import ALL_VARIABLES, VariableKind

MIN_DOCS_PER_PATIENT = 5
MAX_DOCS_PER_PATIENT = 75
MEAN_DOCS_PER_PATIENT = 34
MIN_BODY_CHARS = 250

_HEADERS = {
    "pathology": "PATHOLOGY REPORT",
    "lab": "LABORATORY RESULTS",
    "progress": "PROGRESS NOTE",
    "admin": "ADMINISTRATIVE FORM",
    "education": "PATIENT EDUCATION MATERIAL",
}

# Expected classifier output per header, recorded in the manifest so tests
# can check classification without re-deriving it.
_CATEGORIES = {
    "pathology": "Pathology",
    "lab": "LabResults",
    "progress": "SoapNote",
    "admin": "Administrative",
    "education": "Other",
}


@dataclass(frozen=True)
class CohortProfile:
    """Value pools for one cancer cohort.

    Gold pools never contain an ancestor/descendant pair, so any sampled
    subset stays pairwise incompatible and consolidation keeps the values
    apart.  Distractor tuples are disjoint from the cohort's gold pools.
    """

    cohort: CancerCohort
    diagnoses: tuple[tuple[str, str], ...]  # (neoplasm, morphology)
    stagings: tuple[tuple[str, str, str, str], ...]  # (t, n, m, stage group)
    medications: tuple[str, ...]
    surgeries: tuple[str, ...]
    biomarkers: tuple[str, ...]
    procedures: tuple[str, ...]
    med_distractors: tuple[str, str, str]
    surgery_distractors: tuple[str, str, str]
    biomarker_distractors: tuple[str, str, str]
    procedure_distractors: tuple[str, str, str]
    family_history_neoplasm: str


COHORT_PROFILES: tuple[CohortProfile, ...] = (
    CohortProfile(
        cohort=CancerCohort.LUNG,
        diagnoses=(
            ("nsclc", "adenocarcinoma"),
            ("nsclc", "squamous_cell_carcinoma"),
            ("sclc", "small_cell_carcinoma"),
            ("lung_cancer", "large_cell_carcinoma"),
        ),
        stagings=(
            ("t1", "n0", "m0", "stage_ia"),
            ("t2", "n1", "m0", "stage_iia"),
            ("t3", "n2", "m0", "stage_iiia"),
            ("t4", "n2", "m1", "stage_iv"),
        ),
        medications=(
            "cisplatin", "carboplatin", "pemetrexed", "paclitaxel",
            "osimertinib", "crizotinib", "pembrolizumab",
        ),
        surgeries=("lobectomy", "pneumonectomy", "wedge_resection"),
        biomarkers=("egfr", "alk", "ros1", "kras", "pd_l1"),
        procedures=("bronchoscopy", "ct_scan", "pet_scan", "needle_biopsy"),
        med_distractors=("tamoxifen", "fluorouracil", "trastuzumab"),
        surgery_distractors=("prostatectomy", "whipple_procedure", "lymphadenectomy"),
        biomarker_distractors=("her2", "brca1", "msi"),
        procedure_distractors=("colonoscopy", "mammogram", "bone_scan"),
        family_history_neoplasm="breast_cancer",
    ),
    CohortProfile(
        cohort=CancerCohort.BREAST,
        diagnoses=(
            ("breast_cancer", "ductal_carcinoma"),
            ("breast_cancer", "lobular_carcinoma"),
            ("tnbc", "ductal_carcinoma"),
        ),
        stagings=(
            ("t1", "n0", "m0", "stage_ia"),
            ("t2", "n0", "m0", "stage_iia"),
            ("t2", "n1", "m0", "stage_iib"),
            ("t3", "n2", "m0", "stage_iiia"),
        ),
        medications=(
            "docetaxel", "paclitaxel", "trastuzumab", "tamoxifen",
            "letrozole", "anastrozole", "fulvestrant",
        ),
        surgeries=("total_mastectomy", "lumpectomy"),
        biomarkers=(
            "her2", "estrogen_receptor", "progesterone_receptor", "brca1", "brca2",
        ),
        procedures=("mammogram", "ultrasound", "excisional_biopsy", "mri_scan"),
        med_distractors=("cisplatin", "crizotinib", "capecitabine"),
        surgery_distractors=("prostatectomy", "whipple_procedure", "lymphadenectomy"),
        biomarker_distractors=("egfr", "alk", "msi"),
        procedure_distractors=("colonoscopy", "bone_scan", "chest_xray"),
        family_history_neoplasm="lung_cancer",
    ),
    CohortProfile(
        cohort=CancerCohort.COLORECTAL,
        diagnoses=(
            ("colon_cancer", "adenocarcinoma"),
            ("rectal_cancer", "adenocarcinoma"),
            ("colorectal_cancer", "mucinous_adenocarcinoma"),
            ("colon_cancer", "signet_ring_adenocarcinoma"),
        ),
        stagings=(
            ("t1", "n0", "m0", "stage_i"),
            ("t3", "n0", "m0", "stage_iia"),
            ("t3", "n1", "m0", "stage_iiib"),
            ("t4", "n2", "m1", "stage_iv"),
        ),
        medications=(
            "fluorouracil", "capecitabine", "oxaliplatin",
            "irinotecan", "bevacizumab", "cetuximab",
        ),
        surgeries=(
            "hemicolectomy", "low_anterior_resection", "abdominoperineal_resection",
        ),
        biomarkers=("kras", "braf", "msi"),
        procedures=("colonoscopy", "ct_scan", "biopsy"),
        med_distractors=("osimertinib", "letrozole", "nivolumab"),
        surgery_distractors=("prostatectomy", "whipple_procedure", "lymphadenectomy"),
        biomarker_distractors=("her2", "pd_l1", "brca2"),
        procedure_distractors=("mammogram", "bone_scan", "chest_xray"),
        family_history_neoplasm="breast_cancer",
    ),
)

_INTERPRETATIONS = ("interp_positive", "interp_negative")
_METHODS = ("ihc_method", "fish_method", "pcr_method", "ngs_method")

# Filler is cue- and surface-free except where a doc type wants its own
# classification cues reinforced.
_PROGRESS_FILLER = (
    "The patient reports feeling generally well today.",
    "Vital signs were reviewed and remain within expected limits.",
    "No new concerns were raised during the visit.",
    "Follow-up was arranged with the care team.",
    "Sleep quality has improved since the last visit.",
    "Mild fatigue persists but does not limit daily activity.",
    "Hydration and light exercise were encouraged.",
    "Appetite is stable and weight has not changed appreciably.",
)
_PATHOLOGY_FILLER = (
    "The specimen was received intact and processed in routine fashion.",
    "Gross description was recorded at the bench.",
    "Microscopic review was completed without technical issues.",
    "Margins were evaluated according to protocol.",
)
_LAB_FILLER = (
    "Reference range checks passed for the reported assay.",
    "Results were verified by a second reviewer.",
    "Quality control materials performed within limits.",
    "Collection and handling followed the standing procedure manual.",
)
_ADMIN_FILLER = (
    "Administrative review of the account was completed.",
    "Insurance authorization was received for the scheduled services.",
    "Billing codes were reviewed for the prior encounter.",
    "The registration record was updated with current details.",
)
_EDUCATION_FILLER = (
    "This material explains what to expect during routine visits.",
    "Bring a list of questions to each appointment.",
    "Support groups meet weekly at the community center.",
    "Ask the care team before starting any new supplement.",
    "A balanced diet and regular rest support recovery between visits.",
)
_FILLER_BY_TYPE = {
    "pathology": _PATHOLOGY_FILLER,
    "lab": _LAB_FILLER,
    "progress": _PROGRESS_FILLER,
    "admin": _ADMIN_FILLER,
    "education": _EDUCATION_FILLER,
}


def _document_counts(rng: random.Random, n_patients: int) -> list[int]:
    """Uniform draws on [MIN, MAX], nudged so the mean is exactly MEAN."""
    counts = [
        rng.randint(MIN_DOCS_PER_PATIENT, MAX_DOCS_PER_PATIENT)
        for _ in range(n_patients)
    ]
    target = MEAN_DOCS_PER_PATIENT * n_patients
    total = sum(counts)
    while total != target:
        i = rng.randrange(n_patients)
        if total < target and counts[i] < MAX_DOCS_PER_PATIENT:
            counts[i] += 1
            total += 1
        elif total > target and counts[i] > MIN_DOCS_PER_PATIENT:
            counts[i] -= 1
            total -= 1
    return counts


def _pick_values(rng: random.Random, pool: tuple[str, ...], limit: int = 3) -> list[str]:
    count = rng.randint(1, min(limit, len(pool)))
    return rng.sample(list(pool), count)


def _mentions_for(value_count: int) -> int:
    return 4 if value_count == 1 else 2


@dataclass
class _Doc:
    doc_type: str
    sentences: list[str]


class _PatientPlan:
    """Everything drawn for one patient, before text assembly."""

    def __init__(
        self,
        rng: random.Random,
        patient_id: str,
        profile: CohortProfile,
        doc_count: int,
        noise: bool,
        onto: OntologyGraph,
        phi_names: tuple[str, ...],
    ):
        self.patient_id = patient_id
        self.profile = profile
        self.doc_count = doc_count
        self.noise = noise
        self._name = lambda cid: onto.get(cid).preferred_name

        self.neoplasm, self.morphology = rng.choice(profile.diagnoses)
        self.t, self.n, self.m, self.stage_group = rng.choice(profile.stagings)
        self.diagnosis_date = datetime.date(
            2015 + rng.randrange(7), rng.randint(1, 12), rng.randint(1, 28)
        )

        def offset(lo: int, hi: int) -> datetime.date:
            return self.diagnosis_date + datetime.timedelta(days=rng.randint(lo, hi))

        self.medications = [
            (cid, offset(20, 120)) for cid in _pick_values(rng, profile.medications)
        ]
        self.surgeries = [
            (cid, offset(10, 90)) for cid in _pick_values(rng, profile.surgeries)
        ]
        self.procedures = [
            (cid, offset(-10, 5)) for cid in _pick_values(rng, profile.procedures)
        ]
        self.biomarkers = [
            (cid, rng.choice(_INTERPRETATIONS), rng.choice(_METHODS))
            for cid in _pick_values(rng, profile.biomarkers)
        ]
        # Outcome and Response dates must be distinct within the variable:
        # the gold rows are (concept, date) pairs and equal dates would let
        # one predicted cluster satisfy two rows.
        self.outcomes = [
            (cid, offset(150 + 200 * i, 280 + 200 * i))
            for i, cid in enumerate(_pick_values(rng, ("remission", "recurrence", "no_evidence_of_disease"), 2))
        ]
        self.responses = [
            (cid, offset(60 + 150 * i, 140 + 150 * i))
            for i, cid in enumerate(_pick_values(
                rng,
                ("complete_response", "partial_response", "stable_disease", "progressive_disease"),
                2,
            ))
        ]

        if noise:
            self.distractors = {
                VariableKind.MEDICATIONS: profile.med_distractors,
                VariableKind.SURGERIES: profile.surgery_distractors,
                VariableKind.TESTED_BIOMARKERS: profile.biomarker_distractors,
                VariableKind.DIAGNOSTIC_PROCEDURES: profile.procedure_distractors,
                VariableKind.NEOPLASM: (profile.family_history_neoplasm,),
            }
        else:
            self.distractors = {}

        self.phi: list[dict] = []
        self._draw_phi(rng, phi_names)
        self.docs = self._build_docs(rng)

    # ------------------------------------------------------------ sentences

    def _named(self, cid: str) -> str:
        return self._name(cid)

    def _pathology_lines(self) -> list[str]:
        return [
            render_fact(
                "neoplasm_dated",
                neoplasm=self._named(self.neoplasm),
                date=self.diagnosis_date,
            ),
            render_fact("morphology", morphology=self._named(self.morphology)),
            render_fact(
                "staging",
                t=self._named(self.t),
                n=self._named(self.n),
                m=self._named(self.m),
                stage_group=self._named(self.stage_group),
            ),
        ]

    def _mention_lines(
        self, kind: VariableKind, cid: str, date: datetime.date, m: int
    ) -> list[str]:
        name = self._named(cid)
        lines = []
        for i in range(m):
            dated = i % 2 == 0
            if kind is VariableKind.MEDICATIONS:
                lines.append(
                    render_fact("medication_started", medication=name, date=date)
                    if dated
                    else render_fact("medication_current", medication=name)
                )
            elif kind is VariableKind.SURGERIES:
                lines.append(
                    render_fact("surgery_performed", surgery=name, date=date)
                    if dated
                    else render_fact("surgery_recovery", surgery=name)
                )
            elif kind is VariableKind.DIAGNOSTIC_PROCEDURES:
                lines.append(
                    render_fact("procedure_completed", procedure=name, date=date)
                    if dated
                    else render_fact("procedure_findings", procedure=name)
                )
            elif kind is VariableKind.OUTCOME:
                lines.append(render_fact("outcome", outcome=name, date=date))
            elif kind is VariableKind.RESPONSE:
                lines.append(render_fact("response", response=name, date=date))
            else:
                raise ValueError(f"no mention template for {kind}")
        return lines

    def _progress_lines(self) -> list[str]:
        lines = [
            render_fact("neoplasm_assessment", neoplasm=self._named(self.neoplasm))
            for _ in range(2)
        ]
        for kind, values in (
            (VariableKind.MEDICATIONS, self.medications),
            (VariableKind.SURGERIES, self.surgeries),
            (VariableKind.DIAGNOSTIC_PROCEDURES, self.procedures),
            (VariableKind.OUTCOME, self.outcomes),
            (VariableKind.RESPONSE, self.responses),
        ):
            m = _mentions_for(len(values))
            for cid, date in values:
                lines.extend(self._mention_lines(kind, cid, date, m))
        return lines

    def _lab_lines(self) -> list[str]:
        m = _mentions_for(len(self.biomarkers))
        lines = []
        for cid, interp, method in self.biomarkers:
            lines.extend(
                render_fact(
                    "biomarker",
                    biomarker=self._named(cid),
                    interpretation=self._named(interp),
                    method=self._named(method),
                )
                for _ in range(m)
            )
        return lines

    def _distractor_lines(self) -> list[str]:
        if not self.noise:
            return []
        name = self._named
        meds = self.distractors[VariableKind.MEDICATIONS]
        surg = self.distractors[VariableKind.SURGERIES]
        bio = self.distractors[VariableKind.TESTED_BIOMARKERS]
        proc = self.distractors[VariableKind.DIAGNOSTIC_PROCEDURES]
        family = self.distractors[VariableKind.NEOPLASM][0]
        return [
            "Commonly used agents for this condition include "
            f"{name(meds[0])}, {name(meds[1])}, and {name(meds[2])}.",
            "Surgical options discussed at diagnosis included "
            f"{name(surg[0])}, {name(surg[1])}, and {name(surg[2])}.",
            "The standard panel covers "
            f"{name(bio[0])}, {name(bio[1])}, and {name(bio[2])}.",
            "Screening guidance also mentions "
            f"{name(proc[0])}, {name(proc[1])}, and {name(proc[2])}.",
            f"Family history notable for {name(family)} in a first-degree relative.",
        ]

    def _draw_phi(self, rng: random.Random, names: tuple[str, ...]) -> None:
        makers = (
            lambda: ("NAME", f"Seen by Dr. {rng.choice(names)} during this encounter."),
            lambda: (
                "PHONE",
                f"Contact number on file: (555) {rng.randint(100, 999)}-{rng.randint(1000, 9999)}.",
            ),
            lambda: (
                "SSN",
                f"SSN {rng.randint(100, 999):03d}-{rng.randint(10, 99):02d}-{rng.randint(1000, 9999):04d} on file.",
            ),
            lambda: ("MRN", f"MRN {rng.randint(1000000, 9999999)} confirmed at check-in."),
        )
        for _ in range(rng.randint(2, 4)):
            kind, sentence = rng.choice(makers)()
            self.phi.append({"kind": kind, "sentence": sentence})

    # ------------------------------------------------------------ documents

    def _build_docs(self, rng: random.Random) -> list[_Doc]:
        n_lab = 2 if self.doc_count >= 10 else 1
        n_prog = max(2, min(6, self.doc_count - 2 - n_lab))
        n_filler = self.doc_count - 2 - n_lab - n_prog

        docs = [_Doc("pathology", self._pathology_lines()) for _ in range(2)]
        labs = [_Doc("lab", []) for _ in range(n_lab)]
        for i, line in enumerate(self._lab_lines()):
            labs[i % n_lab].sentences.append(line)
        progs = [_Doc("progress", []) for _ in range(n_prog)]
        for i, line in enumerate(self._progress_lines()):
            progs[i % n_prog].sentences.append(line)
        for i, line in enumerate(self._distractor_lines()):
            progs[(i + 1) % n_prog].sentences.append(line)
        docs.extend(labs)
        docs.extend(progs)

        filler_cycle = ("progress", "admin", "education")
        for i in range(n_filler):
            docs.append(_Doc(filler_cycle[i % 3], []))

        for entry in self.phi:
            rng.choice(docs).sentences.append(entry["sentence"])

        rng.shuffle(docs)
        return docs


def _doc_text(doc: _Doc, pad_from: int) -> str:
    """Header line plus body, padded with type-appropriate filler."""
    filler = _FILLER_BY_TYPE[doc.doc_type]
    sentences = list(doc.sentences)
    i = pad_from
    while sum(len(s) for s in sentences) + max(0, len(sentences) - 1) < MIN_BODY_CHARS:
        sentences.append(filler[i % len(filler)])
        i += 1
    return f"{_HEADERS[doc.doc_type]}\n" + " ".join(sentences) + "\n"


def _gold_rows(plan: _PatientPlan) -> list[tuple]:
    pid = plan.patient_id
    rows: list[tuple] = [
        (pid, VariableKind.NEOPLASM, f"concept:{plan.neoplasm}", "", ""),
        (pid, VariableKind.MORPHOLOGY, f"concept:{plan.morphology}", "", ""),
        (pid, VariableKind.T_STAGE, f"concept:{plan.t}", "", ""),
        (pid, VariableKind.N_STAGE, f"concept:{plan.n}", "", ""),
        (pid, VariableKind.M_STAGE, f"concept:{plan.m}", "", ""),
        (pid, VariableKind.STAGE_GROUP, f"concept:{plan.stage_group}", "", ""),
        (
            pid,
            VariableKind.CANCER_DIAGNOSIS_DATE,
            f"lit:{plan.diagnosis_date.isoformat()}",
            plan.diagnosis_date.isoformat(),
            "",
        ),
    ]
    for cid, _ in plan.medications:
        rows.append((pid, VariableKind.MEDICATIONS, f"concept:{cid}", "", ""))
    for cid, _ in plan.surgeries:
        rows.append((pid, VariableKind.SURGERIES, f"concept:{cid}", "", ""))
    for cid, _ in plan.procedures:
        rows.append((pid, VariableKind.DIAGNOSTIC_PROCEDURES, f"concept:{cid}", "", ""))
    for cid, _interp, _method in plan.biomarkers:
        rows.append((pid, VariableKind.TESTED_BIOMARKERS, f"concept:{cid}", "", ""))
    for cid, date in plan.outcomes:
        rows.append((pid, VariableKind.OUTCOME, f"concept:{cid}", date.isoformat(), ""))
    for cid, date in plan.responses:
        rows.append((pid, VariableKind.RESPONSE, f"concept:{cid}", date.isoformat(), ""))

    order = {kind: i for i, kind in enumerate(ALL_VARIABLES)}
    rows.sort(key=lambda r: (r[0], order[r[1]], r[2]))
    return rows


def _fact_manifest(plan: _PatientPlan) -> dict:
    facts: dict[str, list] = {kind.label: [] for kind in ALL_VARIABLES}
    for kind, cid, m in (
        (VariableKind.NEOPLASM, plan.neoplasm, 4),
        (VariableKind.MORPHOLOGY, plan.morphology, 2),
        (VariableKind.T_STAGE, plan.t, 2),
        (VariableKind.N_STAGE, plan.n, 2),
        (VariableKind.M_STAGE, plan.m, 2),
        (VariableKind.STAGE_GROUP, plan.stage_group, 2),
    ):
        facts[kind.label].append({"concept": cid, "mentions": m, "date": None})
    for kind, values in (
        (VariableKind.MEDICATIONS, plan.medications),
        (VariableKind.SURGERIES, plan.surgeries),
        (VariableKind.DIAGNOSTIC_PROCEDURES, plan.procedures),
    ):
        m = _mentions_for(len(values))
        for cid, date in values:
            facts[kind.label].append(
                {"concept": cid, "mentions": m, "date": date.isoformat()}
            )
    m = _mentions_for(len(plan.biomarkers))
    for cid, interp, method in plan.biomarkers:
        facts[VariableKind.TESTED_BIOMARKERS.label].append(
            {"concept": cid, "mentions": m, "date": None,
             "interpretation": interp, "method": method}
        )
    for kind, values in (
        (VariableKind.OUTCOME, plan.outcomes),
        (VariableKind.RESPONSE, plan.responses),
    ):
        m = _mentions_for(len(values))
        for cid, date in values:
            facts[kind.label].append(
                {"concept": cid, "mentions": m, "date": date.isoformat()}
            )
    facts[VariableKind.CANCER_DIAGNOSIS_DATE.label].append(
        {"literal": plan.diagnosis_date.isoformat()}
    )
    return facts


def generate_corpus(
    out_dir: str | Path,
    *,
    seed: int,
    n_patients: int,
    noise: bool = True,
    ontology: OntologyGraph | None = None,
) -> dict:
    """Write a synthetic corpus under ``out_dir`` and return its manifest."""
    check_positive_int(n_patients, "n_patients")
    onto = ontology if ontology is not None else load_bundled_ontology()
    phi_names = tuple(sorted(load_gazetteer(bundled_gazetteer_path())))

    out = Path(out_dir)
    corpus_root = out / "corpus"
    corpus_root.mkdir(parents=True, exist_ok=True)

    rng = random.Random(seed)
    counts = _document_counts(rng, n_patients)

    manifest: dict = {
        "schema_version": 1,
        "seed": seed,
        "n_patients": n_patients,
        "noise": noise,
        "total_documents": sum(counts),
        "patients": {},
    }
    gold_rows: list[tuple] = []
    cohort_lines: list[str] = []

    for i in range(n_patients):
        pid = f"p{i:03d}"
        profile = COHORT_PROFILES[i % len(COHORT_PROFILES)]
        plan = _PatientPlan(rng, pid, profile, counts[i], noise, onto, phi_names)

        patient_dir = corpus_root / pid
        patient_dir.mkdir(exist_ok=True)

        records = []
        doc_index = 0
        record_index = 0
        pad_from = rng.randrange(8)
        while doc_index < len(plan.docs):
            take = min(rng.randint(1, 3), len(plan.docs) - doc_index)
            chunk = plan.docs[doc_index : doc_index + take]
            doc_index += take

            doc_entries = []
            offset = 0
            parts = []
            for doc in chunk:
                text = _doc_text(doc, pad_from)
                pad_from += 1
                doc_entries.append(
                    {
                        "header": _HEADERS[doc.doc_type],
                        "category": _CATEGORIES[doc.doc_type],
                        "offset": offset,
                        "length": len(text),
                    }
                )
                parts.append(text)
                offset += len(text)
            file_name = f"r{record_index:03d}.txt"
            (patient_dir / file_name).write_text("".join(parts), encoding="utf-8")
            records.append({"file": file_name, "documents": doc_entries})
            record_index += 1

        manifest["patients"][pid] = {
            "cohort": profile.cohort.value,
            "document_count": counts[i],
            "diagnosis_date": plan.diagnosis_date.isoformat(),
            "records": records,
            "facts": _fact_manifest(plan),
            "distractors": {
                kind.label: list(values) for kind, values in plan.distractors.items()
            },
            "phi": plan.phi,
        }
        gold_rows.extend(_gold_rows(plan))
        cohort_lines.append(f"{pid}\t{profile.cohort.value}")

    (corpus_root / "cohorts.tsv").write_text(
        "\n".join(cohort_lines) + "\n", encoding="utf-8"
    )
    gold_text = "\n".join(
        "\t".join((r[0], r[1].label, r[2], r[3], r[4])).rstrip("\t") for r in gold_rows
    )
    (out / "gold.tsv").write_text(gold_text + "\n", encoding="utf-8")
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
