import datetime

import pytest

from medrec.factpatterns import FACT_PATTERNS, Fact, render_fact, scan_facts

SAMPLE_FIELDS = {
    "neoplasm_dated": {"neoplasm": "lung cancer", "date": "2019-03-04"},
    "neoplasm_assessment": {"neoplasm": "breast cancer"},
    "morphology": {"morphology": "adenocarcinoma"},
    "staging": {"t": "T2", "n": "N1", "m": "M0", "stage_group": "Stage IIA"},
    "medication_started": {"medication": "cisplatin", "date": "2019-04-01"},
    "medication_current": {"medication": "pembrolizumab"},
    "surgery_performed": {"surgery": "lobectomy", "date": "2020-01-15"},
    "surgery_recovery": {"surgery": "mastectomy"},
    "outcome": {"outcome": "remission", "date": "2020-08-01"},
    "response": {"response": "partial response", "date": "2020-05-01"},
    "biomarker": {"biomarker": "EGFR", "interpretation": "positive", "method": "IHC"},
    "procedure_completed": {"procedure": "bronchoscopy", "date": "2019-02-20"},
    "procedure_findings": {"procedure": "colonoscopy"},
}


def test_every_template_has_sample():
    assert set(SAMPLE_FIELDS) == set(FACT_PATTERNS)


@pytest.mark.parametrize("name", sorted(FACT_PATTERNS))
def test_round_trip(name):
    fields = SAMPLE_FIELDS[name]
    sentence = render_fact(name, **fields)
    facts = scan_facts(sentence)
    assert len(facts) == 1
    fact = facts[0]
    assert fact.name == name
    assert dict(fact.fields) == fields
    assert fact.span == (0, len(sentence))


def test_render_accepts_date_objects():
    sentence = render_fact(
        "outcome", outcome="remission", date=datetime.date(2020, 8, 1)
    )
    assert "2020-08-01" in sentence


def test_render_rejects_missing_field():
    with pytest.raises(ValueError, match="missing field"):
        render_fact("outcome", outcome="remission")


def test_scan_orders_by_position():
    text = " ".join(
        render_fact(name, **SAMPLE_FIELDS[name]) for name in sorted(FACT_PATTERNS)
    )
    facts = scan_facts(text)
    assert len(facts) == len(FACT_PATTERNS)
    assert [f.span for f in facts] == sorted(f.span for f in facts)
    assert {f.name for f in facts} == set(FACT_PATTERNS)


def test_scan_subset_of_names():
    text = (
        render_fact("medication_current", medication="cisplatin")
        + " "
        + render_fact("morphology", morphology="adenocarcinoma")
    )
    facts = scan_facts(text, names=["medication_current"])
    assert [f.name for f in facts] == ["medication_current"]


def test_plain_prose_matches_nothing():
    text = (
        "The patient was seen in clinic today and reports feeling well. "
        "Vital signs stable. Follow-up in three months was arranged."
    )
    assert scan_facts(text) == []


def test_fact_get_helper():
    fact = scan_facts(render_fact("morphology", morphology="ductal carcinoma"))[0]
    assert fact.get("morphology") == "ductal carcinoma"
    assert fact.get("absent") is None
