"""Canonical clinical fact sentences: one table of templates with their
inverse regexes.

The synthetic corpus writer renders these templates and the mock text
generator scans for them, so the two sides stay aligned by construction.
Every pattern round-trips: scanning a rendered sentence recovers the
template name and field values exactly.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass

_DATE = r"\d{4}-\d{2}-\d{2}"
_T = r"[cp]?T[0-4Xx][ab]?"
_N = r"[cp]?N[0-3Xx]"
_M = r"[cp]?M[01Xx][ab]?"
_SG = r"Stage [0IV]+[ABC]?"


@dataclass(frozen=True)
class FactPattern:
    name: str
    template: str
    pattern: re.Pattern


def _fp(name: str, template: str, pattern: str) -> FactPattern:
    return FactPattern(name, template, re.compile(pattern))


FACT_PATTERNS: dict[str, FactPattern] = {
    p.name: p
    for p in [
        _fp(
            "neoplasm_dated",
            "Pathologic diagnosis of {neoplasm} established on {date}.",
            rf"Pathologic diagnosis of (?P<neoplasm>[^.]+?) "
            rf"established on (?P<date>{_DATE})\.",
        ),
        _fp(
            "neoplasm_assessment",
            "Assessment: {neoplasm}, under active management.",
            r"Assessment: (?P<neoplasm>[^,]+), under active management\.",
        ),
        _fp(
            "morphology",
            "Histologic examination shows {morphology}.",
            r"Histologic examination shows (?P<morphology>[^.]+)\.",
        ),
        _fp(
            "staging",
            "Staging assessment: {t} {n} {m}, stage group {stage_group}.",
            rf"Staging assessment: (?P<t>{_T}) (?P<n>{_N}) (?P<m>{_M}), "
            rf"stage group (?P<stage_group>{_SG})\.",
        ),
        _fp(
            "medication_started",
            "Oncology medication {medication} was started on {date}.",
            rf"Oncology medication (?P<medication>[^.]+?) "
            rf"was started on (?P<date>{_DATE})\.",
        ),
        _fp(
            "medication_current",
            "Current regimen includes {medication}.",
            r"Current regimen includes (?P<medication>[^.]+)\.",
        ),
        _fp(
            "surgery_performed",
            "The patient underwent surgery: {surgery} performed on {date}.",
            rf"The patient underwent surgery: (?P<surgery>[^.]+?) "
            rf"performed on (?P<date>{_DATE})\.",
        ),
        _fp(
            "surgery_recovery",
            "Recovery following {surgery} proceeding well.",
            r"Recovery following (?P<surgery>[^.]+?) proceeding well\.",
        ),
        _fp(
            "outcome",
            "Clinical outcome assessment: {outcome}, documented {date}.",
            rf"Clinical outcome assessment: (?P<outcome>[^,]+), "
            rf"documented (?P<date>{_DATE})\.",
        ),
        _fp(
            "response",
            "Response to treatment: {response}, assessed {date}.",
            rf"Response to treatment: (?P<response>[^,]+), "
            rf"assessed (?P<date>{_DATE})\.",
        ),
        _fp(
            "biomarker",
            "Biomarker {biomarker} returned {interpretation} by {method}.",
            r"Biomarker (?P<biomarker>[^.]+?) returned "
            r"(?P<interpretation>[^.]+?) by (?P<method>[^.]+?)\.",
        ),
        _fp(
            "procedure_completed",
            "Diagnostic procedure {procedure} was completed on {date}.",
            rf"Diagnostic procedure (?P<procedure>[^.]+?) "
            rf"was completed on (?P<date>{_DATE})\.",
        ),
        _fp(
            "procedure_findings",
            "Findings from {procedure} reviewed.",
            r"Findings from (?P<procedure>[^.]+?) reviewed\.",
        ),
    ]
}


@dataclass(frozen=True)
class Fact:
    name: str
    fields: tuple[tuple[str, str], ...]
    span: tuple[int, int]

    def get(self, field: str) -> str | None:
        return dict(self.fields).get(field)


def render_fact(name: str, **fields) -> str:
    """Render the named template; dates may be date objects or ISO strings."""
    pattern = FACT_PATTERNS[name]
    rendered = {
        key: value.isoformat() if isinstance(value, datetime.date) else str(value)
        for key, value in fields.items()
    }
    try:
        return pattern.template.format(**rendered)
    except KeyError as exc:
        raise ValueError(f"template {name!r} missing field {exc}") from None


def scan_facts(text: str, names=None) -> list[Fact]:
    """All template matches in text, in order of appearance."""
    selected = FACT_PATTERNS if names is None else {n: FACT_PATTERNS[n] for n in names}
    found = []
    for pattern in selected.values():
        for m in pattern.pattern.finditer(text):
            found.append(
                Fact(
                    pattern.name,
                    tuple(sorted(m.groupdict().items())),
                    m.span(),
                )
            )
    found.sort(key=lambda f: (f.span, f.name))
    return found
