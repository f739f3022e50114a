"""Report assembly: one JSON document per run plus a readable table.

The metrics payload is a pure function of (corpus, config, predictions);
wall-clock details live only under ``metadata`` so two identical runs
differ in nothing else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from medrec.harness.metrics import VariableMetrics
from medrec.reasoning import VariableReadout
from medrec.variables import ALL_VARIABLES

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EvalReport:
    setup: str
    variables: tuple[VariableMetrics, ...]
    macro_f1: float
    config: dict
    patients_evaluated: int
    failures: tuple[tuple[str, str], ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        kinds = tuple(row.variable for row in self.variables)
        if kinds != ALL_VARIABLES:
            raise ValueError(
                "report needs one row per variable in canonical order; "
                f"got {[k.value for k in kinds]}"
            )


def report_payload(report: EvalReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "setup": report.setup,
        "config": report.config,
        "variables": [
            {
                "variable": row.variable.label,
                "tp": row.tp,
                "fp": row.fp,
                "fn": row.fn,
                "precision": row.precision,
                "recall": row.recall,
                "f1": row.f1,
            }
            for row in report.variables
        ],
        "macro_f1": report.macro_f1,
        "patients": {
            "evaluated": report.patients_evaluated,
            "failures": [
                {"patient_id": pid, "error": error} for pid, error in report.failures
            ],
        },
        "metadata": dict(report.metadata),
    }


def format_table(report: EvalReport) -> str:
    """Fixed-width per-variable table, percentages to two decimals."""
    width = max(len(row.variable.label) for row in report.variables)
    lines = [
        f"setup: {report.setup}",
        f"{'variable':<{width}}  {'precision':>9}  {'recall':>9}  {'f1':>9}",
    ]
    for row in report.variables:
        lines.append(
            f"{row.variable.label:<{width}}  {100 * row.precision:>9.2f}"
            f"  {100 * row.recall:>9.2f}  {100 * row.f1:>9.2f}"
        )
    lines.append(f"{'macro F1':<{width}}  {'':>9}  {'':>9}  {100 * report.macro_f1:>9.2f}")
    if report.failures:
        lines.append(f"failed patients: {len(report.failures)}")
    return "\n".join(lines) + "\n"


def readout_payload(readout: VariableReadout) -> dict:
    return {
        kind.label: [
            {
                "value": v.value,
                "is_literal": v.is_literal,
                "date": v.date.isoformat() if v.date else None,
                "qualifier": v.qualifier,
                "confidence": v.confidence,
            }
            # stored as a frozenset; sort so emission is byte-stable
            for v in sorted(
                readout.values[kind], key=lambda v: (v.value, str(v.date))
            )
        ]
        for kind in ALL_VARIABLES
    }


def emit_report(
    report: EvalReport,
    out_dir: str | Path,
    *,
    readouts: dict[str, VariableReadout] | None = None,
) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    paths = {"report": out / "report.json", "table": out / "report.txt"}
    paths["report"].write_text(
        json.dumps(report_payload(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    paths["table"].write_text(format_table(report), encoding="utf-8")

    if readouts is not None:
        paths["predictions"] = out / "predictions.json"
        payload = {pid: readout_payload(readouts[pid]) for pid in sorted(readouts)}
        paths["predictions"].write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return paths


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
