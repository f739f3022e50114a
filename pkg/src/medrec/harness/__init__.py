from medrec.harness.metrics import (
    MatchCounts,
    VariableMetrics,
    compute_metrics,
    harmonic_mean,
    macro_average,
    match_patient,
    match_variable,
    metrics_table,
    sum_counts,
    value_matches,
)
from medrec.harness.pipeline import (
    PatientFailure,
    RunConfig,
    RunResult,
    SetupKind,
    preprocess_records,
    reason_documents,
    run_setup,
)
from medrec.harness.report import (
    EvalReport,
    emit_report,
    format_table,
    load_report,
    report_payload,
)
from medrec.harness.tables import (
    CELL_TOLERANCE,
    MACRO_TOLERANCE,
    CellCheck,
    MacroCheck,
    bundled_tables_path,
    load_tables,
    verify_tables,
)

__all__ = [
    "CELL_TOLERANCE",
    "CellCheck",
    "EvalReport",
    "MACRO_TOLERANCE",
    "MacroCheck",
    "MatchCounts",
    "PatientFailure",
    "RunConfig",
    "RunResult",
    "SetupKind",
    "VariableMetrics",
    "bundled_tables_path",
    "compute_metrics",
    "emit_report",
    "format_table",
    "harmonic_mean",
    "load_report",
    "load_tables",
    "macro_average",
    "match_patient",
    "match_variable",
    "metrics_table",
    "preprocess_records",
    "reason_documents",
    "report_payload",
    "run_setup",
    "sum_counts",
    "value_matches",
    "verify_tables",
]
