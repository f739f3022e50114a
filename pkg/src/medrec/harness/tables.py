"""Published-benchmark consistency checks.

The bundled tables file carries per-(setup, model, variable) precision,
recall, and F1 plus the four generation-mode macro averages.  The oracle
recomputes each F1 as the harmonic mean of the row's P and R, rounds to
two decimals, and accepts the cell when it lands within ``CELL_TOLERANCE``
of the published value; macro averages must agree within
``MACRO_TOLERANCE``.  The slack absorbs the publication's own rounding,
which is why several cells sit exactly on the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from medrec.harness.metrics import harmonic_mean

CELL_TOLERANCE = 0.05
MACRO_TOLERANCE = 0.01
_EPS = 1e-9  # keeps boundary cells from failing on float representation


def bundled_tables_path() -> Path:
    return Path(__file__).parent.parent / "data" / "benchmark_tables.json"


def load_tables(path: str | Path | None = None) -> dict:
    tables = json.loads(Path(path or bundled_tables_path()).read_text(encoding="utf-8"))
    n_vars = len(tables["variables"])
    for row in tables["rows"]:
        for column in ("precision", "recall", "f1"):
            if len(row[column]) != n_vars:
                raise ValueError(
                    f"row {row['setup']}/{row['llm']}: {column} has "
                    f"{len(row[column])} cells, expected {n_vars}"
                )
    return tables


@dataclass(frozen=True)
class CellCheck:
    setup: str
    llm: str | None
    variable: str
    precision: float
    recall: float
    reported_f1: float
    recomputed_f1: float

    @property
    def delta(self) -> float:
        return abs(self.recomputed_f1 - self.reported_f1)

    @property
    def ok(self) -> bool:
        return self.delta <= CELL_TOLERANCE + _EPS


@dataclass(frozen=True)
class MacroCheck:
    setup: str
    llm: str
    reported: float
    recomputed: float

    @property
    def delta(self) -> float:
        return abs(self.recomputed - self.reported)

    @property
    def ok(self) -> bool:
        return self.delta <= MACRO_TOLERANCE + _EPS


def verify_tables(
    tables: dict | None = None,
) -> tuple[list[CellCheck], list[MacroCheck]]:
    """Recompute every F1 cell and every pinned macro average."""
    tables = tables if tables is not None else load_tables()
    cells = []
    for row in tables["rows"]:
        for i, variable in enumerate(tables["variables"]):
            p, r = row["precision"][i], row["recall"][i]
            cells.append(
                CellCheck(
                    setup=row["setup"],
                    llm=row["llm"],
                    variable=variable,
                    precision=p,
                    recall=r,
                    reported_f1=row["f1"][i],
                    recomputed_f1=round(harmonic_mean(p, r), 2),
                )
            )

    by_key = {(row["setup"], row["llm"]): row for row in tables["rows"]}
    macros = []
    for setup, per_llm in tables.get("macro_f1", {}).items():
        for llm, reported in per_llm.items():
            row = by_key[(setup, llm)]
            recomputed = sum(row["f1"]) / len(row["f1"])
            macros.append(MacroCheck(setup, llm, reported, recomputed))
    return cells, macros
