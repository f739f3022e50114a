"""Neuro-symbolic abstraction of cancer variables from clinical text."""

from medrec.variables import ALL_VARIABLES, VariableKind, variable_from_label

__version__ = "0.1.0"

__all__ = [
    "ALL_VARIABLES",
    "VariableKind",
    "variable_from_label",
    "__version__",
]
