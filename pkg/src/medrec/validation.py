"""Input validation helpers shared by the estimator classes.

These mirror the small checks scikit-learn estimators do on entry to
``fit`` and ``transform``: fail early, name the offending parameter, and
return the validated value so call sites stay one-liners.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from numbers import Integral, Real


def check_text(value, name="text"):
    """Require a str and return it."""
    if not isinstance(value, str):
        raise TypeError(f"{name} must be a str, got {type(value).__name__}")
    return value


def check_positive_int(value, name, minimum=1):
    """Require an integer >= minimum (bool excluded) and return it as int."""
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise TypeError(f"{name} must be an int, got {type(value).__name__}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_fraction(value, name, low=0.0, high=1.0):
    """Require a real number in [low, high] and return it as float."""
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TypeError(f"{name} must be a number, got {type(value).__name__}")
    value = float(value)
    if not (low <= value <= high):
        raise ValueError(f"{name} must be in [{low}, {high}], got {value}")
    return value


def check_choice(value, name, choices):
    """Require membership in choices and return the value."""
    if value not in choices:
        allowed = ", ".join(repr(c) for c in choices)
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")
    return value


def check_sequence(value, name, item_type=None):
    """Require a non-string sequence, optionally of a uniform item type."""
    if isinstance(value, (str, bytes)) or not isinstance(value, Sequence):
        raise TypeError(f"{name} must be a sequence, got {type(value).__name__}")
    if item_type is not None:
        for i, item in enumerate(value):
            if not isinstance(item, item_type):
                raise TypeError(
                    f"{name}[{i}] must be {item_type.__name__}, "
                    f"got {type(item).__name__}"
                )
    return value


def check_unique(values, name):
    """Require all items hashable-unique; return them unchanged."""
    seen = set()
    for item in values:
        if item in seen:
            raise ValueError(f"{name} contains duplicate entry {item!r}")
        seen.add(item)
    return values


def ensure_iterable_of_str(value, name):
    """Accept a lone str or an iterable of str; return a list of str."""
    if isinstance(value, str):
        return [value]
    if isinstance(value, Iterable):
        out = list(value)
        for i, item in enumerate(out):
            if not isinstance(item, str):
                raise TypeError(
                    f"{name}[{i}] must be str, got {type(item).__name__}"
                )
        return out
    raise TypeError(f"{name} must be a str or an iterable of str")
