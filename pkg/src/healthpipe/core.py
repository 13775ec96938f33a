"""Shared domain vocabulary, parameter validation, and work partitioning.

Everything in this module is a pure function or an immutable value type; the
rest of the package builds on these primitives.
"""

from __future__ import annotations

import enum
import math


class TaskKind(enum.Enum):
    """Prediction task family, inferred from labels or declared by a task builder."""

    BINARY = "binary"
    MULTICLASS = "multiclass"
    MULTILABEL = "multilabel"

    @classmethod
    def from_string(cls, text: str) -> "TaskKind":
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown task kind {text!r}; expected one of "
            f"{[k.value for k in cls]}",
            context=text,
        )


class DataKind(enum.Enum):
    """Input data modality. Only sequence and signal have preprocessing support."""

    SEQUENCE = "sequence"
    IMAGE = "image"
    SIGNAL = "signal"
    TEXT = "text"

    @classmethod
    def from_string(cls, text: str) -> "DataKind":
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown data kind {text!r}; expected one of "
            f"{[k.value for k in cls]}",
            context=text,
        )


class ErrorCode(enum.Enum):
    RANGE_VIOLATION = "RangeViolation"
    TYPE_MISMATCH = "TypeMismatch"
    EMPTY_INPUT = "EmptyInput"
    SCHEMA_VIOLATION = "SchemaViolation"
    UNSUPPORTED_KIND = "UnsupportedKind"


class ValidationError(Exception):
    """Structured input/configuration error.

    Carries a machine-readable ``code`` alongside a message that always names
    the offending parameter, plus the offending value as ``context``.
    """

    def __init__(self, code: ErrorCode, message: str, context: object = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.context = "" if context is None else str(context)

    def __str__(self) -> str:
        return f"{self.code.value}: {self.message}"


def check_parameter(
    value: float,
    low: float,
    high: float,
    name: str,
    *,
    inclusive_low: bool = True,
    inclusive_high: bool = True,
) -> float:
    """Validate that ``value`` lies within the given bounds and return it unchanged.

    Non-finite values (NaN or infinity) are rejected as ``TypeMismatch`` rather
    than ``RangeViolation``: they signal corrupted data, not a bad setting.
    """
    if not name:
        raise ValueError("check_parameter requires a non-empty parameter name")
    if low > high:
        raise ValueError(f"check_parameter bounds inverted for {name!r}: {low} > {high}")
    if not math.isfinite(value):
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"parameter {name!r} must be a finite number, got {value!r}",
            context=value,
        )
    low_ok = value >= low if inclusive_low else value > low
    high_ok = value <= high if inclusive_high else value < high
    if not (low_ok and high_ok):
        lo_b, hi_b = "[" if inclusive_low else "(", "]" if inclusive_high else ")"
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter {name!r} = {value!r} outside {lo_b}{low}, {high}{hi_b}",
            context=value,
        )
    return value


def partition_tasks(n_tasks: int, n_workers: int) -> list[int]:
    """Split ``n_tasks`` units of work into balanced per-worker counts.

    Returns ``min(n_tasks, n_workers)`` counts that sum to ``n_tasks``, differ
    by at most one, and are non-increasing (remainders go to the lowest-indexed
    workers).
    """
    if n_tasks < 1:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'n_tasks' = {n_tasks} outside [1, inf)",
            context=n_tasks,
        )
    if n_workers < 1:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'n_workers' = {n_workers} outside [1, inf)",
            context=n_workers,
        )
    n_slots = min(n_tasks, n_workers)
    base, extra = divmod(n_tasks, n_slots)
    return [base + 1] * extra + [base] * (n_slots - extra)
