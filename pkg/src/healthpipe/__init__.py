"""healthpipe: an end-to-end predictive-health pipeline toolkit.

Three modules cover the pipeline: validating data preprocessing into
train/valid/test experiment datasets, a unified-API model zoo with
checkpoint-based best-model selection, and a task-inferring evaluator.
A CLI (``healthpipe``) runs complete experiments from clinical event CSVs.
"""

__version__ = "0.1.0"

from healthpipe.core import (
    DataKind,
    ErrorCode,
    TaskKind,
    ValidationError,
    check_parameter,
    partition_tasks,
)

__all__ = [
    "DataKind",
    "ErrorCode",
    "TaskKind",
    "ValidationError",
    "check_parameter",
    "partition_tasks",
    "__version__",
]
