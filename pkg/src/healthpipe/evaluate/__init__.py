"""Evaluation: task inference from labels, per-task metric sets, k-fold CV."""

from healthpipe.evaluate.crossval import CrossValidationReport, FoldFailure, cross_validate
from healthpipe.evaluate.metrics import (
    DegenerateLabels,
    accuracy,
    auprc,
    auroc,
    f1,
    is_degenerate,
    label_check,
    micro_f1,
    precision,
    recall,
    top1_accuracy,
)
from healthpipe.evaluate.report import REPORT_FORMAT_VERSION, MetricReport, evaluate

__all__ = [
    "REPORT_FORMAT_VERSION",
    "CrossValidationReport",
    "DegenerateLabels",
    "FoldFailure",
    "MetricReport",
    "accuracy",
    "auprc",
    "auroc",
    "cross_validate",
    "evaluate",
    "f1",
    "is_degenerate",
    "label_check",
    "micro_f1",
    "precision",
    "recall",
    "top1_accuracy",
]
