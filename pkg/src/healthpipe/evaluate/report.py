"""Task-inferring evaluation and the metric report format.

Metric sets per task kind:
  binary      accuracy, precision, recall, f1, auroc, auprc
  multiclass  accuracy (top-1), macro_f1, macro_auroc
  multilabel  micro_f1, macro_f1, macro_auroc, macro_auprc

Degenerate (single-class) label columns are skipped from macro averages and
counted in skipped_columns; a degenerate binary problem keeps its thresholded
metrics but omits auroc/auprc. Only when every column is degenerate is there
nothing left to average, which raises DegenerateLabels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from healthpipe.core import ErrorCode, TaskKind, ValidationError
from healthpipe.evaluate.metrics import (
    DegenerateLabels,
    _as_label_matrix,
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

REPORT_FORMAT_VERSION = 1


@dataclass
class MetricReport:
    task: TaskKind
    n: int
    metrics: dict[str, float] = field(default_factory=dict)
    skipped_columns: int = 0

    def to_json(self) -> str:
        payload = {
            "task": self.task.value,
            "n": self.n,
            "metrics": self.metrics,
            "skipped_columns": self.skipped_columns,
            "format_version": REPORT_FORMAT_VERSION,
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MetricReport":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION, f"corrupted metric report: {exc}"
            ) from exc
        version = payload.get("format_version")
        if version != REPORT_FORMAT_VERSION:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"unknown report format_version {version!r}; "
                f"supported versions: [{REPORT_FORMAT_VERSION}]",
            )
        return cls(
            task=TaskKind.from_string(payload["task"]),
            n=int(payload["n"]),
            metrics={k: float(v) for k, v in payload["metrics"].items()},
            skipped_columns=int(payload["skipped_columns"]),
        )

    def format_lines(self) -> list[str]:
        """Human-readable summary, 6 decimal places."""
        lines = [f"task={self.task.value} n={self.n}"]
        for name, value in self.metrics.items():
            lines.append(f"{name}={value:.6f}")
        if self.skipped_columns:
            lines.append(f"skipped_columns={self.skipped_columns}")
        return lines


def _check_scores(hat_y: np.ndarray, y: np.ndarray) -> None:
    if hat_y.shape != y.shape:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"scores shape {tuple(hat_y.shape)} != labels shape {tuple(y.shape)}",
        )
    if np.any(hat_y < 0.0) or np.any(hat_y > 1.0):
        bad = hat_y[(hat_y < 0.0) | (hat_y > 1.0)].flat[0]
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"scores must lie in [0, 1], found {bad!r}",
        )


def _macro(values: list[float]) -> float:
    return float(np.mean(values))


def evaluate(hat_y, y) -> MetricReport:
    """Infer the task from y, compute that task's metric set."""
    y = _as_label_matrix(y)
    hat_y = np.asarray(hat_y, dtype=np.float64)
    if hat_y.ndim == 1:
        hat_y = hat_y.reshape(-1, 1)
    _check_scores(hat_y, y)

    task = label_check(y)
    n, d = y.shape
    report = MetricReport(task=task, n=n)

    if task is TaskKind.BINARY:
        s, t = hat_y[:, 0], y[:, 0]
        report.metrics["accuracy"] = accuracy(s, t)
        report.metrics["precision"] = precision(s, t)
        report.metrics["recall"] = recall(s, t)
        report.metrics["f1"] = f1(s, t)
        if is_degenerate(t):
            report.skipped_columns = 1
        else:
            report.metrics["auroc"] = auroc(s, t)
            report.metrics["auprc"] = auprc(s, t)
        return report

    usable = [c for c in range(d) if not is_degenerate(y[:, c])]
    report.skipped_columns = d - len(usable)
    if not usable:
        raise DegenerateLabels(
            f"all {d} label columns are single-class; no macro metric is defined"
        )

    if task is TaskKind.MULTICLASS:
        report.metrics["accuracy"] = top1_accuracy(hat_y, y)
        # macro-F1 scores the argmax prediction one class at a time
        pred = np.zeros_like(hat_y)
        pred[np.arange(n), hat_y.argmax(axis=1)] = 1.0
        report.metrics["macro_f1"] = _macro([f1(pred[:, c], y[:, c]) for c in usable])
        report.metrics["macro_auroc"] = _macro([auroc(hat_y[:, c], y[:, c]) for c in usable])
        return report

    report.metrics["micro_f1"] = micro_f1(hat_y, y)
    report.metrics["macro_f1"] = _macro([f1(hat_y[:, c], y[:, c]) for c in usable])
    report.metrics["macro_auroc"] = _macro([auroc(hat_y[:, c], y[:, c]) for c in usable])
    report.metrics["macro_auprc"] = _macro([auprc(hat_y[:, c], y[:, c]) for c in usable])
    return report
