"""Prediction results: the in-memory bundle and its jsonl file format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.fsutil import atomic_write_text


@dataclass(eq=False)
class ResultsBundle:
    """Aligned rows of ids, true labels, and predicted probabilities."""

    ids: list[str]
    y: np.ndarray
    hat_y: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        self.hat_y = np.asarray(self.hat_y, dtype=np.float64)
        if not (len(self.ids) == self.y.shape[0] == self.hat_y.shape[0]):
            raise ValidationError(
                ErrorCode.TYPE_MISMATCH,
                f"results rows disagree: {len(self.ids)} ids, {self.y.shape[0]} labels, "
                f"{self.hat_y.shape[0]} scores",
            )
        if self.y.shape != self.hat_y.shape:
            raise ValidationError(
                ErrorCode.TYPE_MISMATCH,
                f"labels shape {tuple(self.y.shape)} != scores shape {tuple(self.hat_y.shape)}",
            )

    def __getitem__(self, key: str):
        # dictionary-style access mirrors the fit/inference calling idiom
        if key in ("ids", "y", "hat_y"):
            return getattr(self, key)
        raise KeyError(key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResultsBundle):
            return NotImplemented
        return (
            self.ids == other.ids
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.hat_y, other.hat_y)
        )

    def __len__(self) -> int:
        return len(self.ids)


def write_results(path: Path | str, bundle: ResultsBundle) -> Path:
    """One line per example: {"id", "y", "hat_y"}; floats keep full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, example_id in enumerate(bundle.ids):
        record = {
            "id": example_id,
            "y": [int(v) for v in bundle.y[i]],
            "hat_y": [float(v) for v in bundle.hat_y[i]],
        }
        lines.append(json.dumps(record, separators=(",", ":")))
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return path


def read_results(path: Path | str) -> ResultsBundle:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"no results file at {path}", context=str(path)
        )
    ids: list[str] = []
    ys: list[list[float]] = []
    hats: list[list[float]] = []
    with path.open(encoding="utf-8") as handle:
        for line_num, line in enumerate(handle, start=1):
            if line.strip() == "":
                continue
            try:
                record = json.loads(line)
                ids.append(str(record["id"]))
                ys.append([float(v) for v in record["y"]])
                hats.append([float(v) for v in record["hat_y"]])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(
                    ErrorCode.SCHEMA_VIOLATION,
                    f"corrupted results in {path} line {line_num}: {exc}",
                    context=str(path),
                ) from exc
    if not ids:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, f"results file {path} is empty", context=str(path)
        )
    return ResultsBundle(ids=ids, y=np.array(ys), hat_y=np.array(hats))
