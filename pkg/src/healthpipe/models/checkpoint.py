"""Checkpoint files and best-epoch selection.

One file per epoch at <dir>/epoch_<k>.ckpt:

    line 1          JSON header: format_version, epoch, valid_score,
                    valid_metric_name, config_digest, model (reconstruction
                    metadata: kind, dims, task)
    then per param  JSON line {"name", "shape"} followed by one line of
                    space-separated floats in shortest round-trip text form

Text floats round-trip exactly, so save/load is lossless and checkpoint
bytes are a pure function of (parameters, score, header fields).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.fsutil import atomic_write_text

CKPT_FORMAT_VERSION = 1
_CKPT_NAME = re.compile(r"epoch_(\d+)\.ckpt$")


@dataclass
class Checkpoint:
    epoch: int
    valid_score: float
    valid_metric_name: str
    config_digest: str
    model_meta: dict
    params: list  # (name, float64 array) pairs, model order


def checkpoint_path(directory: Path | str, epoch: int) -> Path:
    return Path(directory) / f"epoch_{epoch}.ckpt"


def write_checkpoint(directory: Path | str, ckpt: Checkpoint) -> Path:
    header = {
        "format_version": CKPT_FORMAT_VERSION,
        "epoch": ckpt.epoch,
        "valid_score": ckpt.valid_score,
        "valid_metric_name": ckpt.valid_metric_name,
        "config_digest": ckpt.config_digest,
        "model": ckpt.model_meta,
    }
    lines = [json.dumps(header, separators=(",", ":"))]
    for name, arr in ckpt.params:
        arr = np.asarray(arr, dtype=np.float64)
        lines.append(json.dumps({"name": name, "shape": list(arr.shape)}, separators=(",", ":")))
        lines.append(" ".join(repr(float(v)) for v in arr.reshape(-1)))
    path = checkpoint_path(directory, ckpt.epoch)
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def _corrupt(path: Path, detail: str) -> ValidationError:
    return ValidationError(
        ErrorCode.SCHEMA_VIOLATION,
        f"corrupted checkpoint {path}: {detail}",
        context=str(path),
    )


def read_header(path: Path | str) -> dict:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        first = handle.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise _corrupt(path, f"bad header: {exc}") from exc
    if not isinstance(header, dict):
        raise _corrupt(path, "header is not an object")
    if header.get("format_version") != CKPT_FORMAT_VERSION:
        raise _corrupt(
            path,
            f"unknown format_version {header.get('format_version')!r}; "
            f"supported versions: [{CKPT_FORMAT_VERSION}]",
        )
    required = {"epoch", "valid_score", "valid_metric_name", "config_digest", "model"}
    missing = required - set(header)
    if missing:
        raise _corrupt(path, f"header missing keys {sorted(missing)}")
    return header


def read_checkpoint(path: Path | str) -> Checkpoint:
    path = Path(path)
    header = read_header(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    params = []
    i = 1
    while i < len(lines):
        if lines[i].strip() == "":
            i += 1
            continue
        try:
            record = json.loads(lines[i])
            name = record["name"]
            shape = tuple(int(s) for s in record["shape"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise _corrupt(path, f"bad parameter record at line {i + 1}") from exc
        if i + 1 >= len(lines):
            raise _corrupt(path, f"missing values for parameter {name!r}")
        try:
            values = np.array(
                [float(tok) for tok in lines[i + 1].split()], dtype=np.float64
            ).reshape(shape)
        except ValueError as exc:
            raise _corrupt(path, f"bad values for parameter {name!r}: {exc}") from exc
        params.append((name, values))
        i += 2
    return Checkpoint(
        epoch=int(header["epoch"]),
        valid_score=float(header["valid_score"]),
        valid_metric_name=str(header["valid_metric_name"]),
        config_digest=str(header["config_digest"]),
        model_meta=dict(header["model"]),
        params=params,
    )


def list_checkpoints(directory: Path | str) -> list[tuple[int, Path]]:
    directory = Path(directory)
    if not directory.is_dir():
        return []
    found = []
    for path in directory.iterdir():
        match = _CKPT_NAME.fullmatch(path.name)
        if match:
            found.append((int(match.group(1)), path))
    return sorted(found)


def select_best(directory: Path | str) -> tuple[int, Path]:
    """Checkpoint with the highest valid_score; ties go to the earliest epoch."""
    found = list_checkpoints(directory)
    if not found:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, f"no checkpoints in {directory}", context=str(directory)
        )
    scored = [(read_header(path)["valid_score"], epoch, path) for epoch, path in found]
    _, best_epoch, best_path = min(scored, key=lambda item: (-item[0], item[1]))
    return best_epoch, best_path
