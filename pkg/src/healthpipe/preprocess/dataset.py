"""Experiment dataset generation, parallel fan-out, and on-disk artifacts.

Artifact directory layout (format_version 1):

    meta.json    format_version, exp_id, task, data_kind, T, V, C, seed,
                 ratios, source_sha256
    vocab.txt    one code per line, line number = index
    train.jsonl  one example per line: {"patient_id", "features", "mask", "y"}
    valid.jsonl  (features/mask/y serialized as 0/1 integers, fixed key order)
    test.jsonl

Generation is observationally pure in the worker count: patients are chunked
in ascending patient_id order via ``partition_tasks``, each chunk is built by
the same per-patient helpers the sequential path uses, and results are merged
back in chunk order.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from healthpipe.core import (
    DataKind,
    ErrorCode,
    TaskKind,
    ValidationError,
    check_parameter,
    partition_tasks,
)
from healthpipe.fsutil import atomic_replace_dir
from healthpipe.preprocess.encode import EpisodeTensor, Vocabulary, build_vocabulary
from healthpipe.preprocess.events import PatientRecord, build_patients, parse_events
from healthpipe.preprocess.split import SplitSpec, split
from healthpipe.preprocess.tasks import (
    LabeledExample,
    check_mortality_args,
    check_phenotyping_args,
    mortality_example,
    phenotyping_example,
)

FORMAT_VERSION = 1
TASK_BUILDERS = {"mortality": TaskKind.BINARY, "phenotyping": TaskKind.MULTILABEL}


@dataclass
class PreprocessConfig:
    visit_gap_hours: float = 24.0
    horizon_days: float = 30.0
    max_visits: int = 10
    min_count: int = 1
    phenotypes: Optional[list[list[str]]] = None

    def validate(self) -> None:
        check_parameter(self.visit_gap_hours, 0.0, 24 * 365, "visit_gap_hours", inclusive_low=False)
        check_parameter(self.horizon_days, 0.0, 36500.0, "horizon_days", inclusive_low=False)
        check_parameter(self.max_visits, 1, 10000, "max_visits")
        check_parameter(self.min_count, 0, 10**9, "min_count")

    @property
    def visit_gap(self) -> timedelta:
        return timedelta(hours=self.visit_gap_hours)

    @property
    def horizon(self) -> timedelta:
        return timedelta(days=self.horizon_days)


@dataclass(eq=False)
class ExperimentDataset:
    """A materialized, split, tensorized task dataset."""

    exp_id: str
    task: TaskKind
    data_kind: DataKind
    vocab: Vocabulary
    train: list[LabeledExample]
    valid: list[LabeledExample]
    test: list[LabeledExample]
    max_visits: int
    n_labels: int
    seed: int
    ratios: tuple[float, float, float]
    source_sha256: str = ""

    def __post_init__(self):
        if self.data_kind in (DataKind.IMAGE, DataKind.TEXT):
            raise ValidationError(
                ErrorCode.UNSUPPORTED_KIND,
                f"parameter 'data_kind' = {self.data_kind.value!r} has no "
                "preprocessing support (supported: sequence, signal)",
                context=self.data_kind.value,
            )

    @property
    def splits(self) -> dict[str, list[LabeledExample]]:
        return {"train": self.train, "valid": self.valid, "test": self.test}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExperimentDataset):
            return NotImplemented
        return (
            self.exp_id == other.exp_id
            and self.task == other.task
            and self.data_kind == other.data_kind
            and self.vocab == other.vocab
            and self.max_visits == other.max_visits
            and self.n_labels == other.n_labels
            and self.seed == other.seed
            and tuple(self.ratios) == tuple(other.ratios)
            and self.source_sha256 == other.source_sha256
            and self.train == other.train
            and self.valid == other.valid
            and self.test == other.test
        )


def _build_examples_chunk(
    patients: list[PatientRecord],
    vocab: Vocabulary,
    task: str,
    max_visits: int,
    horizon_days: float,
    phenotypes: Optional[list[list[str]]],
) -> list[LabeledExample]:
    # Top-level so process pools can pickle it; mirrors the sequential path.
    out = []
    for patient in patients:
        if task == "mortality":
            ex = mortality_example(patient, vocab, max_visits, timedelta(days=horizon_days))
        else:
            ex = phenotyping_example(
                patient, vocab, max_visits, [set(p) for p in phenotypes or []]
            )
        if ex is not None:
            out.append(ex)
    return out


def _fan_out(
    patients: list[PatientRecord],
    vocab: Vocabulary,
    task: str,
    config: PreprocessConfig,
    n_workers: int,
) -> list[LabeledExample]:
    args = (vocab, task, config.max_visits, config.horizon_days, config.phenotypes)
    if n_workers == 1 or len(patients) == 1:
        return _build_examples_chunk(patients, *args)
    counts = partition_tasks(len(patients), n_workers)
    chunks = []
    start = 0
    for count in counts:
        chunks.append(patients[start : start + count])
        start += count
    with concurrent.futures.ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(_build_examples_chunk, chunk, *args) for chunk in chunks]
        merged: list[LabeledExample] = []
        for future in futures:  # merge in submission (= patient_id) order
            merged.extend(future.result())
    return merged


def generate_dataset(
    source: Path | str,
    task: str,
    exp_id: str,
    config: PreprocessConfig,
    split_spec: SplitSpec,
    n_workers: int = 1,
) -> ExperimentDataset:
    """Full pipeline: parse -> patients -> vocabulary -> task examples -> split.

    Output is bit-identical for every ``n_workers``; the worker count is a
    performance knob only.
    """
    config.validate()
    check_parameter(n_workers, 1, 1024, "n_workers")
    if task not in TASK_BUILDERS:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown task {task!r}; allowed tasks: {sorted(TASK_BUILDERS)}",
            context=task,
        )
    if task == "mortality":
        check_mortality_args(config.horizon)
    else:
        if config.phenotypes is None:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                "parameter 'phenotypes' is required for the phenotyping task",
            )
        check_phenotyping_args([set(p) for p in config.phenotypes])

    source = Path(source)
    try:
        raw = source.read_bytes()
    except OSError as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"cannot read 'source' {source}: {exc}",
            context=str(source),
        ) from exc
    digest = hashlib.sha256(raw).hexdigest()
    events = parse_events(io.StringIO(raw.decode("utf-8")))
    patients = build_patients(events, config.visit_gap)
    vocab = build_vocabulary(patients, config.min_count)

    examples = _fan_out(patients, vocab, task, config, n_workers)
    if not examples:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, f"task {task!r} produced no examples from 'source'"
        )
    train, valid, test = split(examples, split_spec)
    return ExperimentDataset(
        exp_id=exp_id,
        task=TASK_BUILDERS[task],
        data_kind=DataKind.SEQUENCE,
        vocab=vocab,
        train=train,
        valid=valid,
        test=test,
        max_visits=config.max_visits,
        n_labels=int(examples[0].y.shape[0]),
        seed=split_spec.seed,
        ratios=tuple(split_spec.ratios),
        source_sha256=digest,
    )


def _example_to_json(example: LabeledExample) -> str:
    record = {
        "patient_id": example.patient_id,
        "features": example.x.features.astype(int).tolist(),
        "mask": example.x.mask.astype(int).tolist(),
        "y": example.y.astype(int).tolist(),
    }
    return json.dumps(record, separators=(",", ":"))


def _example_from_json(
    line: str, max_visits: int, vocab_size: int, n_labels: int, path: Path, line_num: int
) -> LabeledExample:
    def corrupt(detail: str) -> ValidationError:
        return ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"corrupted example in {path} line {line_num}: {detail}",
            context=str(path),
        )

    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise corrupt(str(exc)) from exc
    if not isinstance(record, dict) or set(record) != {"patient_id", "features", "mask", "y"}:
        raise corrupt("expected keys patient_id, features, mask, y")
    features = np.asarray(record["features"], dtype=np.float64)
    mask = np.asarray(record["mask"], dtype=np.float64)
    y = np.asarray(record["y"], dtype=np.float64)
    if features.shape != (max_visits, vocab_size):
        raise corrupt(f"features shape {features.shape} != ({max_visits}, {vocab_size})")
    if mask.shape != (max_visits,):
        raise corrupt(f"mask shape {mask.shape} != ({max_visits},)")
    if y.shape != (n_labels,):
        raise corrupt(f"y shape {y.shape} != ({n_labels},)")
    return LabeledExample(
        patient_id=str(record["patient_id"]),
        x=EpisodeTensor(features=features, mask=mask),
        y=y,
    )


def save_dataset(dataset: ExperimentDataset, directory: Path | str) -> Path:
    """Write the artifact directory atomically (temp dir + rename)."""
    directory = Path(directory)

    meta = {
        "format_version": FORMAT_VERSION,
        "exp_id": dataset.exp_id,
        "task": dataset.task.value,
        "data_kind": dataset.data_kind.value,
        "T": dataset.max_visits,
        "V": dataset.vocab.size,
        "C": dataset.n_labels,
        "seed": dataset.seed,
        "ratios": list(dataset.ratios),
        "source_sha256": dataset.source_sha256,
    }

    def build(tmp: Path) -> None:
        (tmp / "meta.json").write_text(
            json.dumps(meta, separators=(",", ":")) + "\n", encoding="utf-8"
        )
        (tmp / "vocab.txt").write_text(
            "".join(code + "\n" for code in dataset.vocab.codes_in_order()),
            encoding="utf-8",
        )
        for name, examples in dataset.splits.items():
            (tmp / f"{name}.jsonl").write_text(
                "".join(_example_to_json(ex) + "\n" for ex in examples),
                encoding="utf-8",
            )

    atomic_replace_dir(directory, build)
    return directory


def load_dataset(directory: Path | str) -> ExperimentDataset:
    """Load a saved artifact; SchemaViolation on anything malformed."""
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.is_file():
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"no dataset artifact at {directory} (missing meta.json)",
            context=str(directory),
        )
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"corrupted meta.json in {directory}: {exc}",
            context=str(directory),
        ) from exc
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown format_version {version!r} in {meta_path}; "
            f"supported versions: [{FORMAT_VERSION}]",
            context=str(version),
        )
    required = {"exp_id", "task", "data_kind", "T", "V", "C", "seed", "ratios", "source_sha256"}
    missing = required - set(meta)
    if missing:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"meta.json in {directory} missing keys {sorted(missing)}",
            context=str(directory),
        )

    vocab_path = directory / "vocab.txt"
    if not vocab_path.is_file():
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"missing vocab.txt in {directory}",
            context=str(directory),
        )
    codes = vocab_path.read_text(encoding="utf-8").splitlines()
    if len(codes) != meta["V"] or len(set(codes)) != len(codes):
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"vocab.txt in {directory} has {len(codes)} lines, expected {meta['V']} unique codes",
            context=str(directory),
        )
    vocab = Vocabulary({code: i for i, code in enumerate(codes)})

    splits = {}
    for name in ("train", "valid", "test"):
        split_path = directory / f"{name}.jsonl"
        if not split_path.is_file():
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"missing {name}.jsonl in {directory}",
                context=str(directory),
            )
        examples = []
        with split_path.open(encoding="utf-8") as handle:
            for line_num, line in enumerate(handle, start=1):
                if line.strip() == "":
                    continue
                examples.append(
                    _example_from_json(
                        line, meta["T"], meta["V"], meta["C"], split_path, line_num
                    )
                )
        splits[name] = examples

    return ExperimentDataset(
        exp_id=str(meta["exp_id"]),
        task=TaskKind.from_string(meta["task"]),
        data_kind=DataKind.from_string(meta["data_kind"]),
        vocab=vocab,
        train=splits["train"],
        valid=splits["valid"],
        test=splits["test"],
        max_visits=int(meta["T"]),
        n_labels=int(meta["C"]),
        seed=int(meta["seed"]),
        ratios=tuple(meta["ratios"]),
        source_sha256=str(meta["source_sha256"]),
    )
