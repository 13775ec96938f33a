"""Pipeline runner: prepare | train | infer | evaluate | run | demo-data.

Conventions shared by every subcommand:

  - machine-readable output (summary lines, report JSON) goes to stdout;
    progress logs go to stderr, so reports can be piped;
  - exit 0 on success, 2 on validation or usage problems (one line on
    stderr, ``error: <Code>: <message>``), 3 on numeric failure during
    training (the line names the epoch);
  - the artifact root is ``./experiments`` unless HEALTHPIPE_HOME is set.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import logging
import os
import sys
from pathlib import Path

import click

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.demo import write_demo_events
from healthpipe.evaluate import evaluate as evaluate_predictions
from healthpipe.fsutil import atomic_write_text
from healthpipe.models import (
    MODEL_FACTORIES,
    TrainConfig,
    TrainingDiverged,
    load_predictor,
    read_results,
)
from healthpipe.preprocess import (
    PreprocessConfig,
    SplitSpec,
    generate_dataset,
    load_dataset,
    save_dataset,
)

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("healthpipe.cli")


def artifact_root() -> Path:
    return Path(os.environ.get("HEALTHPIPE_HOME", "experiments"))


def dataset_dir(exp_id: str) -> Path:
    return artifact_root() / "datasets" / exp_id


def report_path(expmodel_id: str) -> Path:
    return artifact_root() / "reports" / f"{expmodel_id}.json"


def _setup_logging() -> None:
    # Rebind the handler on every invocation so the stream is whatever
    # sys.stderr currently is (test runners swap it per call).
    root = logging.getLogger("healthpipe")
    root.setLevel(logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(stream)
    root.propagate = False


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        _setup_logging()
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo("error: " + " ".join(str(exc).split()), err=True)
            raise SystemExit(EXIT_VALIDATION) from exc
        except TrainingDiverged as exc:
            click.echo(f"error: NumericFailure: {exc}", err=True)
            raise SystemExit(EXIT_NUMERIC) from exc

    return wrapper


def _parse_ratios(text: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"ratios {text!r} must be three comma-separated numbers",
            context=text,
        ) from None
    return parts


def _load_phenotypes(path: str | None):
    if path is None:
        return None
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"cannot read phenotypes file {path}: {exc}"
        ) from exc
    groups = list(raw.values()) if isinstance(raw, dict) else raw
    if not isinstance(groups, list) or not all(
        isinstance(g, list) and all(isinstance(c, str) for c in g) for g in groups
    ):
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"phenotypes file {path} must hold lists of code strings "
            "(or a name -> codes object)",
        )
    return groups


def _resolve_model(name: str):
    if name not in MODEL_FACTORIES:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown model {name!r}; allowed: {sorted(MODEL_FACTORIES)}",
            context=name,
        )
    return MODEL_FACTORIES[name]


@click.group()
def cli():
    """End-to-end predictive-health pipeline."""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Event CSV.")
@click.option("--task", required=True, help="mortality or phenotyping.")
@click.option("--exp-id", required=True)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int, help="Split seed.")
@click.option("--ratios", default="0.7,0.1,0.2", show_default=True)
@click.option("--visit-gap", default=24.0, show_default=True, type=float, help="Hours.")
@click.option("--horizon", default=30.0, show_default=True, type=float, help="Days.")
@click.option("--max-visits", default=10, show_default=True, type=int)
@click.option("--min-count", default=1, show_default=True, type=int)
@click.option(
    "--phenotypes",
    "phenotypes_path",
    type=click.Path(),
    default=None,
    help="JSON file of code groups (phenotyping only).",
)
@_guarded
def prepare(
    input_path,
    task,
    exp_id,
    workers,
    seed,
    ratios,
    visit_gap,
    horizon,
    max_visits,
    min_count,
    phenotypes_path,
):
    """Build a split, tensorized dataset artifact from an event CSV."""
    config = PreprocessConfig(
        visit_gap_hours=visit_gap,
        horizon_days=horizon,
        max_visits=max_visits,
        min_count=min_count,
        phenotypes=_load_phenotypes(phenotypes_path),
    )
    spec = SplitSpec(_parse_ratios(ratios), seed=seed)
    dataset = generate_dataset(input_path, task, exp_id, config, spec, n_workers=workers)
    out = save_dataset(dataset, dataset_dir(exp_id))
    click.echo(
        f"task={dataset.task.value} n_train={len(dataset.train)} "
        f"n_valid={len(dataset.valid)} n_test={len(dataset.test)} "
        f"V={dataset.vocab.size} T={dataset.max_visits} dir={out}"
    )


@cli.command()
@click.option("--exp-id", required=True)
@click.option("--model", "model_name", required=True, help="lr, gru, lstm, or tcnn.")
@click.option("--expmodel-id", required=True)
@click.option("--epochs", "n_epoch", default=100, show_default=True, type=int)
@click.option("--batchsize", "n_batchsize", default=20, show_default=True, type=int)
@click.option("--lr", "learning_rate", default=1e-3, show_default=True, type=float)
@click.option("--optimizer", default="adam", show_default=True)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--hidden-dim", default=64, show_default=True, type=int)
@click.option("--max-grad-norm", default=5.0, show_default=True, type=float)
@click.option("--selection-metric", default=None)
@click.option("--use-gpu", is_flag=True)
@_guarded
def train(
    exp_id,
    model_name,
    expmodel_id,
    n_epoch,
    n_batchsize,
    learning_rate,
    optimizer,
    seed,
    hidden_dim,
    max_grad_norm,
    selection_metric,
    use_gpu,
):
    """Train on a prepared dataset, writing one checkpoint per epoch."""
    factory = _resolve_model(model_name)
    config = TrainConfig(
        n_batchsize=n_batchsize,
        n_epoch=n_epoch,
        learning_rate=learning_rate,
        optimizer=optimizer,
        seed=seed,
        use_gpu=use_gpu,
        hidden_dim=hidden_dim,
        max_grad_norm=max_grad_norm,
        selection_metric=selection_metric,
    )
    config.validate()
    dataset = load_dataset(dataset_dir(exp_id))
    predictor = factory(
        dataset.max_visits,
        dataset.vocab.size,
        dataset.n_labels,
        dataset.task,
        config,
        expmodel_id,
        artifact_root(),
    )
    predictor.fit(dataset.train, dataset.valid)
    click.echo(f"checkpoints={predictor.checkpoint_dir} epochs={config.n_epoch}")


@cli.command()
@click.option("--exp-id", required=True)
@click.option("--expmodel-id", required=True)
@_guarded
def infer(exp_id, expmodel_id):
    """Load the best checkpoint and predict on the test split."""
    dataset = load_dataset(dataset_dir(exp_id))
    predictor = load_predictor(artifact_root(), expmodel_id)
    click.echo(f"selected_epoch={predictor.selected_epoch}")
    predictor.inference(dataset.test)
    out = predictor.save_results()
    click.echo(f"results={out} n={len(predictor.get_results())}")


@cli.command("evaluate")
@click.option("--results", "results_path", required=True, type=click.Path())
@_guarded
def evaluate_cmd(results_path):
    """Score a results file; the task is inferred from the labels."""
    bundle = read_results(results_path)
    report = evaluate_predictions(bundle["hat_y"], bundle["y"])
    for line in report.format_lines():
        logger.info(line)
    click.echo(report.to_json())


@cli.command("demo-data")
@click.option("--patients", required=True, type=int)
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--output", default="demo_events.csv", show_default=True, type=click.Path())
@_guarded
def demo_data(patients, seed, output):
    """Write a synthetic planted-outcome event CSV."""
    path = write_demo_events(output, patients, seed)
    click.echo(f"events={path} patients={patients} seed={seed}")


_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}
_SPLIT_KEYS = {"ratios", "seed"}
_PREPROCESS_KEYS = {"visit_gap", "horizon", "max_visits", "min_count", "phenotypes"}
_TOP_KEYS = {
    "exp_id",
    "expmodel_id",
    "task",
    "model",
    "input",
    "train",
    "split",
    "preprocess",
    "n_workers",
}


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"unknown {where} keys {unknown}; allowed: {sorted(allowed)}",
            context=where,
        )


def _section(config: dict, name: str) -> dict:
    value = config.get(name, {})
    if not isinstance(value, dict):
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"config section {name!r} must be an object"
        )
    return dict(value)


@cli.command()
@click.argument("config_file", type=click.Path())
@click.option("--model", "model_name", default=None, help="Override config model.")
@click.option("--epochs", default=None, type=int, help="Override train.n_epoch.")
@click.option("--seed", default=None, type=int, help="Override train and split seeds.")
@click.option("--workers", default=None, type=int, help="Override n_workers.")
@_guarded
def run(config_file, model_name, epochs, seed, workers):
    """Prepare, train, infer, and evaluate from one JSON config.

    Flag overrides beat config values, which beat defaults. Every setting
    is validated before the first artifact is written, and a failing stage
    stops the run while keeping completed artifacts.
    """
    try:
        config = json.loads(Path(config_file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"cannot read config {config_file}: {exc}"
        ) from exc
    if not isinstance(config, dict):
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, "config root must be a JSON object"
        )
    _reject_unknown(config, _TOP_KEYS, "config")
    for required in ("exp_id", "expmodel_id", "task", "model", "input"):
        if required not in config:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION, f"config is missing required key {required!r}"
            )

    train_section = _section(config, "train")
    split_section = _section(config, "split")
    prep_section = _section(config, "preprocess")
    _reject_unknown(train_section, _TRAIN_KEYS, "train")
    _reject_unknown(split_section, _SPLIT_KEYS, "split")
    _reject_unknown(prep_section, _PREPROCESS_KEYS, "preprocess")

    if model_name is not None:
        config["model"] = model_name
    if epochs is not None:
        train_section["n_epoch"] = epochs
    if seed is not None:
        train_section["seed"] = seed
        split_section["seed"] = seed
    if workers is not None:
        config["n_workers"] = workers

    factory = _resolve_model(config["model"])
    try:
        train_config = TrainConfig(**train_section)
        train_config.validate()
        split_spec = SplitSpec(
            tuple(split_section.get("ratios", (0.7, 0.1, 0.2))),
            seed=split_section.get("seed", 42),
        )
        prep_config = PreprocessConfig(
            visit_gap_hours=prep_section.get("visit_gap", 24.0),
            horizon_days=prep_section.get("horizon", 30.0),
            max_visits=prep_section.get("max_visits", 10),
            min_count=prep_section.get("min_count", 1),
            phenotypes=prep_section.get("phenotypes"),
        )
        prep_config.validate()
    except TypeError as exc:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION, f"bad config value: {exc}"
        ) from exc
    n_workers = config.get("n_workers", 1)
    exp_id = str(config["exp_id"])
    expmodel_id = str(config["expmodel_id"])

    logger.info("stage=prepare exp_id=%s", exp_id)
    dataset = generate_dataset(
        config["input"], str(config["task"]), exp_id, prep_config, split_spec, n_workers
    )
    save_dataset(dataset, dataset_dir(exp_id))

    logger.info("stage=train model=%s expmodel_id=%s", config["model"], expmodel_id)
    predictor = factory(
        dataset.max_visits,
        dataset.vocab.size,
        dataset.n_labels,
        dataset.task,
        train_config,
        expmodel_id,
        artifact_root(),
    )
    predictor.fit(dataset.train, dataset.valid)

    logger.info("stage=infer expmodel_id=%s", expmodel_id)
    predictor.load_model()
    predictor.inference(dataset.test)
    predictor.save_results()

    logger.info("stage=evaluate expmodel_id=%s", expmodel_id)
    results = predictor.get_results()
    report = evaluate_predictions(results["hat_y"], results["y"])
    for line in report.format_lines():
        logger.info(line)
    atomic_write_text(report_path(expmodel_id), report.to_json() + "\n")
    click.echo(report.to_json())


def main():
    cli(prog_name="healthpipe")


if __name__ == "__main__":
    main()
