"""The unified predictor: fit, load_model, inference, get_results.

Every model in the zoo runs through this one class; the architectures only
differ in the forward/backward object passed in. Call order is enforced:
inference needs a fitted or loaded model, get_results needs a completed
inference. Violations raise ProtocolError rather than producing garbage.
"""

from __future__ import annotations

import logging
import re
import warnings
from pathlib import Path

import numpy as np

from healthpipe.core import ErrorCode, TaskKind, ValidationError
from healthpipe.evaluate import accuracy, auroc, f1, micro_f1, top1_accuracy
from healthpipe.models.checkpoint import (
    Checkpoint,
    read_checkpoint,
    select_best,
    write_checkpoint,
)
from healthpipe.models.config import TrainConfig
from healthpipe.models.results import ResultsBundle, write_results
from healthpipe.nn import (
    adam_step,
    bce,
    bce_grad_logits,
    cce,
    cce_grad_logits,
    clip_global_norm,
    sgd_step,
    sigmoid,
    softmax,
)
from healthpipe.rng import SplitMix64

logger = logging.getLogger("healthpipe.models")

# decorrelates the epoch-shuffle stream from the weight-init stream, which
# starts from the same user seed
_SHUFFLE_STREAM = 0xD1B54A32D192ED03

_EXPMODEL_ID = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")

# selection metrics that can score a validation split, per task kind
_SELECTION_METRICS = {
    TaskKind.BINARY: {
        "accuracy": lambda p, y: accuracy(p[:, 0], y[:, 0]),
        "f1": lambda p, y: f1(p[:, 0], y[:, 0]),
        "auroc": lambda p, y: auroc(p[:, 0], y[:, 0]),
    },
    TaskKind.MULTICLASS: {"accuracy": top1_accuracy},
    TaskKind.MULTILABEL: {"micro_f1": micro_f1},
}
_DEFAULT_METRIC = {
    TaskKind.BINARY: "accuracy",
    TaskKind.MULTICLASS: "accuracy",
    TaskKind.MULTILABEL: "micro_f1",
}


class ProtocolError(Exception):
    """A predictor method was called out of order."""


class TrainingDiverged(Exception):
    """Non-finite training loss; carries the epoch it happened in."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")
        self.epoch = epoch


def stack_examples(examples) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    ids = [ex.patient_id for ex in examples]
    x = np.stack([ex.x.features for ex in examples]).astype(np.float64)
    mask = np.stack([ex.x.mask for ex in examples]).astype(np.float64)
    y = np.stack([ex.y for ex in examples]).astype(np.float64)
    return ids, x, mask, y


class Predictor:
    def __init__(
        self,
        model,
        task: TaskKind,
        config: TrainConfig,
        expmodel_id: str,
        artifact_root: Path | str = "experiments",
    ):
        config.validate()
        if not _EXPMODEL_ID.fullmatch(expmodel_id):
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"expmodel_id {expmodel_id!r} must use only letters, digits, '.', '_', '-'",
                context=expmodel_id,
            )
        metric = config.selection_metric or _DEFAULT_METRIC[task]
        if metric not in _SELECTION_METRICS[task]:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"selection_metric {metric!r} not available for {task.value}; "
                f"allowed: {sorted(_SELECTION_METRICS[task])}",
                context=metric,
            )
        self.model = model
        self.task = task
        self.config = config
        self.expmodel_id = expmodel_id
        self.artifact_root = Path(artifact_root)
        self.valid_metric_name = metric
        self.selected_epoch: int | None = None
        self._fitted = False
        self._results: ResultsBundle | None = None

    @property
    def kind(self) -> str:
        return self.model.kind

    @property
    def checkpoint_dir(self) -> Path:
        return self.artifact_root / "checkpoints" / self.expmodel_id

    @property
    def results_path(self) -> Path:
        return self.artifact_root / "results" / f"{self.expmodel_id}.jsonl"

    # -- training ---------------------------------------------------------

    def _check_dims(self, x: np.ndarray, y: np.ndarray, where: str) -> None:
        if x.shape[2] != self.model.n_features:
            raise ValidationError(
                ErrorCode.TYPE_MISMATCH,
                f"{where} has {x.shape[2]} features, model expects {self.model.n_features}",
            )
        if x.shape[1] < self.model.min_timesteps:
            raise ValidationError(
                ErrorCode.RANGE_VIOLATION,
                f"{where} has {x.shape[1]} timesteps, model needs at least "
                f"{self.model.min_timesteps}",
            )
        if y.shape[1] != self.model.n_labels:
            raise ValidationError(
                ErrorCode.TYPE_MISMATCH,
                f"{where} has {y.shape[1]} labels, model expects {self.model.n_labels}",
            )

    def _loss_and_grad(self, logits: np.ndarray, y: np.ndarray):
        if self.task is TaskKind.MULTICLASS:
            p = softmax(logits)
            return cce(p, y), cce_grad_logits(p, y)
        p = sigmoid(logits)
        return bce(p, y), bce_grad_logits(p, y)

    def _probabilities(self, logits: np.ndarray) -> np.ndarray:
        if self.task is TaskKind.MULTICLASS:
            return softmax(logits)
        return sigmoid(logits)

    def fit(self, train, valid) -> "Predictor":
        """Mini-batch training with a checkpoint after every epoch."""
        if self.config.use_gpu:
            warnings.warn(
                "use_gpu=True was requested but only the CPU backend exists; "
                "training on CPU",
                stacklevel=2,
            )
        if not train:
            raise ValidationError(ErrorCode.EMPTY_INPUT, "'train' split is empty")
        if not valid:
            raise ValidationError(
                ErrorCode.EMPTY_INPUT, "'valid' split is empty; checkpoint selection needs it"
            )
        _, x_train, m_train, y_train = stack_examples(train)
        _, x_valid, m_valid, y_valid = stack_examples(valid)
        self._check_dims(x_train, y_train, "'train'")
        self._check_dims(x_valid, y_valid, "'valid'")

        params = self.model.parameters()
        metric_fn = _SELECTION_METRICS[self.task][self.valid_metric_name]
        rng = SplitMix64(self.config.seed ^ _SHUFFLE_STREAM)
        order = list(range(len(train)))
        step = 0
        for epoch in range(1, self.config.n_epoch + 1):
            rng.shuffle(order)
            total_loss = 0.0
            for start in range(0, len(order), self.config.n_batchsize):
                batch = order[start : start + self.config.n_batchsize]
                xb, mb, yb = x_train[batch], m_train[batch], y_train[batch]
                for p in params:
                    p.zero_grad()
                logits, cache = self.model.forward(xb, mb)
                loss, dlogits = self._loss_and_grad(logits, yb)
                if not np.isfinite(loss):
                    raise TrainingDiverged(epoch, loss)
                self.model.backward(cache, dlogits)
                clip_global_norm(params, self.config.max_grad_norm)
                step += 1
                if self.config.optimizer == "adam":
                    adam_step(params, self.config.learning_rate, step)
                else:
                    sgd_step(params, self.config.learning_rate)
                total_loss += loss * len(batch)
            epoch_loss = total_loss / len(order)

            logits, _ = self.model.forward(x_valid, m_valid)
            score = float(metric_fn(self._probabilities(logits), y_valid))
            logger.info(
                "epoch=%d loss=%.6f valid=%.6f metric=%s",
                epoch,
                epoch_loss,
                score,
                self.valid_metric_name,
            )
            write_checkpoint(
                self.checkpoint_dir,
                Checkpoint(
                    epoch=epoch,
                    valid_score=score,
                    valid_metric_name=self.valid_metric_name,
                    config_digest=self.config.digest(),
                    model_meta={"task": self.task.value, **self.model.meta()},
                    params=[(p.name, p.value) for p in params],
                ),
            )
        self._fitted = True
        return self

    # -- selection and prediction ----------------------------------------

    def load_model(self) -> int:
        """Restore the checkpoint with the best validation score."""
        epoch, path = select_best(self.checkpoint_dir)
        ckpt = read_checkpoint(path)
        by_name = {name: values for name, values in ckpt.params}
        for p in self.model.parameters():
            if p.name not in by_name:
                raise ValidationError(
                    ErrorCode.SCHEMA_VIOLATION,
                    f"corrupted checkpoint {path}: missing parameter {p.name!r}",
                    context=str(path),
                )
            values = by_name.pop(p.name)
            if values.shape != p.value.shape:
                raise ValidationError(
                    ErrorCode.SCHEMA_VIOLATION,
                    f"corrupted checkpoint {path}: parameter {p.name!r} has shape "
                    f"{values.shape}, expected {p.value.shape}",
                    context=str(path),
                )
            p.value[...] = values
        if by_name:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"corrupted checkpoint {path}: unexpected parameters {sorted(by_name)}",
                context=str(path),
            )
        self.selected_epoch = epoch
        self._fitted = True
        logger.info("selected_epoch=%d valid_score=%s", epoch, ckpt.valid_score)
        return epoch

    def inference(self, test) -> "Predictor":
        if not self._fitted:
            raise ProtocolError(
                "inference requires a trained model: call fit() or load_model() first"
            )
        if not test:
            raise ValidationError(ErrorCode.EMPTY_INPUT, "'test' split is empty")
        ids, x, mask, y = stack_examples(test)
        self._check_dims(x, y, "'test'")
        logits, _ = self.model.forward(x, mask)
        self._results = ResultsBundle(ids=ids, y=y, hat_y=self._probabilities(logits))
        return self

    def get_results(self) -> ResultsBundle:
        if self._results is None:
            raise ProtocolError("get_results requires a completed inference() call")
        return self._results

    def save_results(self) -> Path:
        return write_results(self.results_path, self.get_results())
