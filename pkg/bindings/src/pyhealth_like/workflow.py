"""Thin scripting layer over healthpipe.

Everything here is marshaling: validate an identifier, forward keyword
arguments into the primary config objects, force arrays crossing the
boundary to contiguous float64, and translate a handful of states into
the structured errors callers script against. No number is computed in
this module; every metric, gradient, and label comes from healthpipe.
"""

import json
import os
import re
from pathlib import Path

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.evaluate import evaluate, label_check
from healthpipe.models import MODEL_FACTORIES, ProtocolError, TrainConfig, load_predictor
from healthpipe.preprocess import (
    PreprocessConfig,
    SplitSpec,
    generate_dataset,
    load_dataset,
    save_dataset,
)

__all__ = ["expdata_generator", "LR", "GRU", "LSTM", "TCNN", "evaluator"]

# same shape the primary enforces for expmodel_id; keeps ids path-safe
_ID_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")


def _artifact_root(root) -> Path:
    if root is not None:
        return Path(root)
    return Path(os.environ.get("HEALTHPIPE_HOME", "experiments"))


def _as_buffer(values) -> np.ndarray:
    # boundary contract: arrays cross as C-contiguous float64
    return np.ascontiguousarray(values, dtype=np.float64)


def _check_id(name: str, value) -> str:
    if not isinstance(value, str) or _ID_PATTERN.fullmatch(value) is None:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"parameter {name!r} must be a path-safe identifier "
            f"([A-Za-z0-9][A-Za-z0-9._-]*), got {value!r}",
        )
    return value


class expdata_generator:
    """Dataset handle: generate once, load, then read .train/.valid/.test.

    Lower-case on purpose; the class is named after the call site it
    serves (``current_data = expdata_generator(exp_id=...)``).
    """

    def __init__(self, exp_id: str, root=None):
        self.exp_id = _check_id("exp_id", exp_id)
        self._dir = _artifact_root(root) / "datasets" / self.exp_id
        self._dataset = None

    def get_exp_data(
        self,
        sel_task: str = "mortality",
        data=None,
        ratios=(0.7, 0.1, 0.2),
        seed: int = 42,
        visit_gap: float = 24.0,
        horizon: float = 30.0,
        max_visits: int = 10,
        min_count: int = 1,
        phenotypes=None,
        n_workers: int = 1,
    ) -> "expdata_generator":
        """Build the task dataset from an event CSV and save it under exp_id."""
        if data is None:
            raise ValidationError(
                ErrorCode.EMPTY_INPUT,
                "parameter 'data' is required: path to a clinical event CSV",
            )
        config = PreprocessConfig(
            visit_gap_hours=visit_gap,
            horizon_days=horizon,
            max_visits=max_visits,
            min_count=min_count,
            phenotypes=phenotypes,
        )
        dataset = generate_dataset(
            data,
            sel_task,
            self.exp_id,
            config,
            SplitSpec(ratios=tuple(ratios), seed=seed),
            n_workers=n_workers,
        )
        save_dataset(dataset, self._dir)
        return self

    def load_exp_data(self) -> "expdata_generator":
        if not (self._dir / "meta.json").exists():
            raise ValidationError(
                ErrorCode.EMPTY_INPUT,
                f"no dataset saved for exp_id {self.exp_id!r} under {self._dir}; "
                "call get_exp_data() first",
            )
        self._dataset = load_dataset(self._dir)
        return self

    def _loaded(self):
        if self._dataset is None:
            raise ValidationError(
                ErrorCode.EMPTY_INPUT,
                "dataset not loaded: call load_exp_data() first",
            )
        return self._dataset

    @property
    def task(self) -> str:
        return self._loaded().task.value

    @property
    def train(self):
        return self._loaded().train

    @property
    def valid(self):
        return self._loaded().valid

    @property
    def test(self):
        return self._loaded().test


class _BoundModel:
    """Shared wrapper: one predictor handle plus its training config."""

    kind = ""

    def __init__(
        self,
        expmodel_id: str,
        n_batchsize: int = 20,
        use_gpu: bool = False,
        n_epoch: int = 100,
        learning_rate: float = 1e-3,
        optimizer: str = "adam",
        seed: int = 42,
        hidden_dim: int = 64,
        max_grad_norm: float = 5.0,
        selection_metric=None,
        root=None,
    ):
        self.expmodel_id = _check_id("expmodel_id", expmodel_id)
        self._config = TrainConfig(
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
        self._config.validate()
        self._root = _artifact_root(root)
        self._predictor = None

    def fit(self, train, valid) -> "_BoundModel":
        """Train on the given splits; dimensions and task come from the data."""
        if not train:
            raise ValidationError(ErrorCode.EMPTY_INPUT, "'train' split is empty")
        n_visits, n_features = train[0].x.features.shape
        labels = _as_buffer([example.y for example in train])
        factory = MODEL_FACTORIES[self.kind]
        self._predictor = factory(
            n_visits,
            n_features,
            labels.shape[1],
            label_check(labels),
            self._config,
            self.expmodel_id,
            self._root,
        )
        self._predictor.fit(train, valid)
        return self

    def load_model(self) -> "_BoundModel":
        """Restore the best-validation epoch; works with or without a prior fit."""
        if self._predictor is None:
            self._predictor = load_predictor(self._root, self.expmodel_id, self._config)
        else:
            self._predictor.load_model()
        return self

    def _require_predictor(self, method: str):
        if self._predictor is None:
            raise ProtocolError(
                f"{method} requires a trained model: call fit() or load_model() first"
            )
        return self._predictor

    def inference(self, test) -> "_BoundModel":
        predictor = self._require_predictor("inference")
        predictor.inference(test)
        predictor.save_results()
        return self

    def get_results(self) -> dict:
        bundle = self._require_predictor("get_results").get_results()
        return {
            "ids": list(bundle["ids"]),
            "hat_y": _as_buffer(bundle["hat_y"]),
            "y": _as_buffer(bundle["y"]),
        }


class LR(_BoundModel):
    """Flattened-sequence logistic regression."""

    kind = "lr"


class GRU(_BoundModel):
    """Gated recurrent network over the visit sequence."""

    kind = "gru"


class LSTM(_BoundModel):
    """Long short-term memory network over the visit sequence."""

    kind = "lstm"


class TCNN(_BoundModel):
    """Temporal convolution over the visit sequence."""

    kind = "tcnn"


def evaluator(hat_y, y) -> dict:
    """Score predictions against labels; returns the metric report as a dict.

    The dict equals what ``healthpipe evaluate`` prints for the same rows.
    """
    report = evaluate(_as_buffer(hat_y), _as_buffer(y))
    return json.loads(report.to_json())
