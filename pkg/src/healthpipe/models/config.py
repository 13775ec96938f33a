"""Training configuration shared by the whole model zoo."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

from healthpipe.core import ErrorCode, ValidationError, check_parameter

OPTIMIZERS = ("adam", "sgd")


@dataclass
class TrainConfig:
    n_batchsize: int = 20
    n_epoch: int = 100
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 42
    use_gpu: bool = False
    hidden_dim: int = 64
    max_grad_norm: float = 5.0
    selection_metric: Optional[str] = None

    def validate(self) -> None:
        for name in ("n_batchsize", "n_epoch", "hidden_dim", "seed"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(
                    ErrorCode.TYPE_MISMATCH,
                    f"parameter {name!r} must be an integer, got {value!r}",
                )
        check_parameter(self.n_batchsize, 1, 10**6, "n_batchsize")
        check_parameter(self.n_epoch, 1, 10**6, "n_epoch")
        check_parameter(self.learning_rate, 0.0, 1e6, "learning_rate", inclusive_low=False)
        check_parameter(self.hidden_dim, 1, 10**5, "hidden_dim")
        check_parameter(self.max_grad_norm, 0.0, 1e9, "max_grad_norm", inclusive_low=False)
        if self.optimizer not in OPTIMIZERS:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"unknown optimizer {self.optimizer!r}; allowed: {list(OPTIMIZERS)}",
                context=str(self.optimizer),
            )

    def digest(self) -> str:
        """Stable 16-hex-char fingerprint of everything that shapes training.

        use_gpu is excluded on purpose: it is accepted and ignored, so two
        configs differing only there train byte-identical models.
        """
        payload = {
            "n_batchsize": self.n_batchsize,
            "n_epoch": self.n_epoch,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "seed": self.seed,
            "hidden_dim": self.hidden_dim,
            "max_grad_norm": self.max_grad_norm,
            "selection_metric": self.selection_metric,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
