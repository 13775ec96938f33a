"""Model zoo behind one predictor contract: fit, load_model, inference, get_results."""

from healthpipe.models.checkpoint import (
    CKPT_FORMAT_VERSION,
    Checkpoint,
    checkpoint_path,
    list_checkpoints,
    read_checkpoint,
    read_header,
    select_best,
    write_checkpoint,
)
from healthpipe.models.config import TrainConfig
from healthpipe.models.predictor import (
    Predictor,
    ProtocolError,
    TrainingDiverged,
    stack_examples,
)
from healthpipe.models.results import ResultsBundle, read_results, write_results
from healthpipe.models.zoo import (
    MODEL_FACTORIES,
    GRUModel,
    LRModel,
    LSTMModel,
    TCNNModel,
    load_predictor,
    make_gru,
    make_lr,
    make_lstm,
    make_tcnn,
)

__all__ = [
    "CKPT_FORMAT_VERSION",
    "Checkpoint",
    "GRUModel",
    "LRModel",
    "LSTMModel",
    "MODEL_FACTORIES",
    "Predictor",
    "ProtocolError",
    "ResultsBundle",
    "TCNNModel",
    "TrainConfig",
    "TrainingDiverged",
    "checkpoint_path",
    "list_checkpoints",
    "load_predictor",
    "make_gru",
    "make_lr",
    "make_lstm",
    "make_tcnn",
    "read_checkpoint",
    "read_header",
    "read_results",
    "select_best",
    "stack_examples",
    "write_checkpoint",
    "write_results",
]
