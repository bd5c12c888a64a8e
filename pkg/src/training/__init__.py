"""Training package: trainer loop, SGD state and checkpoints."""

from .log import LOG_COLUMNS, write_train_log
from .state import TrainState, checkpoint, restore, sgd_step
from .trainer import Trainer, train_epoch

__all__ = [
    "LOG_COLUMNS",
    "TrainState",
    "Trainer",
    "checkpoint",
    "restore",
    "sgd_step",
    "train_epoch",
    "write_train_log",
]
