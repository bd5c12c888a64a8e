"""Network package: MLP forward/backward, losses and checkpoints."""

from .checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_params,
    read_checkpoint,
    save_params,
)
from .functional import (
    boosted_cross_entropy,
    cross_entropy,
    kl_divergence,
    misclassification_aware_kl,
    softmax,
)
from .mlp import (
    GradBundle,
    LossResult,
    ModelParams,
    backward,
    forward,
    loss_value,
    predict,
    value_and_grad,
)

__all__ = [
    "Checkpoint",
    "GradBundle",
    "LossResult",
    "ModelParams",
    "backward",
    "boosted_cross_entropy",
    "cross_entropy",
    "decode_checkpoint",
    "encode_checkpoint",
    "forward",
    "kl_divergence",
    "load_params",
    "loss_value",
    "misclassification_aware_kl",
    "predict",
    "read_checkpoint",
    "save_params",
    "softmax",
    "value_and_grad",
]
