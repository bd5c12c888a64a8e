"""Training state, the SGD update and atomic checkpoints."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from errors import ConfigurationError, NumericError, SchemaError
from models.config import TrainConfig
from models.results import EpochRecord
from network.checkpoint import read_checkpoint, save_params
from network.mlp import ModelParams

logger = logging.getLogger(__name__)

SHUFFLE_STREAM = 0


@dataclass(frozen=True)
class TrainState:
    """Everything needed to continue a run exactly where it stopped.

    ``epoch`` counts completed epochs; ``rng_state`` is the bit-generator
    state of the batch-order stream.
    """

    params: ModelParams
    velocity: ModelParams
    epoch: int
    rng_state: dict[str, Any]
    history: tuple[EpochRecord, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.velocity.layer_dims != self.params.layer_dims:
            msg = (
                f"velocity {self.velocity.layer_dims} does not match "
                f"params {self.params.layer_dims}"
            )
            raise ConfigurationError(msg)

    @classmethod
    def initial(
        cls, layer_dims: Sequence[int], config: TrainConfig
    ) -> "TrainState":
        params = ModelParams.initialize(layer_dims, seed=config.seed)
        shuffle = np.random.default_rng(
            np.random.SeedSequence(config.seed, spawn_key=(SHUFFLE_STREAM,))
        )
        return cls(
            params=params,
            velocity=params.zeros_like(),
            epoch=0,
            rng_state=shuffle.bit_generator.state,
        )

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at ``rng_state``."""
        bit_generator = np.random.PCG64()
        bit_generator.state = self.rng_state
        return np.random.Generator(bit_generator)


def sgd_step(
    state: TrainState, grads: ModelParams, config: TrainConfig
) -> TrainState:
    """``v <- mu v + g + lambda theta``; ``theta <- theta - lr_t v``.

    ``lr_t`` is the scheduled rate of the epoch in progress.

    Raises:
        NumericError: If a gradient is non-finite.
    """
    for layer, (w, b) in enumerate(grads.layers()):
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            msg = f"non-finite gradient in layer {layer}"
            raise NumericError(msg, layer=layer)
    lr = config.lr_at(state.epoch + 1)
    mu = config.momentum
    decay = config.weight_decay
    velocity = state.velocity.map(
        lambda v, g, theta: mu * v + g + decay * theta, grads, state.params
    )
    params = state.params.map(lambda theta, v: theta - lr * v, velocity)
    return TrainState(
        params=params,
        velocity=velocity,
        epoch=state.epoch,
        rng_state=state.rng_state,
        history=state.history,
    )


def checkpoint(
    state: TrainState, path: Path, config: TrainConfig | None = None
) -> Path:
    """Atomically write params, velocity, epoch, RNG state and history."""
    metadata = {
        "epoch": state.epoch,
        "rng_state": state.rng_state,
        "history": [
            record.model_dump(mode="json") for record in state.history
        ],
    }
    if config is not None:
        metadata["config"] = config.model_dump(mode="json")
    save_params(
        path,
        state.params,
        sections={"velocity": state.velocity.flatten()},
        metadata=metadata,
    )
    logger.info("Checkpointed epoch %d to %s", state.epoch, path)
    return path


def restore(
    path: Path,
    *,
    expected_dims: Sequence[int] | None = None,
    expected_config: TrainConfig | None = None,
) -> TrainState:
    """Inverse of ``checkpoint``; bitwise for params and velocity.

    With ``expected_config`` the stored run configuration must match it
    in everything but the epoch count, so a resumed run can be extended.

    Raises:
        LoadError: If the file is malformed or the architecture differs.
        ConfigurationError: If the stored configuration differs from
            ``expected_config``.
    """
    ckpt = read_checkpoint(path, expected_dims=expected_dims)
    meta = ckpt.metadata
    if expected_config is not None:
        _check_config(path, meta.get("config"), expected_config)
    if "velocity" not in ckpt.sections or not {
        "epoch",
        "rng_state",
        "history",
    } <= meta.keys():
        msg = f"{path.name} is a parameter file, not a training checkpoint"
        raise SchemaError(msg)
    try:
        history = tuple(
            EpochRecord.model_validate(record) for record in meta["history"]
        )
    except ValidationError as err:
        msg = f"checkpoint history is invalid: {err}"
        raise SchemaError(msg) from err
    try:
        velocity = ModelParams.unflatten(
            ckpt.sections["velocity"],
            ckpt.params.layer_dims,
            activation=ckpt.params.activation,
        )
    except (ConfigurationError, NumericError) as err:
        msg = f"checkpoint velocity is invalid: {err}"
        raise SchemaError(msg) from err
    return TrainState(
        params=ckpt.params,
        velocity=velocity,
        epoch=int(meta["epoch"]),
        rng_state=meta["rng_state"],
        history=history,
    )


def _check_config(path: Path, stored: Any, expected: TrainConfig) -> None:
    if stored is None:
        msg = f"{path.name} does not record the configuration it was run with"
        raise SchemaError(msg)
    try:
        saved = TrainConfig.model_validate(stored).model_dump(mode="json")
    except ValidationError as err:
        msg = f"{path.name} records an invalid configuration: {err}"
        raise SchemaError(msg) from err
    changed = sorted(
        key
        for key, value in expected.model_dump(mode="json").items()
        if key != "epochs" and saved[key] != value
    )
    if changed:
        msg = (
            f"cannot resume {path.name}: the configuration differs in "
            f"{', '.join(changed)}"
        )
        raise ConfigurationError(msg)
