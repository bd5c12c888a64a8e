"""Projected gradient attacks: sign-step PGD and line-searched LM-PGD.

Both attacks evaluate the model at every trace position, so the stored
losses and predictions describe the whole path and not only its endpoint.
"""

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from attacks.perturbation import Perturbation
from attacks.projection import project
from errors import ConfigurationError, NumericError
from models.config import (
    AttackConfig,
    AttackLoss,
    GenerationStyle,
    LmPgdConfig,
    ThreatModel,
)
from network.functional import Array, Labels, check_labels
from network.losses import (
    CrossEntropyLoss,
    KLToReferenceLoss,
    LossDefinition,
    MarginLoss,
)
from network.mlp import (
    LossResult,
    ModelParams,
    as_batch,
    forward,
    loss_value,
    value_and_grad,
)
from utils.rng import uniform_box

logger = logging.getLogger(__name__)


def attack_loss(
    kind: AttackLoss, params: ModelParams, x: Array, y: Labels
) -> LossDefinition:
    """The ascent objective of ``kind`` for the clean batch ``x``."""
    if kind is AttackLoss.CE:
        return CrossEntropyLoss(labels=y)
    if kind is AttackLoss.CW:
        return MarginLoss(labels=y)
    _, clean_probs = forward(params, x)
    return KLToReferenceLoss(reference=clean_probs)


class _TraceRecorder:
    """Collects losses, predictions and first crossings step by step."""

    def __init__(self, y: Labels, steps: int, dim: int) -> None:
        n = y.shape[0]
        self.y = y
        self.losses = np.empty((n, steps + 1))
        self.predictions = np.empty((n, steps + 1), dtype=np.int64)
        self.crossed_at = np.full(n, -1, dtype=np.int64)
        self.delta_at_cross = np.zeros((n, dim))

    def record(self, step: int, delta: Array, result: LossResult) -> None:
        if not np.all(np.isfinite(result.per_instance)):
            msg = f"non-finite attack loss at step {step}"
            raise NumericError(msg, step=step)
        predicted = np.argmax(result.logits, axis=-1)
        self.losses[:, step] = result.per_instance
        self.predictions[:, step] = predicted
        fresh = (self.crossed_at < 0) & (predicted != self.y)
        self.crossed_at[fresh] = step
        self.delta_at_cross[fresh] = delta[fresh]

    def finish(self, delta: Array) -> Perturbation:
        never = self.crossed_at < 0
        self.delta_at_cross[never] = delta[never]
        return Perturbation(
            delta=delta,
            delta_at_cross=self.delta_at_cross,
            labels=self.y,
            losses=self.losses,
            predictions=self.predictions,
            crossed_at=self.crossed_at,
        )


def _evaluate(
    params: ModelParams,
    x: Array,
    delta: Array,
    loss: LossDefinition,
    step: int,
) -> LossResult:
    try:
        return value_and_grad(params, x + delta, loss)
    except NumericError as err:
        msg = f"attack diverged at step {step}: {err}"
        raise NumericError(msg, layer=err.layer, step=step) from err


def start_point(
    x: Array,
    threat: ThreatModel,
    cfg: AttackConfig,
    instance_ids: npt.ArrayLike | None = None,
    keys: Sequence[int] = (),
) -> Array:
    """``delta^(0)``: uniform in the eps-box per instance, or zero."""
    if not cfg.rand_init or threat.epsilon == 0:
        return np.zeros_like(x)
    ids = (
        np.arange(x.shape[0])
        if instance_ids is None
        else np.asarray(instance_ids)
    )
    noise = uniform_box(cfg.seed, ids, x.shape[1], threat.epsilon, *keys)
    return project(noise, threat, x)


def pgd(
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    threat: ThreatModel,
    cfg: AttackConfig,
    *,
    instance_ids: npt.ArrayLike | None = None,
    keys: Sequence[int] = (),
) -> Perturbation:
    """Run ``cfg.steps`` sign-gradient ascent steps with projection.

    Args:
        params: Model under attack
        x: Clean inputs, a vector or an ``(n, d)`` batch
        y: True labels
        threat: Allowed perturbation set
        cfg: Steps, step size, ascent loss and random start
        instance_ids: Stable ids keying each random start (row index
            when omitted)
        keys: Extra stream keys, e.g. the epoch and batch index

    Raises:
        NumericError: If the loss becomes non-finite; carries the step.
    """
    xb = as_batch(params, x)
    labels = check_labels(y, xb.shape[0], params.num_classes)
    loss = attack_loss(cfg.loss_kind, params, xb, labels)
    delta = start_point(xb, threat, cfg, instance_ids, keys)
    recorder = _TraceRecorder(labels, cfg.steps, xb.shape[1])
    for step in range(cfg.steps + 1):
        result = _evaluate(params, xb, delta, loss, step)
        recorder.record(step, delta, result)
        if step == cfg.steps:
            break
        delta = project(
            delta + cfg.step_size * np.sign(result.grads.input_grad),
            threat,
            xb,
        )
    return recorder.finish(delta)


def _line_search(
    params: ModelParams,
    x: Array,
    delta: Array,
    momentum: Array,
    direction: Array,
    alphas: Array,
    threat: ThreatModel,
    loss: LossDefinition,
) -> tuple[Array, Array]:
    """Per-instance best candidate; ties go to the smallest alpha."""
    best_loss = np.full(x.shape[0], -np.inf)
    best_velocity = np.zeros_like(delta)
    best_delta = delta.copy()
    for alpha in alphas:
        velocity = momentum + alpha * direction
        candidate = project(delta + velocity, threat, x)
        values, _ = loss_value(params, x + candidate, loss)
        better = values > best_loss
        best_loss[better] = values[better]
        best_velocity[better] = velocity[better]
        best_delta[better] = candidate[better]
    return best_velocity, best_delta


def lm_pgd(
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    threat: ThreatModel,
    cfg: LmPgdConfig,
    max_steps: int,
) -> Perturbation:
    """PGD with Nesterov-style momentum and a line-searched step size.

    Each step tries ``cfg.line_search_points`` evenly spaced step sizes in
    the iteration's ``[alpha_min, alpha_max]`` and keeps, per instance, the
    one with the largest loss. Starts from ``delta = 0``.

    Raises:
        ConfigurationError: If the candidate grid is empty or
            ``max_steps < 1``.
    """
    if cfg.line_search_points < 1:
        msg = "line search needs at least one candidate step size"
        raise ConfigurationError(msg)
    if max_steps < 1:
        msg = f"max_steps must be at least 1, got {max_steps}"
        raise ConfigurationError(msg)
    xb = as_batch(params, x)
    labels = check_labels(y, xb.shape[0], params.num_classes)
    loss = attack_loss(cfg.loss_kind, params, xb, labels)
    delta = np.zeros_like(xb)
    velocity = np.zeros_like(xb)
    recorder = _TraceRecorder(labels, max_steps, xb.shape[1])
    for step in range(max_steps + 1):
        result = _evaluate(params, xb, delta, loss, step)
        recorder.record(step, delta, result)
        if step == max_steps:
            break
        lo, hi = cfg.alpha_bounds(step + 1)
        alphas = np.linspace(lo, hi, cfg.line_search_points)
        velocity, delta = _line_search(
            params,
            xb,
            delta,
            cfg.momentum * velocity,
            np.sign(result.grads.input_grad),
            alphas,
            threat,
            loss,
        )
    return recorder.finish(delta)


def generate_for_objective(  # noqa: PLR0913
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    style: GenerationStyle,
    threat: ThreatModel,
    cfg: AttackConfig,
    *,
    instance_ids: npt.ArrayLike | None = None,
    keys: Sequence[int] = (),
) -> Perturbation:
    """PGD with the ascent loss matching ``style`` (CE, KL or CW margin)."""
    attack = cfg.model_copy(update={"loss_kind": style.attack_loss})
    logger.debug(
        "Generating %s perturbations (%d steps)", style, attack.steps
    )
    return pgd(
        params, x, y, threat, attack, instance_ids=instance_ids, keys=keys
    )
