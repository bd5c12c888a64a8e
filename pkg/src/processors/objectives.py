"""Training objectives: AT, TRADES, MART and their reweighted versions.

Totals are sums over the batch. Instance weights multiply only the terms
they belong to and are constants for differentiation.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from errors import ConfigurationError, NumericError
from models.config import ObjectiveConfig, ObjectiveKind
from network.functional import Array, check_labels
from network.losses import (
    BoostedCrossEntropyLoss,
    CompositeLoss,
    CrossEntropyLoss,
    KLDivergenceLoss,
    LossDefinition,
    MisclassificationAwareKLLoss,
)
from network.mlp import LossResult, ModelParams, as_batch, value_and_grad
from processors.reweighting import WeightVector

logger = logging.getLogger(__name__)

Weights = WeightVector | npt.ArrayLike


@dataclass(frozen=True)
class BatchLossReport:
    """Value and parameter gradients of one objective on one batch."""

    total: float
    per_instance: Array
    weights_used: WeightVector
    grads: ModelParams
    logits: Array


def _weight_vector(weights: Weights) -> WeightVector:
    if isinstance(weights, WeightVector):
        return weights
    values = np.atleast_1d(np.asarray(weights, dtype=np.float64))
    return WeightVector(weights=values, normalized=False)


def _report(
    result: LossResult, weights: WeightVector, kind: ObjectiveKind
) -> BatchLossReport:
    if not np.isfinite(result.total):
        msg = f"{kind} objective produced a non-finite loss"
        raise NumericError(msg)
    return BatchLossReport(
        total=result.total,
        per_instance=result.per_instance,
        weights_used=weights,
        grads=result.grads.param_grads,
        logits=result.logits,
    )


def _run(  # noqa: PLR0913
    params: ModelParams,
    x: npt.ArrayLike,
    deltas: npt.ArrayLike,
    loss: LossDefinition,
    weights: WeightVector,
    kind: ObjectiveKind,
) -> BatchLossReport:
    xb = as_batch(params, x)
    adv = xb + np.asarray(deltas, dtype=np.float64)
    result = value_and_grad(params, adv, loss, x_natural=xb)
    return _report(result, weights, kind)


def mail_at_loss(
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    deltas: npt.ArrayLike,
    weights: Weights,
) -> BatchLossReport:
    """``sum_i w_i * CE(x_i + delta_i, y_i)``."""
    w = _weight_vector(weights)
    loss = CrossEntropyLoss(labels=y, weights=w.weights)
    return _run(params, x, deltas, loss, w, ObjectiveKind.MAIL_AT)


def mail_trades_loss(  # noqa: PLR0913
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    deltas: npt.ArrayLike,
    weights: Weights,
    cfg: ObjectiveConfig,
) -> BatchLossReport:
    """``beta * sum_i w_i KL(p(x_i + delta_i) || p(x_i)) + sum_i CE(x_i)``.

    The natural cross-entropy term is not weighted.
    """
    w = _weight_vector(weights)
    loss = CompositeLoss(
        terms=(
            (1.0, CrossEntropyLoss(labels=y, on_natural=True)),
            (cfg.tradeoff, KLDivergenceLoss(weights=w.weights)),
        )
    )
    return _run(params, x, deltas, loss, w, ObjectiveKind.MAIL_TRADES)


def mail_mart_loss(  # noqa: PLR0913
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    deltas: npt.ArrayLike,
    weights: Weights,
    cfg: ObjectiveConfig,
) -> BatchLossReport:
    """``sum_i w_i BCE(x_i + delta_i) + beta * sum_i MKL(x_i, delta_i)``.

    Only the boosted cross-entropy is weighted; the total is minimized.
    """
    w = _weight_vector(weights)
    loss = CompositeLoss(
        terms=(
            (1.0, BoostedCrossEntropyLoss(labels=y, weights=w.weights)),
            (cfg.tradeoff, MisclassificationAwareKLLoss(labels=y)),
        )
    )
    return _run(params, x, deltas, loss, w, ObjectiveKind.MAIL_MART)


def standard_loss(
    params: ModelParams, x: npt.ArrayLike, y: npt.ArrayLike
) -> BatchLossReport:
    """Clean cross-entropy, the non-adversarial reference."""
    xb = as_batch(params, x)
    labels = check_labels(y, xb.shape[0], params.num_classes)
    result = value_and_grad(params, xb, CrossEntropyLoss(labels=labels))
    return _report(
        result, WeightVector.ones(xb.shape[0]), ObjectiveKind.STANDARD
    )


def baseline_loss(  # noqa: PLR0913
    kind: ObjectiveKind,
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    deltas: npt.ArrayLike,
    cfg: ObjectiveConfig | None = None,
) -> BatchLossReport:
    """AT, TRADES or MART: the reweighted losses with every weight 1."""
    baselines = {ObjectiveKind.AT, ObjectiveKind.TRADES, ObjectiveKind.MART}
    if kind not in baselines:
        msg = f"{kind} is not a baseline objective"
        raise ConfigurationError(msg)
    ones = WeightVector.ones(as_batch(params, x).shape[0])
    return objective_loss(
        params,
        x,
        y,
        deltas,
        ones,
        cfg or ObjectiveConfig.for_kind(kind),
        kind=ObjectiveKind(f"MAIL_{kind}"),
    )


def objective_loss(  # noqa: PLR0913
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    deltas: npt.ArrayLike,
    weights: Weights,
    cfg: ObjectiveConfig,
    *,
    kind: ObjectiveKind | None = None,
) -> BatchLossReport:
    """Evaluate ``cfg.kind`` (or ``kind``) on one batch.

    Baseline kinds ignore ``weights`` and use ones; STANDARD also ignores
    ``deltas``.
    """
    kind = kind or cfg.kind
    if kind is ObjectiveKind.STANDARD:
        return standard_loss(params, x, y)
    if not kind.is_reweighted:
        return baseline_loss(kind, params, x, y, deltas, cfg)
    if kind.base is ObjectiveKind.AT:
        return mail_at_loss(params, x, y, deltas, weights)
    if kind.base is ObjectiveKind.TRADES:
        return mail_trades_loss(params, x, y, deltas, weights, cfg)
    return mail_mart_loss(params, x, y, deltas, weights, cfg)
