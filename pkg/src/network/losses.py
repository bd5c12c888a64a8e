"""Loss definitions consumed by ``network.mlp.backward``.

A loss maps the logits of the primary input (and, for TRADES/MART style
terms, the logits of the clean input) to per-instance values plus the exact
gradients with respect to both sets of logits. Optional per-instance
``weights`` scale both values and gradients and are treated as constants.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from errors import ConfigurationError, InputError
from network.functional import (
    CLAMP,
    Array,
    check_labels,
    kl_terms,
    max_other,
    softmax,
    softmax_backward,
)


@dataclass(frozen=True)
class LossEvaluation:
    per_instance: Array
    grad_logits: Array
    grad_natural: Array | None = None


def _weighted(
    evaluation: LossEvaluation, weights: npt.ArrayLike | None
) -> LossEvaluation:
    if weights is None:
        return evaluation
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != evaluation.per_instance.shape:
        msg = (
            f"got {w.shape[0] if w.ndim else 0} weights for a batch of "
            f"{evaluation.per_instance.shape[0]}"
        )
        raise InputError(msg)
    column = w[:, None]
    return LossEvaluation(
        per_instance=evaluation.per_instance * w,
        grad_logits=evaluation.grad_logits * column,
        grad_natural=(
            None
            if evaluation.grad_natural is None
            else evaluation.grad_natural * column
        ),
    )


def _kl_grads(p: Array, q: Array) -> tuple[Array, Array]:
    """Gradients of row-wise KL(p || q) w.r.t. ``p`` and ``q``."""
    log_p = np.log(p, out=np.zeros_like(p), where=p > 0)
    log_q = np.log(np.maximum(q, CLAMP))
    grad_p = np.where(p > 0, log_p - log_q + 1.0, 0.0)
    grad_q = np.where(q > CLAMP, -p / np.maximum(q, CLAMP), 0.0)
    return grad_p, grad_q


class LossDefinition(ABC):
    """A scalar training or attack loss summed over the batch."""

    @property
    def uses_natural(self) -> bool:
        return False

    @abstractmethod
    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation: ...


@dataclass(frozen=True)
class CrossEntropyLoss(LossDefinition):
    """``-log p_y``; ``on_natural`` reads the clean branch instead."""

    labels: npt.ArrayLike
    weights: npt.ArrayLike | None = None
    on_natural: bool = False

    @property
    def uses_natural(self) -> bool:
        return self.on_natural

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        source = natural_logits if self.on_natural else logits
        if source is None:
            msg = "natural logits are required"
            raise ConfigurationError(msg)
        p = softmax(source)
        y = check_labels(self.labels, p.shape[0], p.shape[1])
        rows = np.arange(p.shape[0])
        p_y = p[rows, y]
        clamped = p_y <= CLAMP
        grad = p.copy()
        grad[rows, y] -= 1.0
        grad[clamped] = 0.0
        evaluation = LossEvaluation(
            per_instance=-np.log(np.maximum(p_y, CLAMP)),
            grad_logits=np.zeros_like(logits) if self.on_natural else grad,
            grad_natural=grad if self.on_natural else None,
        )
        return _weighted(evaluation, self.weights)


@dataclass(frozen=True)
class MarginLoss(LossDefinition):
    """CW margin on logits: ``max_{k != y} z_k - z_y``."""

    labels: npt.ArrayLike

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        del natural_logits
        y = check_labels(self.labels, logits.shape[0], logits.shape[1])
        rows = np.arange(logits.shape[0])
        runner_up, idx = max_other(logits, y)
        grad = np.zeros_like(logits)
        grad[rows, idx] = 1.0
        grad[rows, y] = -1.0
        return LossEvaluation(
            per_instance=runner_up - logits[rows, y], grad_logits=grad
        )


@dataclass(frozen=True)
class KLToReferenceLoss(LossDefinition):
    """KL(p(x + delta) || reference) with a fixed reference distribution."""

    reference: Array

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        del natural_logits
        p = softmax(logits)
        q = np.atleast_2d(self.reference)
        if q.shape != p.shape:
            msg = f"reference {q.shape} does not match logits {p.shape}"
            raise InputError(msg)
        grad_p, _ = _kl_grads(p, q)
        return LossEvaluation(
            per_instance=kl_terms(p, q),
            grad_logits=softmax_backward(p, grad_p),
        )


@dataclass(frozen=True)
class KLDivergenceLoss(LossDefinition):
    """KL(p(x + delta) || p(x)) with gradients through both branches."""

    weights: npt.ArrayLike | None = None

    @property
    def uses_natural(self) -> bool:
        return True

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        if natural_logits is None:
            msg = "natural logits are required"
            raise ConfigurationError(msg)
        p = softmax(logits)
        q = softmax(natural_logits)
        grad_p, grad_q = _kl_grads(p, q)
        evaluation = LossEvaluation(
            per_instance=kl_terms(p, q),
            grad_logits=softmax_backward(p, grad_p),
            grad_natural=softmax_backward(q, grad_q),
        )
        return _weighted(evaluation, self.weights)


@dataclass(frozen=True)
class BoostedCrossEntropyLoss(LossDefinition):
    """``-log p_y - log(1 - max_{k != y} p_k)`` on the primary input."""

    labels: npt.ArrayLike
    weights: npt.ArrayLike | None = None

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        del natural_logits
        p = softmax(logits)
        y = check_labels(self.labels, p.shape[0], p.shape[1])
        rows = np.arange(p.shape[0])
        p_y = p[rows, y]
        runner_up, idx = max_other(p, y)
        rest = 1.0 - runner_up
        grad_p = np.zeros_like(p)
        grad_p[rows, y] = np.where(
            p_y > CLAMP, -1.0 / np.maximum(p_y, CLAMP), 0.0
        )
        grad_p[rows, idx] = np.where(
            rest > CLAMP, 1.0 / np.maximum(rest, CLAMP), 0.0
        )
        evaluation = LossEvaluation(
            per_instance=-np.log(np.maximum(p_y, CLAMP))
            - np.log(np.maximum(rest, CLAMP)),
            grad_logits=softmax_backward(p, grad_p),
        )
        return _weighted(evaluation, self.weights)


@dataclass(frozen=True)
class MisclassificationAwareKLLoss(LossDefinition):
    """``KL(p(x + delta) || p(x)) * (1 - p_y(x))``."""

    labels: npt.ArrayLike
    weights: npt.ArrayLike | None = None

    @property
    def uses_natural(self) -> bool:
        return True

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        if natural_logits is None:
            msg = "natural logits are required"
            raise ConfigurationError(msg)
        p = softmax(logits)
        q = softmax(natural_logits)
        y = check_labels(self.labels, q.shape[0], q.shape[1])
        rows = np.arange(q.shape[0])
        scale = (1.0 - q[rows, y])[:, None]
        kl = kl_terms(p, q)
        grad_p, grad_q = _kl_grads(p, q)
        grad_q = grad_q * scale
        grad_q[rows, y] -= kl
        evaluation = LossEvaluation(
            per_instance=kl * scale[:, 0],
            grad_logits=softmax_backward(p, grad_p * scale),
            grad_natural=softmax_backward(q, grad_q),
        )
        return _weighted(evaluation, self.weights)


@dataclass(frozen=True)
class ConstantLoss(LossDefinition):
    """A loss that ignores the model; every gradient is zero."""

    value: float = 0.0

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        del natural_logits
        return LossEvaluation(
            per_instance=np.full(logits.shape[0], self.value),
            grad_logits=np.zeros_like(logits),
        )


@dataclass(frozen=True)
class CompositeLoss(LossDefinition):
    """``sum_j coef_j * loss_j`` evaluated term by term."""

    terms: tuple[tuple[float, LossDefinition], ...]

    @property
    def uses_natural(self) -> bool:
        return any(term.uses_natural for _, term in self.terms)

    def evaluate(
        self, logits: Array, natural_logits: Array | None = None
    ) -> LossEvaluation:
        per_instance = np.zeros(logits.shape[0])
        grad = np.zeros_like(logits)
        grad_natural = (
            np.zeros_like(natural_logits)
            if natural_logits is not None and self.uses_natural
            else None
        )
        for coef, term in self.terms:
            part = term.evaluate(logits, natural_logits)
            per_instance += coef * part.per_instance
            grad += coef * part.grad_logits
            if part.grad_natural is not None and grad_natural is not None:
                grad_natural += coef * part.grad_natural
        return LossEvaluation(
            per_instance=per_instance,
            grad_logits=grad,
            grad_natural=grad_natural,
        )
