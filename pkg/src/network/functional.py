"""Softmax and the probability-space losses.

All functions work on a single vector ``(K,)`` or a batch ``(n, K)`` and
return a float or an ``(n,)`` array accordingly. Probabilities are clamped
at ``CONFIG.numeric.prob_clamp`` before every logarithm.
"""

import numpy as np
import numpy.typing as npt

from config import CONFIG
from errors import ConfigurationError, InputError

Array = npt.NDArray[np.float64]
Labels = npt.NDArray[np.int64]

CLAMP = CONFIG.numeric.prob_clamp
_MIN_CLASSES = 2


def softmax(logits: Array) -> Array:
    """Row-wise softmax with max-logit subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(probs: Array, grad_probs: Array) -> Array:
    """Pull a gradient w.r.t. softmax outputs back to the logits."""
    inner = np.sum(grad_probs * probs, axis=-1, keepdims=True)
    return probs * (grad_probs - inner)


def check_labels(
    labels: npt.ArrayLike, num_rows: int, num_classes: int
) -> Labels:
    """Validate ``labels`` against the batch and return them as int64."""
    y = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if y.shape != (num_rows,):
        msg = f"expected {num_rows} labels, got shape {y.shape}"
        raise InputError(msg)
    if np.any(y < 0) or np.any(y >= num_classes):
        msg = f"labels must lie in [0, {num_classes}), got {y.tolist()}"
        raise InputError(msg)
    return y


def max_other(values: Array, labels: Labels) -> tuple[Array, Labels]:
    """Largest entry per row excluding the label column, and its index.

    Ties resolve to the lowest class index.
    """
    if values.shape[-1] < _MIN_CLASSES:
        msg = "margins need at least 2 classes"
        raise ConfigurationError(msg)
    rows = np.arange(values.shape[0])
    masked = values.copy()
    masked[rows, labels] = -np.inf
    idx = np.argmax(masked, axis=-1)
    return masked[rows, idx], idx


def _as_batch(values: npt.ArrayLike) -> tuple[Array, bool]:
    arr = np.asarray(values, dtype=np.float64)
    single = arr.ndim == 1
    return np.atleast_2d(arr), single


def _unbatch(values: Array, *, single: bool) -> float | Array:
    return float(values[0]) if single else values


def cross_entropy(probs: npt.ArrayLike, y: npt.ArrayLike) -> float | Array:
    """``-log p_y`` with ``p_y`` clamped to at least 1e-12."""
    p, single = _as_batch(probs)
    labels = check_labels(y, p.shape[0], p.shape[1])
    p_y = p[np.arange(p.shape[0]), labels]
    return _unbatch(-np.log(np.maximum(p_y, CLAMP)), single=single)


def kl_terms(p: Array, q: Array) -> Array:
    """Row-wise ``sum_k p_k log(p_k / max(q_k, clamp))``; 0 where p_k = 0."""
    log_p = np.log(p, out=np.zeros_like(p), where=p > 0)
    log_q = np.log(np.maximum(q, CLAMP))
    return np.sum(np.where(p > 0, p * (log_p - log_q), 0.0), axis=-1)


def kl_divergence(p: npt.ArrayLike, q: npt.ArrayLike) -> float | Array:
    """KL(p || q), never negative."""
    pb, single = _as_batch(p)
    qb, _ = _as_batch(q)
    if pb.shape != qb.shape:
        msg = f"KL needs matching shapes, got {pb.shape} and {qb.shape}"
        raise InputError(msg)
    return _unbatch(np.maximum(kl_terms(pb, qb), 0.0), single=single)


def boosted_cross_entropy(
    probs: npt.ArrayLike, y: npt.ArrayLike
) -> float | Array:
    """``-log p_y - log(1 - max_{k != y} p_k)``."""
    p, single = _as_batch(probs)
    labels = check_labels(y, p.shape[0], p.shape[1])
    p_y = p[np.arange(p.shape[0]), labels]
    runner_up, _ = max_other(p, labels)
    value = -np.log(np.maximum(p_y, CLAMP)) - np.log(
        np.maximum(1.0 - runner_up, CLAMP)
    )
    return _unbatch(value, single=single)


def misclassification_aware_kl(
    probs_adv: npt.ArrayLike, probs_nat: npt.ArrayLike, y: npt.ArrayLike
) -> float | Array:
    """``KL(p_adv || p_nat) * (1 - p_nat_y)``."""
    pa, single = _as_batch(probs_adv)
    pn, _ = _as_batch(probs_nat)
    if pa.shape != pn.shape:
        msg = f"MKL needs matching shapes, got {pa.shape} and {pn.shape}"
        raise InputError(msg)
    labels = check_labels(y, pn.shape[0], pn.shape[1])
    p_y = pn[np.arange(pn.shape[0]), labels]
    return _unbatch(kl_terms(pa, pn) * (1.0 - p_y), single=single)
