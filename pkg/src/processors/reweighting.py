"""Margin-driven instance weights with a burn-in period."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from errors import InputError
from models.config import AssignmentKind, WeightConfig
from network.functional import Array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightStats:
    minimum: float
    mean: float
    maximum: float
    std: float
    burn_in: bool

    @classmethod
    def of(cls, weights: Array, *, burn_in: bool) -> "WeightStats":
        return cls(
            minimum=float(np.min(weights)),
            mean=float(np.mean(weights)),
            maximum=float(np.max(weights)),
            std=float(np.std(weights)),
            burn_in=burn_in,
        )


@dataclass(frozen=True)
class WeightVector:
    """Per-instance weights of one batch."""

    weights: Array
    normalized: bool
    burn_in: bool = False

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    @property
    def stats(self) -> WeightStats:
        return WeightStats.of(self.weights, burn_in=self.burn_in)

    @classmethod
    def ones(cls, size: int, *, burn_in: bool = False) -> "WeightVector":
        return cls(weights=np.ones(size), normalized=True, burn_in=burn_in)


def pooled_stats(vectors: Sequence[WeightVector]) -> WeightStats:
    """Statistics over every weight of an epoch."""
    if not vectors:
        msg = "no weight vectors to summarise"
        raise InputError(msg)
    weights = np.concatenate([v.weights for v in vectors])
    return WeightStats.of(weights, burn_in=all(v.burn_in for v in vectors))


def assign_unnormalized(
    margin: npt.ArrayLike, cfg: WeightConfig
) -> float | Array:
    """Raw weight of each margin under ``cfg.assignment``.

    SIGMOID gives ``1 / (1 + exp(slope * (m - bias)))``, HINGE gives
    ``max(0, slope * (m - bias))`` and STEP gives ``step_alpha`` above the
    bias and ``1 - step_alpha`` otherwise.
    """
    m = np.asarray(margin, dtype=np.float64)
    shifted = m - cfg.bias
    if cfg.assignment is AssignmentKind.SIGMOID:
        with np.errstate(over="ignore"):
            out = 1.0 / (1.0 + np.exp(cfg.slope * shifted))
    elif cfg.assignment is AssignmentKind.HINGE:
        out = np.maximum(0.0, cfg.slope * shifted)
    else:
        out = np.where(shifted > 0, cfg.step_alpha, 1.0 - cfg.step_alpha)
    return float(out) if m.ndim == 0 else out


def normalize(
    unnormalized: npt.ArrayLike, batch_size: int | None = None
) -> WeightVector:
    """Rescale to sum ``m`` (mean 1).

    Equal inputs give exact ones. An all-zero input falls back to uniform
    weights with a warning.

    Raises:
        InputError: On negative or non-finite weights, or a size mismatch.
    """
    w = np.atleast_1d(np.asarray(unnormalized, dtype=np.float64))
    m = w.shape[0] if batch_size is None else batch_size
    if w.shape != (m,) or m == 0:
        msg = f"expected {m} unnormalized weights, got shape {w.shape}"
        raise InputError(msg)
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        msg = "unnormalized weights must be finite and non-negative"
        raise InputError(msg)
    total = float(np.sum(w))
    if total == 0.0:
        logger.warning(
            "All %d unnormalized weights are zero; using uniform weights", m
        )
        return WeightVector.ones(m)
    if np.all(w == w[0]):
        return WeightVector.ones(m)
    return WeightVector(weights=w * (m / total), normalized=True)


def effective_weights(
    margins: npt.ArrayLike, cfg: WeightConfig, epoch: int
) -> WeightVector:
    """Ones during the first ``cfg.burn_in_epochs`` epochs, then assigned.

    Raises:
        InputError: If ``epoch < 1``, or as ``normalize``.
    """
    if epoch < 1:
        msg = f"epochs are 1-based, got {epoch}"
        raise InputError(msg)
    values = np.atleast_1d(np.asarray(margins, dtype=np.float64))
    if epoch <= cfg.burn_in_epochs:
        return WeightVector.ones(values.shape[0], burn_in=True)
    return normalize(assign_unnormalized(values, cfg))
