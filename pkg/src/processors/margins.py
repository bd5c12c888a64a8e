"""Geometric measurements of how close instances sit to the boundary.

Probabilistic margins (PM) compare class posteriors, the multi-class
margin (MM) compares raw logits, and LPS counts attack steps until the
prediction flips.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from attacks.perturbation import Perturbation
from errors import ConfigurationError, InputError
from models.config import MarginKind
from models.results import MarginScore
from network.functional import Array, check_labels, max_other
from network.mlp import ModelParams, as_batch, forward, forward_cached
from utils.file_operations import write_csv

logger = logging.getLogger(__name__)

MARGIN_COLUMNS = ("instance_id", "kind", "value", "epoch")

Ids = npt.NDArray[np.int64]


@dataclass(frozen=True)
class MarginScores:
    """Batched margin values of one kind."""

    kind: MarginKind
    values: Array
    instance_ids: Ids

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def records(self, epoch: int | None = None) -> list[MarginScore]:
        return [
            MarginScore(
                kind=self.kind,
                value=float(value),
                instance_id=int(instance_id),
                epoch=epoch,
            )
            for value, instance_id in zip(
                self.values, self.instance_ids, strict=True
            )
        ]


def _ids(n: int, instance_ids: npt.ArrayLike | None) -> Ids:
    if instance_ids is None:
        return np.arange(n, dtype=np.int64)
    ids = np.asarray(instance_ids, dtype=np.int64)
    if ids.shape != (n,):
        msg = f"got {ids.size} instance ids for {n} instances"
        raise InputError(msg)
    return ids


def _gap(values: npt.ArrayLike, y: npt.ArrayLike) -> float | Array:
    arr = np.asarray(values, dtype=np.float64)
    batch = np.atleast_2d(arr)
    if batch.shape[-1] < 2:  # noqa: PLR2004
        msg = "margins need at least 2 classes"
        raise ConfigurationError(msg)
    labels = check_labels(y, batch.shape[0], batch.shape[1])
    runner_up, _ = max_other(batch, labels)
    gap = batch[np.arange(batch.shape[0]), labels] - runner_up
    return float(gap[0]) if arr.ndim == 1 else gap


def pm(probs: npt.ArrayLike, y: npt.ArrayLike) -> float | Array:
    """Probabilistic margin ``p_y - max_{j != y} p_j``."""
    return _gap(probs, y)


def mm(logits: npt.ArrayLike, y: npt.ArrayLike) -> float | Array:
    """Multi-class margin ``z_y - max_{j != y} z_j`` in logit space."""
    return _gap(logits, y)


def _probs(params: ModelParams, x: Array) -> Array:
    _, probs = forward(params, x)
    return probs


def pm_nat(
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    instance_ids: npt.ArrayLike | None = None,
) -> MarginScores:
    xb = as_batch(params, x)
    values = np.atleast_1d(pm(_probs(params, xb), y))
    return MarginScores(MarginKind.PM_NAT, values, _ids(len(xb), instance_ids))


def pm_adv(
    params: ModelParams,
    x: npt.ArrayLike,
    delta: npt.ArrayLike,
    y: npt.ArrayLike,
    instance_ids: npt.ArrayLike | None = None,
) -> MarginScores:
    """PM at the attack endpoint; depends on ``delta`` only, not the path."""
    xb = as_batch(params, x)
    adv = xb + np.asarray(delta, dtype=np.float64)
    values = np.atleast_1d(pm(_probs(params, adv), y))
    return MarginScores(MarginKind.PM_ADV, values, _ids(len(xb), instance_ids))


def pm_dif(
    params: ModelParams,
    x: npt.ArrayLike,
    delta_at_lps: npt.ArrayLike,
    y: npt.ArrayLike,
    instance_ids: npt.ArrayLike | None = None,
) -> MarginScores:
    """``p_y(x) - p_y(x + delta)`` at the first-crossing perturbation."""
    xb = as_batch(params, x)
    labels = check_labels(y, xb.shape[0], params.num_classes)
    rows = np.arange(xb.shape[0])
    clean = _probs(params, xb)[rows, labels]
    adv = xb + np.asarray(delta_at_lps, dtype=np.float64)
    attacked = _probs(params, adv)[rows, labels]
    return MarginScores(
        MarginKind.PM_DIF, clean - attacked, _ids(len(xb), instance_ids)
    )


def mm_adv(
    params: ModelParams,
    x: npt.ArrayLike,
    delta: npt.ArrayLike,
    y: npt.ArrayLike,
    instance_ids: npt.ArrayLike | None = None,
) -> MarginScores:
    """MM on the adversarial logits (same endpoint as ``pm_adv``)."""
    xb = as_batch(params, x)
    adv = xb + np.asarray(delta, dtype=np.float64)
    logits = forward_cached(params, adv).logits
    values = np.atleast_1d(mm(logits, y))
    return MarginScores(MarginKind.MM, values, _ids(len(xb), instance_ids))


def lps(
    perturbation: Perturbation, instance_ids: npt.ArrayLike | None = None
) -> MarginScores:
    """Least PGD steps; 0 if already wrong, the step budget if never."""
    values = perturbation.lps().astype(np.float64)
    return MarginScores(
        MarginKind.LPS,
        values,
        _ids(perturbation.num_instances, instance_ids),
    )


def measure(  # noqa: PLR0911
    kind: MarginKind,
    params: ModelParams,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    perturbation: Perturbation,
    instance_ids: npt.ArrayLike | None = None,
) -> MarginScores:
    """Dispatch to the measurement named by ``kind``."""
    if kind is MarginKind.PM_NAT:
        return pm_nat(params, x, y, instance_ids)
    if kind is MarginKind.PM_ADV:
        return pm_adv(params, x, perturbation.delta, y, instance_ids)
    if kind is MarginKind.PM_DIF:
        return pm_dif(
            params, x, perturbation.delta_at_cross, y, instance_ids
        )
    if kind is MarginKind.MM:
        return mm_adv(params, x, perturbation.delta, y, instance_ids)
    return lps(perturbation, instance_ids)


def write_margin_csv(
    path: Path, scores: Iterable[MarginScores], epoch: int | None = None
) -> Path:
    """One ``(instance_id, kind, value, epoch)`` row per measurement."""
    rows = [
        (record.instance_id, record.kind, record.value, record.epoch)
        for batch in scores
        for record in batch.records(epoch)
    ]
    logger.info("Writing %d margin rows to %s", len(rows), path)
    return write_csv(path, MARGIN_COLUMNS, rows)
