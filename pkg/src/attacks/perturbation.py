"""Result of an attack run together with its per-step trace."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from errors import InputError
from network.functional import Array, Labels
from utils.file_operations import write_csv

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("instance_id", "step", "loss", "predicted_class", "crossed")


@dataclass(frozen=True)
class Perturbation:
    """Final perturbations of a batch plus the path that produced them.

    Trace position 0 holds the start point ``delta^(0)`` and position ``t``
    the state after step ``t``, so ``losses`` and ``predictions`` have
    ``steps + 1`` columns. ``crossed_at`` is the first position whose
    prediction differs from the label, or -1 if the attack never succeeded.
    """

    delta: Array
    delta_at_cross: Array
    labels: Labels
    losses: Array
    predictions: npt.NDArray[np.int64]
    crossed_at: npt.NDArray[np.int64]

    def __post_init__(self) -> None:
        if self.losses.ndim != 2 or self.losses.shape[1] == 0:  # noqa: PLR2004
            msg = "perturbation trace is empty"
            raise InputError(msg)

    @property
    def num_instances(self) -> int:
        return self.delta.shape[0]

    @property
    def max_steps(self) -> int:
        return self.losses.shape[1] - 1

    @property
    def crossed(self) -> npt.NDArray[np.bool_]:
        return self.crossed_at >= 0

    def lps(self) -> npt.NDArray[np.int64]:
        """Least steps to a wrong prediction; ``max_steps`` if never."""
        return np.where(self.crossed, self.crossed_at, self.max_steps)


def write_trace_csv(
    path: Path,
    perturbation: Perturbation,
    instance_ids: npt.ArrayLike | None = None,
) -> Path:
    """Dump one row per (instance, trace position)."""
    ids = (
        np.arange(perturbation.num_instances)
        if instance_ids is None
        else np.asarray(instance_ids)
    )
    if ids.shape != (perturbation.num_instances,):
        msg = (
            f"got {ids.size} instance ids for "
            f"{perturbation.num_instances} instances"
        )
        raise InputError(msg)
    wrong = perturbation.predictions != perturbation.labels[:, None]
    rows = [
        (
            int(ids[i]),
            step,
            float(perturbation.losses[i, step]),
            int(perturbation.predictions[i, step]),
            bool(wrong[i, step]),
        )
        for i in range(perturbation.num_instances)
        for step in range(perturbation.max_steps + 1)
    ]
    logger.info("Writing %d trace rows to %s", len(rows), path)
    return write_csv(path, TRACE_COLUMNS, rows)
