"""White-box robustness evaluation: NAT, PGD-k and CW-k accuracies."""

import logging
from collections.abc import Sequence

import numpy as np

from attacks import pgd
from errors import InputError
from extractors.dataset import Dataset
from models.config import AttackLoss, AttackSuite, EvalAttack
from models.results import MethodMetrics
from network.mlp import ModelParams, predict

logger = logging.getLogger(__name__)

_ATTACK_LOSS = {EvalAttack.PGD: AttackLoss.CE, EvalAttack.CW: AttackLoss.CW}


def robust_accuracy(
    params: ModelParams, dataset: Dataset, suite: AttackSuite, kind: EvalAttack
) -> float:
    """Percent of instances the attack never flips at any step.

    Counting a flip at any trace position makes more steps never weaker
    than fewer steps from the same start.
    """
    if kind is EvalAttack.NAT:
        correct = predict(params, dataset.inputs) == dataset.labels
        return 100.0 * float(np.mean(correct))
    perturbation = pgd(
        params,
        dataset.inputs,
        dataset.labels,
        suite.threat,
        suite.attack_config(_ATTACK_LOSS[kind]),
        instance_ids=dataset.instance_ids,
    )
    return 100.0 * float(np.mean(~perturbation.crossed))


def eval_robustness(
    params: ModelParams,
    dataset: Dataset,
    suite: AttackSuite,
    method: str = "model",
) -> MethodMetrics:
    """One metric row; attacks missing from ``suite.attacks`` stay empty.

    Raises:
        InputError: If ``dataset`` is empty.
    """
    if len(dataset) == 0:
        msg = "cannot evaluate on an empty dataset"
        raise InputError(msg)
    scores = {
        kind.value.lower(): robust_accuracy(params, dataset, suite, kind)
        for kind in suite.attacks
    }
    logger.info(
        "%s: %s",
        method,
        ", ".join(f"{k.upper()} {v:.2f}%" for k, v in scores.items()),
    )
    return MethodMetrics(method=method, **scores)


def aggregate(method: str, rows: Sequence[MethodMetrics]) -> MethodMetrics:
    """Seed mean and (population) standard deviation of each column."""
    if not rows:
        msg = f"no runs to aggregate for {method}"
        raise InputError(msg)
    values: dict[str, float] = {}
    for column in ("nat", "pgd", "cw"):
        present = [getattr(r, column) for r in rows]
        if any(v is None for v in present):
            continue
        values[column] = float(np.mean(present))
        values[f"{column}_std"] = float(np.std(present))
    return MethodMetrics(method=method, seeds=len(rows), **values)
