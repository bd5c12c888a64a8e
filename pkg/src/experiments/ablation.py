"""Seed-averaged training cells: ablation tables and method comparison."""

import logging
from collections.abc import Sequence

from experiments.evaluation import aggregate, eval_robustness
from extractors.dataset import Dataset
from models.config import (
    AblationMatrix,
    AttackSuite,
    ObjectiveKind,
    TrainConfig,
)
from models.results import ExperimentReport, MethodMetrics
from training import Trainer

logger = logging.getLogger(__name__)

COMPARED_OBJECTIVES = (
    ObjectiveKind.STANDARD,
    ObjectiveKind.AT,
    ObjectiveKind.MAIL_AT,
)


def run_seeds(  # noqa: PLR0913
    config: TrainConfig,
    train: Dataset,
    test: Dataset,
    suite: AttackSuite,
    seeds: Sequence[int],
    method: str,
) -> MethodMetrics:
    """Train one model per seed and average its evaluation row."""
    rows = []
    for seed in seeds:
        logger.info("Cell %s, seed %d", method, seed)
        state = Trainer(config.with_seed(seed)).fit(train)
        rows.append(eval_robustness(state.params, test, suite, method))
    return aggregate(method, rows)


def _report(
    name: str,
    base: TrainConfig,
    suite: AttackSuite,
    methods: list[MethodMetrics],
) -> ExperimentReport:
    return ExperimentReport(
        name=name,
        config=base.model_dump(mode="json"),
        pgd_steps=suite.steps,
        methods=methods,
    )


def margin_table(
    matrix: AblationMatrix,
    base: TrainConfig,
    data: tuple[Dataset, Dataset],
    suite: AttackSuite,
) -> ExperimentReport:
    """One column per margin source feeding the weights (MM vs PM)."""
    config = base.with_objective(matrix.base_objective)
    methods = [
        run_seeds(
            config.model_copy(
                update={
                    "weight": config.weight.model_copy(
                        update={"margin_kind": kind}
                    )
                }
            ),
            *data,
            suite,
            matrix.seeds,
            str(kind),
        )
        for kind in matrix.margin_kinds
    ]
    return _report("margin", config, suite, methods)


def assignment_table(
    matrix: AblationMatrix,
    base: TrainConfig,
    data: tuple[Dataset, Dataset],
    suite: AttackSuite,
) -> ExperimentReport:
    config = base.with_objective(matrix.base_objective)
    methods = [
        run_seeds(
            config.model_copy(
                update={
                    "weight": config.weight.model_copy(
                        update={"assignment": assignment}
                    )
                }
            ),
            *data,
            suite,
            matrix.seeds,
            str(assignment),
        )
        for assignment in matrix.assignments
    ]
    return _report("assignment", config, suite, methods)


def generation_table(
    matrix: AblationMatrix,
    base: TrainConfig,
    data: tuple[Dataset, Dataset],
    suite: AttackSuite,
) -> ExperimentReport:
    """Objectives crossed with the perturbation generator (CE, CW, KL)."""
    methods = []
    for kind in matrix.generation_objectives:
        config = base.with_objective(kind)
        for style in matrix.generations:
            cell = config.model_copy(update={"generation": style})
            name = f"{kind}/{style.attack_loss}"
            methods.append(
                run_seeds(cell, *data, suite, matrix.seeds, name)
            )
    return _report("generation", base, suite, methods)


def ablation_suite(
    matrix: AblationMatrix,
    base: TrainConfig,
    train: Dataset,
    test: Dataset,
    suite: AttackSuite,
) -> list[ExperimentReport]:
    """Every non-empty axis of ``matrix`` as its own table.

    Cells share seeds, so cells that differ only after burn-in have
    identical burn-in trajectories.
    """
    data = (train, test)
    reports = []
    if matrix.margin_kinds:
        reports.append(margin_table(matrix, base, data, suite))
    if matrix.assignments:
        reports.append(assignment_table(matrix, base, data, suite))
    if matrix.generations and matrix.generation_objectives:
        reports.append(generation_table(matrix, base, data, suite))
    return reports


def compare(
    base: TrainConfig,
    train: Dataset,
    test: Dataset,
    suite: AttackSuite,
    seeds: Sequence[int],
    objectives: Sequence[ObjectiveKind] = COMPARED_OBJECTIVES,
) -> ExperimentReport:
    """Standard training, AT and MAIL-AT on the same seeds."""
    methods = [
        run_seeds(
            base.with_objective(kind), train, test, suite, seeds, str(kind)
        )
        for kind in objectives
    ]
    return _report("compare", base, suite, methods)
