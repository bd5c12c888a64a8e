"""The adversarial training loop with margin-aware instance weights."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from attacks import Perturbation, generate_for_objective, threat_violations
from errors import ConfigurationError, NumericError, ThreatModelViolationError
from extractors.dataset import Dataset
from models.config import TrainConfig
from models.results import EpochRecord
from network.functional import Array, Labels
from network.mlp import ModelParams, predict
from processors.margins import measure
from processors.objectives import objective_loss
from processors.reweighting import (
    WeightVector,
    effective_weights,
    pooled_stats,
)
from training.log import write_train_log
from training.state import TrainState, checkpoint, sgd_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _BatchOutcome:
    loss: float
    natural_correct: int
    robust_correct: int
    weights: WeightVector


class Trainer:
    """Runs epochs of attack generation, reweighting and SGD."""

    def __init__(
        self, config: TrainConfig, snapshot_path: Path | None = None
    ) -> None:
        self.config = config
        self.snapshot_path = snapshot_path
        self.style = config.generation_style

    def layer_dims(self, dataset: Dataset) -> tuple[int, ...]:
        return (
            dataset.num_features,
            *self.config.hidden_layers,
            dataset.num_classes,
        )

    def init_state(self, dataset: Dataset) -> TrainState:
        return TrainState.initial(self.layer_dims(dataset), self.config)

    def _weights(
        self,
        params: ModelParams,
        batch: tuple[Array, Labels, Labels],
        perturbation: Perturbation,
        epoch: int,
    ) -> WeightVector:
        x, y, ids = batch
        kind = self.config.objective.kind
        if not kind.is_reweighted:
            return WeightVector.ones(len(y))
        weight_cfg = self.config.weight
        if epoch <= weight_cfg.burn_in_epochs:
            return WeightVector.ones(len(y), burn_in=True)
        margins = measure(
            weight_cfg.margin_kind, params, x, y, perturbation, ids
        )
        return effective_weights(margins.values, weight_cfg, epoch)

    def _train_batch(
        self,
        state: TrainState,
        batch: tuple[Array, Labels, Labels],
        epoch: int,
    ) -> tuple[TrainState, _BatchOutcome]:
        x, y, ids = batch
        cfg = self.config
        params = state.params
        perturbation = generate_for_objective(
            params,
            x,
            y,
            self.style,
            cfg.threat,
            cfg.attack,
            instance_ids=ids,
            keys=(epoch,),
        )
        violations = threat_violations(perturbation.delta, cfg.threat, x)
        if violations:
            msg = f"{violations} perturbations left the threat model"
            raise ThreatModelViolationError(msg, step=epoch)

        weights = self._weights(params, batch, perturbation, epoch)
        report = objective_loss(
            params, x, y, perturbation.delta, weights, cfg.objective
        )
        outcome = _BatchOutcome(
            loss=report.total,
            natural_correct=int(np.sum(predict(params, x) == y)),
            robust_correct=int(np.sum(perturbation.predictions[:, -1] == y)),
            weights=report.weights_used,
        )
        return sgd_step(state, report.grads, cfg), outcome

    def _snapshot(self, state: TrainState) -> None:
        if self.snapshot_path is None:
            return
        checkpoint(state, self.snapshot_path, self.config)
        logger.error("Wrote diagnostic snapshot to %s", self.snapshot_path)

    def train_epoch(self, state: TrainState, dataset: Dataset) -> TrainState:
        """One pass over ``dataset`` in a freshly shuffled order.

        Raises:
            NumericError: If a loss or gradient goes non-finite; the last
                good state is written to ``snapshot_path`` first.
        """
        cfg = self.config
        epoch = state.epoch + 1
        rng = state.generator()
        order = rng.permutation(len(dataset))
        outcomes: list[_BatchOutcome] = []
        for index, start in enumerate(range(0, len(dataset), cfg.batch_size)):
            rows = order[start : start + cfg.batch_size]
            batch = (
                dataset.inputs[rows],
                dataset.labels[rows],
                dataset.instance_ids[rows],
            )
            try:
                state, outcome = self._train_batch(state, batch, epoch)
            except NumericError as err:
                logger.exception(
                    "Epoch %d aborted at batch %d", epoch, index
                )
                self._snapshot(state)
                msg = f"epoch {epoch}, batch {index}: {err}"
                raise type(err)(msg, layer=err.layer, step=index) from err
            logger.debug(
                "Epoch %d batch %d loss %.6f", epoch, index, outcome.loss
            )
            outcomes.append(outcome)

        n = len(dataset)
        stats = pooled_stats([o.weights for o in outcomes])
        record = EpochRecord(
            epoch=epoch,
            lr=cfg.lr_at(epoch),
            mean_loss=sum(o.loss for o in outcomes) / n,
            natural_acc=100.0 * sum(o.natural_correct for o in outcomes) / n,
            robust_acc=100.0 * sum(o.robust_correct for o in outcomes) / n,
            weight_min=stats.minimum,
            weight_mean=stats.mean,
            weight_max=stats.maximum,
            weight_std=stats.std,
            burn_in=stats.burn_in,
            threat_violations=0,
        )
        return TrainState(
            params=state.params,
            velocity=state.velocity,
            epoch=epoch,
            rng_state=rng.bit_generator.state,
            history=(*state.history, record),
        )

    def fit(
        self,
        dataset: Dataset,
        *,
        epochs: int | None = None,
        state: TrainState | None = None,
        checkpoint_path: Path | None = None,
        log_path: Path | None = None,
    ) -> TrainState:
        """Train until ``epochs`` (default ``config.epochs``) are complete.

        Passing a restored ``state`` resumes the run; the checkpoint and
        the log are rewritten after every epoch. ``epochs=0`` trains
        nothing and returns the (initial or restored) state.

        Raises:
            ConfigurationError: If ``epochs`` is negative.
        """
        target = self.config.epochs if epochs is None else epochs
        if target < 0:
            msg = f"epochs must be non-negative, got {target}"
            raise ConfigurationError(msg)
        state = state or self.init_state(dataset)
        logger.info(
            "Training %s on %d instances: epochs %d..%d",
            self.config.objective.kind,
            len(dataset),
            state.epoch + 1,
            target,
        )
        while state.epoch < target:
            state = self.train_epoch(state, dataset)
            record = state.history[-1]
            logger.info(
                "Epoch %d | lr %.4g | loss %.4f | nat %.2f%% | rob %.2f%% "
                "| w [%.3f, %.3f]",
                record.epoch,
                record.lr,
                record.mean_loss,
                record.natural_acc,
                record.robust_acc,
                record.weight_min,
                record.weight_max,
            )
            if checkpoint_path is not None:
                checkpoint(state, checkpoint_path, self.config)
            if log_path is not None:
                write_train_log(log_path, state.history)
        return state


def train_epoch(
    state: TrainState, config: TrainConfig, dataset: Dataset
) -> TrainState:
    return Trainer(config).train_epoch(state, dataset)
