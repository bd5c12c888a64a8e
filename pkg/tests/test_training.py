import csv
from pathlib import Path

import numpy as np
import pytest

from attacks import generate_for_objective, threat_violations
from errors import (
    ConfigurationError,
    NumericError,
    SchemaError,
    ThreatModelViolationError,
)
from extractors import Dataset, generate
from models.config import (
    LrDrop,
    ObjectiveKind,
    SyntheticSpec,
    ThreatModel,
    TrainConfig,
)
from network import ModelParams, predict, save_params
from pipeline import clamp_to_data
from processors import standard_loss
from training import (
    LOG_COLUMNS,
    Trainer,
    TrainState,
    checkpoint,
    restore,
    sgd_step,
    train_epoch,
)


def _scalar_state(theta: float, velocity: float = 0.0) -> TrainState:
    params = ModelParams(weights=(np.array([[theta]]),), biases=(np.zeros(1),))
    moment = ModelParams(
        weights=(np.array([[velocity]]),), biases=(np.zeros(1),)
    )
    return TrainState(params=params, velocity=moment, epoch=0, rng_state={})


def _scalar_grad(value: float) -> ModelParams:
    return ModelParams(weights=(np.array([[value]]),), biases=(np.zeros(1),))


def _config(**update: object) -> TrainConfig:
    base = TrainConfig(lr=0.1, lr_drops=[], momentum=0.0, weight_decay=0.0)
    return base.model_copy(update=update)


def test_plain_gradient_step(blobs: Dataset) -> None:
    config = _config()
    state = TrainState.initial((2, 4, 3), config)
    report = standard_loss(state.params, blobs.inputs, blobs.labels)
    stepped = sgd_step(state, report.grads, config)
    expected = state.params.flatten() - 0.1 * report.grads.flatten()
    assert np.array_equal(stepped.params.flatten(), expected)


def test_zero_gradient_keeps_params() -> None:
    config = _config(momentum=0.9)
    state = _scalar_state(1.5)
    for _ in range(3):
        state = sgd_step(state, _scalar_grad(0.0), config)
    assert state.params.weights[0][0, 0] == 1.5


def test_momentum_unrolled_by_hand() -> None:
    config = _config(momentum=0.9, weight_decay=0.01)
    state = _scalar_state(1.0)
    g1, g2 = 0.5, -0.25
    state = sgd_step(state, _scalar_grad(g1), config)
    v1 = g1 + 0.01 * 1.0
    theta1 = 1.0 - 0.1 * v1
    assert state.params.weights[0][0, 0] == pytest.approx(theta1, rel=1e-15)
    state = sgd_step(state, _scalar_grad(g2), config)
    v2 = 0.9 * v1 + g2 + 0.01 * theta1
    theta2 = theta1 - 0.1 * v2
    assert state.velocity.weights[0][0, 0] == pytest.approx(v2, rel=1e-15)
    assert state.params.weights[0][0, 0] == pytest.approx(theta2, rel=1e-15)


def test_non_finite_gradient_is_rejected() -> None:
    with pytest.raises(NumericError):
        sgd_step(_scalar_state(1.0), _scalar_grad(np.nan), _config())


def test_velocity_must_match_params() -> None:
    params = ModelParams.initialize((2, 3))
    with pytest.raises(ConfigurationError):
        TrainState(
            params=params,
            velocity=ModelParams.initialize((2, 4)),
            epoch=0,
            rng_state={},
        )


def test_learning_rate_schedule() -> None:
    config = TrainConfig(
        lr=0.01,
        lr_drops=[
            LrDrop(epoch=75, divisor=10.0),
            LrDrop(epoch=90, divisor=10.0),
        ],
    )
    assert config.lr_at(1) == 0.01
    assert config.lr_at(74) == 0.01
    assert config.lr_at(75) == pytest.approx(1e-3)
    assert config.lr_at(89) == pytest.approx(1e-3)
    assert config.lr_at(90) == pytest.approx(1e-4)
    assert config.lr_at(100) == pytest.approx(1e-4)


def test_cifar_defaults() -> None:
    config = TrainConfig.cifar_defaults(ObjectiveKind.MAIL_AT)
    assert config.weight.burn_in_epochs == 74
    assert config.momentum == 0.9
    assert [d.epoch for d in config.lr_drops] == [75, 90]
    assert config.threat.epsilon == 8 / 255


def test_checkpoint_roundtrip(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path
) -> None:
    state = Trainer(tiny_config).fit(blobs, epochs=1)
    path = checkpoint(state, tmp_path / "state.ckpt", tiny_config)
    loaded = restore(path)
    assert np.array_equal(loaded.params.flatten(), state.params.flatten())
    assert np.array_equal(loaded.velocity.flatten(), state.velocity.flatten())
    assert loaded.epoch == 1
    assert loaded.rng_state == state.rng_state
    assert loaded.history == state.history


def test_restore_rejects_other_architecture(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path
) -> None:
    state = Trainer(tiny_config).init_state(blobs)
    path = checkpoint(state, tmp_path / "state.ckpt")
    with pytest.raises(SchemaError):
        restore(path, expected_dims=(2, 16, 3))


def test_restore_rejects_bare_parameter_file(tmp_path) -> None:
    params = ModelParams.initialize((2, 3))
    path = save_params(tmp_path / "model.ckpt", params)
    with pytest.raises(SchemaError):
        restore(path)


def test_training_is_deterministic(
    blobs: Dataset, tiny_config: TrainConfig
) -> None:
    first = Trainer(tiny_config).fit(blobs)
    second = Trainer(tiny_config).fit(blobs)
    assert np.array_equal(first.params.flatten(), second.params.flatten())
    assert first.history == second.history


def test_resume_matches_uninterrupted_run(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path
) -> None:
    straight = tmp_path / "straight"
    resumed = tmp_path / "resumed"
    Trainer(tiny_config).fit(
        blobs,
        checkpoint_path=straight / "model.ckpt",
        log_path=straight / "log.csv",
    )
    trainer = Trainer(tiny_config)
    trainer.fit(
        blobs,
        epochs=2,
        checkpoint_path=resumed / "model.ckpt",
        log_path=resumed / "log.csv",
    )
    state = restore(resumed / "model.ckpt")
    trainer.fit(
        blobs,
        state=state,
        checkpoint_path=resumed / "model.ckpt",
        log_path=resumed / "log.csv",
    )
    assert (straight / "log.csv").read_bytes() == (
        resumed / "log.csv"
    ).read_bytes()
    assert (straight / "model.ckpt").read_bytes() == (
        resumed / "model.ckpt"
    ).read_bytes()


def test_history_marks_burn_in(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path
) -> None:
    log = tmp_path / "log.csv"
    state = Trainer(tiny_config).fit(blobs, log_path=log)
    first, *later = state.history
    assert first.burn_in
    assert first.weight_min == first.weight_max == 1.0
    assert all(not record.burn_in for record in later)
    assert any(record.weight_std > 0 for record in later)
    with log.open() as f:
        rows = list(csv.DictReader(f))
    assert tuple(rows[0]) == LOG_COLUMNS
    assert [int(r["epoch"]) for r in rows] == [1, 2, 3]


def test_module_level_train_epoch(
    blobs: Dataset, tiny_config: TrainConfig
) -> None:
    state = Trainer(tiny_config).init_state(blobs)
    after = train_epoch(state, tiny_config, blobs)
    assert after.epoch == 1
    assert len(after.history) == 1
    assert after.rng_state != state.rng_state



def test_desk_defaults() -> None:
    config = TrainConfig.desk_defaults(ObjectiveKind.MAIL_AT)
    assert config.lr == 1e-3
    assert (config.weight.slope, config.weight.bias) == (2.0, 0.0)
    assert config.weight.burn_in_epochs == 15
    assert [d.epoch for d in config.lr_drops] == [23, 27]
    retargeted = config.with_objective(ObjectiveKind.MAIL_TRADES)
    assert retargeted.weight == config.weight
    assert retargeted.objective.tradeoff == 5.0


def test_fit_with_zero_epochs_trains_nothing(
    blobs: Dataset, tiny_config: TrainConfig
) -> None:
    trainer = Trainer(tiny_config)
    state = trainer.fit(blobs, epochs=0)
    assert state.epoch == 0
    assert len(state.history) == 0
    assert np.array_equal(
        state.params.flatten(), trainer.init_state(blobs).params.flatten()
    )


def test_fit_rejects_negative_epochs(
    blobs: Dataset, tiny_config: TrainConfig
) -> None:
    with pytest.raises(ConfigurationError):
        Trainer(tiny_config).fit(blobs, epochs=-1)


def test_restore_checks_the_run_configuration(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path: Path
) -> None:
    state = Trainer(tiny_config).fit(blobs, epochs=1)
    path = checkpoint(state, tmp_path / "state.ckpt", tiny_config)
    longer = tiny_config.model_copy(update={"epochs": 6})
    assert restore(path, expected_config=longer).epoch == 1
    wider = tiny_config.model_copy(
        update={"threat": ThreatModel(epsilon=0.2)}
    )
    with pytest.raises(ConfigurationError, match="threat"):
        restore(path, expected_config=wider)


def test_restore_needs_a_recorded_configuration(
    blobs: Dataset, tiny_config: TrainConfig, tmp_path: Path
) -> None:
    state = Trainer(tiny_config).init_state(blobs)
    path = checkpoint(state, tmp_path / "state.ckpt")
    with pytest.raises(SchemaError):
        restore(path, expected_config=tiny_config)


@pytest.mark.parametrize(
    "kind",
    [
        ObjectiveKind.MAIL_AT,
        ObjectiveKind.MAIL_TRADES,
        ObjectiveKind.MAIL_MART,
    ],
)
def test_burn_in_reproduces_baseline_for_five_epochs(
    kind: ObjectiveKind,
) -> None:
    moons = generate(SyntheticSpec())
    mail = TrainConfig.desk_defaults(kind).model_copy(update={"epochs": 5})
    base = mail.with_objective(kind.base)
    assert mail.weight.burn_in_epochs >= mail.epochs
    reweighted = Trainer(mail).fit(moons)
    plain = Trainer(base).fit(moons)
    assert np.array_equal(
        reweighted.params.flatten(), plain.params.flatten()
    )
    assert np.array_equal(
        reweighted.velocity.flatten(), plain.velocity.flatten()
    )
    assert [r.mean_loss for r in reweighted.history] == [
        r.mean_loss for r in plain.history
    ]
    assert all(r.burn_in for r in reweighted.history)


def test_boxed_training_stays_inside_the_domain(
    tiny_config: TrainConfig,
) -> None:
    rng = np.random.default_rng(11)
    inputs = rng.uniform(0.0, 1.0, size=(64, 2))
    boxed = Dataset(
        inputs=inputs,
        labels=(inputs[:, 0] > inputs[:, 1]).astype(np.int64),
        num_classes=2,
        domain_box=(0.0, 1.0),
    )
    config = clamp_to_data(tiny_config, boxed)
    state = Trainer(config).fit(boxed)
    assert [r.threat_violations for r in state.history] == [0, 0, 0]

    perturbation = generate_for_objective(
        state.params,
        boxed.inputs,
        boxed.labels,
        config.generation_style,
        config.threat,
        config.attack,
    )
    assert threat_violations(perturbation.delta, config.threat, inputs) == 0
    adversarial = inputs + perturbation.delta
    assert adversarial.min() >= 0.0
    assert adversarial.max() <= 1.0


def test_threat_violation_aborts_with_snapshot(
    blobs: Dataset,
    tiny_config: TrainConfig,
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    monkeypatch.setattr(
        "training.trainer.threat_violations", lambda *_args: 2
    )
    snapshot = tmp_path / "snapshot.ckpt"
    trainer = Trainer(tiny_config, snapshot_path=snapshot)
    with pytest.raises(ThreatModelViolationError, match="threat model"):
        trainer.fit(blobs)
    assert restore(snapshot).epoch == 0


def _train_accuracy(params: ModelParams, dataset: Dataset) -> float:
    correct = predict(params, dataset.inputs) == dataset.labels
    return 100.0 * float(np.mean(correct))


@pytest.mark.slow
def test_desk_defaults_fit_two_moons() -> None:
    moons = generate(SyntheticSpec())
    config = TrainConfig.desk_defaults(ObjectiveKind.STANDARD)
    mlp = Trainer(config).fit(moons)
    linear_config = config.model_copy(update={"hidden_layers": ()})
    linear = Trainer(linear_config).fit(moons)
    assert mlp.history[-1].natural_acc > mlp.history[0].natural_acc
    assert _train_accuracy(mlp.params, moons) > 99.0
    assert _train_accuracy(linear.params, moons) < 100.0
