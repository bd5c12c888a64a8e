import logging

import numpy as np
import pytest

from errors import InputError
from models.config import AssignmentKind, WeightConfig
from processors import (
    WeightVector,
    assign_unnormalized,
    effective_weights,
    normalize,
    pooled_stats,
)

SIGMOID = WeightConfig(slope=10.0, bias=-0.5, burn_in_epochs=0)


def test_sigmoid_at_bias_is_half() -> None:
    assert assign_unnormalized(-0.5, SIGMOID) == 0.5


def test_sigmoid_reference_value() -> None:
    assert assign_unnormalized(-1.0, SIGMOID) == pytest.approx(
        0.9933071490757153, rel=1e-12
    )


def test_sigmoid_does_not_overflow() -> None:
    cfg = WeightConfig(slope=1e4, bias=0.0)
    out = assign_unnormalized(np.array([1.0, -1.0]), cfg)
    assert out.tolist() == [0.0, 1.0]


def test_step_assignment() -> None:
    cfg = WeightConfig(
        assignment=AssignmentKind.STEP, bias=0.0, step_alpha=0.2
    )
    out = assign_unnormalized(np.array([0.5, 0.0, -0.5]), cfg)
    assert out.tolist() == pytest.approx([0.2, 0.8, 0.8])


def test_hinge_assignment() -> None:
    cfg = WeightConfig(assignment=AssignmentKind.HINGE, slope=2.0, bias=0.0)
    out = assign_unnormalized(np.array([0.5, -0.5]), cfg)
    assert out.tolist() == [1.0, 0.0]


@pytest.mark.parametrize(
    "assignment", [AssignmentKind.SIGMOID, AssignmentKind.STEP]
)
def test_assignment_non_increasing_in_margin(
    assignment: AssignmentKind,
) -> None:
    cfg = WeightConfig(assignment=assignment, slope=3.0, bias=0.1)
    grid = np.linspace(-1.0, 1.0, 401)
    out = assign_unnormalized(grid, cfg)
    assert np.all(np.diff(out) <= 0)


def test_shift_consistency(rng: np.random.Generator) -> None:
    margins = rng.uniform(-1, 1, size=50)
    shift = 0.25
    base = WeightConfig(slope=4.0, bias=-0.5)
    shifted = WeightConfig(slope=4.0, bias=-0.5 + shift)
    assert np.allclose(
        assign_unnormalized(margins, base),
        assign_unnormalized(margins + shift, shifted),
        rtol=1e-12,
        atol=0,
    )


def test_normalize_arithmetic() -> None:
    vector = normalize(np.array([1.0, 1.0, 3.0]))
    assert vector.weights.tolist() == pytest.approx([0.6, 0.6, 1.8])
    assert vector.weights.sum() == pytest.approx(3.0)


def test_normalize_uniform_is_exactly_one() -> None:
    assert normalize(np.full(7, 0.37)).weights.tolist() == [1.0] * 7


def test_zero_slope_reproduces_unweighted_training() -> None:
    cfg = WeightConfig(slope=0.0)
    raw = assign_unnormalized(np.linspace(-1, 1, 9), cfg)
    assert normalize(raw).weights.tolist() == [1.0] * 9


def test_normalize_preserves_order(rng: np.random.Generator) -> None:
    raw = rng.uniform(0, 2, size=30)
    out = normalize(raw).weights
    assert np.array_equal(np.argsort(raw), np.argsort(out))
    assert np.all(out >= 0)


def test_all_zero_hinge_falls_back_to_uniform(
    caplog: pytest.LogCaptureFixture,
) -> None:
    cfg = WeightConfig(assignment=AssignmentKind.HINGE, slope=1.0, bias=2.0)
    raw = assign_unnormalized(np.array([0.1, 0.5, -0.3]), cfg)
    with caplog.at_level(logging.WARNING):
        vector = normalize(raw)
    assert vector.weights.tolist() == [1.0, 1.0, 1.0]
    assert "uniform" in caplog.text


@pytest.mark.parametrize("bad", [[-1.0, 2.0], [np.nan, 1.0], [np.inf, 1.0]])
def test_normalize_rejects_invalid(bad: list[float]) -> None:
    with pytest.raises(InputError):
        normalize(np.array(bad))


def test_normalize_batch_size_mismatch() -> None:
    with pytest.raises(InputError):
        normalize(np.ones(3), batch_size=4)


def test_burn_in_gives_ones() -> None:
    cfg = WeightConfig(burn_in_epochs=74)
    margins = np.array([-0.9, 0.1, 0.8])
    for epoch in (1, 74):
        vector = effective_weights(margins, cfg, epoch)
        assert vector.weights.tolist() == [1.0, 1.0, 1.0]
        assert vector.burn_in


def test_after_burn_in_weights_vary() -> None:
    cfg = WeightConfig(burn_in_epochs=74)
    vector = effective_weights(np.array([-0.9, 0.1, 0.8]), cfg, 75)
    assert not vector.burn_in
    assert len(set(vector.weights.tolist())) == 3
    assert vector.weights[0] > vector.weights[1] > vector.weights[2]


def test_epochs_are_one_based() -> None:
    with pytest.raises(InputError):
        effective_weights(np.zeros(2), SIGMOID, 0)


def test_pooled_stats() -> None:
    stats = pooled_stats(
        [
            WeightVector.ones(2, burn_in=True),
            WeightVector(np.array([0.5, 1.5]), normalized=True),
        ]
    )
    assert stats.minimum == 0.5
    assert stats.maximum == 1.5
    assert stats.mean == 1.0
    assert not stats.burn_in
