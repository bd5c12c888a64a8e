import csv

import numpy as np
import pytest

from attacks import pgd
from errors import ConfigurationError
from models.config import AttackConfig, MarginKind, ThreatModel
from network import ModelParams, softmax
from processors import (
    lps,
    measure,
    mm,
    pm,
    pm_adv,
    pm_dif,
    pm_nat,
    write_margin_csv,
)


@pytest.mark.parametrize(
    ("probs", "expected"),
    [
        ([0.5, 0.5], 0.0),
        ([0.6, 0.4], 0.2),
        ([0.4, 0.6], -0.2),
    ],
)
def test_pm_anchor_values(probs: list[float], expected: float) -> None:
    assert pm(np.array(probs), 0) == pytest.approx(expected, abs=1e-15)


def test_pm_needs_two_classes() -> None:
    with pytest.raises(ConfigurationError):
        pm(np.array([1.0]), 0)


def test_mm_values() -> None:
    assert mm(np.array([2.0, 1.0, 0.0]), 0) == 1.0
    assert mm(np.array([0.7, 0.7, 0.7]), 2) == 0.0


def test_mm_and_pm_share_sign(rng: np.random.Generator) -> None:
    logits = rng.normal(size=(200, 4))
    y = rng.integers(0, 4, size=200)
    assert np.array_equal(
        np.sign(mm(logits, y)), np.sign(pm(softmax(logits), y))
    )


def test_pm_positive_iff_prediction_correct(
    rng: np.random.Generator,
) -> None:
    probs = softmax(rng.normal(size=(100, 3)))
    y = rng.integers(0, 3, size=100)
    assert np.array_equal(pm(probs, y) > 0, np.argmax(probs, axis=1) == y)


def test_pm_adv_at_zero_delta_equals_pm_nat(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    x = rng.normal(size=(9, 2))
    y = rng.integers(0, 3, size=9)
    nat = pm_nat(small_net, x, y)
    adv = pm_adv(small_net, x, np.zeros_like(x), y)
    assert np.array_equal(nat.values, adv.values)
    assert np.all(np.abs(nat.values) <= 1.0)


def test_pm_adv_depends_only_on_endpoint(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    x = rng.normal(size=(9, 2))
    y = rng.integers(0, 3, size=9)
    delta = rng.uniform(-0.1, 0.1, size=x.shape)
    first = pm_adv(small_net, x, delta, y).values
    second = pm_adv(small_net, x, delta.copy(), y).values
    assert np.array_equal(first, second)


def test_pm_dif_zero_and_bounded(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    x = rng.normal(size=(9, 2))
    y = rng.integers(0, 3, size=9)
    assert not np.any(pm_dif(small_net, x, np.zeros_like(x), y).values)
    delta = rng.uniform(-1, 1, size=x.shape)
    values = pm_dif(small_net, x, delta, y).values
    assert np.all((values >= -1) & (values <= 1))


def test_lps_of_crafted_linear_case(linear_classifier: ModelParams) -> None:
    result = pgd(
        linear_classifier,
        np.array([[0.05, 0.0], [-0.5, 0.0], [5.0, 0.0]]),
        [1, 1, 1],
        ThreatModel(epsilon=0.1),
        AttackConfig(steps=10, step_size=0.03, rand_init=False),
    )
    scores = lps(result, [7, 8, 9])
    assert scores.values.tolist() == [2.0, 0.0, 10.0]
    assert scores.kind is MarginKind.LPS
    assert [r.instance_id for r in scores.records()] == [7, 8, 9]


def test_measure_dispatch(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    x = rng.normal(size=(6, 2))
    y = rng.integers(0, 3, size=6)
    result = pgd(small_net, x, y, ThreatModel(epsilon=0.1), AttackConfig())
    for kind in MarginKind:
        scores = measure(kind, small_net, x, y, result)
        assert scores.kind is kind
        assert len(scores) == 6
    assert np.array_equal(
        measure(MarginKind.PM_ADV, small_net, x, y, result).values,
        pm_adv(small_net, x, result.delta, y).values,
    )


def test_margin_csv(small_net: ModelParams, tmp_path) -> None:
    x = np.array([[0.1, 0.2], [0.3, -0.4]])
    scores = pm_nat(small_net, x, [0, 1], [5, 6])
    path = write_margin_csv(tmp_path / "margins.csv", [scores], epoch=3)
    with path.open() as f:
        rows = list(csv.DictReader(f))
    assert [r["instance_id"] for r in rows] == ["5", "6"]
    assert {r["kind"] for r in rows} == {"PM_NAT"}
    assert {r["epoch"] for r in rows} == {"3"}
