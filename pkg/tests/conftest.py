import numpy as np
import pytest

from extractors import Dataset, generate
from models.config import (
    ObjectiveKind,
    SyntheticKind,
    SyntheticSpec,
    ThreatModel,
    TrainConfig,
)
from network import ModelParams


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_net() -> ModelParams:
    """2 -> 5 -> 4 -> 3 ReLU network."""
    return ModelParams.initialize((2, 5, 4, 3), seed=7)


@pytest.fixture
def linear_classifier() -> ModelParams:
    """Two-class linear model whose positive logit is ``x_0``."""
    return ModelParams(
        weights=(np.array([[0.0, 0.0], [1.0, 0.0]]),),
        biases=(np.zeros(2),),
    )


@pytest.fixture
def blobs() -> Dataset:
    return generate(
        SyntheticSpec(
            kind=SyntheticKind.GAUSSIAN_BLOBS,
            n_per_class=20,
            noise=0.3,
            num_classes=3,
            seed=3,
        )
    )


@pytest.fixture
def moons() -> Dataset:
    return generate(SyntheticSpec(n_per_class=40, noise=0.1, seed=0))


@pytest.fixture
def tiny_config() -> TrainConfig:
    """Three quick epochs, reweighting from epoch 2."""
    config = TrainConfig.desk_defaults(
        ObjectiveKind.MAIL_AT, epsilon=0.1, step_size=0.03
    )
    return config.model_copy(
        update={
            "epochs": 3,
            "batch_size": 16,
            "lr_drops": [],
            "hidden_layers": (8,),
            "threat": ThreatModel(epsilon=0.1),
            "attack": config.attack.model_copy(update={"steps": 3}),
            "weight": config.weight.model_copy(update={"burn_in_epochs": 1}),
        }
    )
