import json
import math
import struct

import numpy as np
import pytest
from gradcheck import (
    GRADIENT_DRAWS,
    numeric_gradient,
    param_gradient,
    relative_error,
)

from errors import ConfigurationError, InputError, ParseError, SchemaError
from network import (
    ModelParams,
    backward,
    cross_entropy,
    decode_checkpoint,
    encode_checkpoint,
    forward,
    kl_divergence,
    load_params,
    loss_value,
    misclassification_aware_kl,
    predict,
    save_params,
    softmax,
)
from network.losses import (
    BoostedCrossEntropyLoss,
    CompositeLoss,
    ConstantLoss,
    CrossEntropyLoss,
    KLDivergenceLoss,
    KLToReferenceLoss,
    MarginLoss,
    MisclassificationAwareKLLoss,
)


def test_softmax_uniform_for_equal_logits() -> None:
    probs = softmax(np.full(4, 3.7))
    assert np.allclose(probs, 0.25, atol=0, rtol=1e-15)


def test_softmax_two_class_closed_form() -> None:
    a, c = 0.3, 1.2
    probs = softmax(np.array([a, a + c]))
    assert probs[0] == pytest.approx(1 / (1 + math.exp(c)), rel=1e-12)
    assert probs[1] == pytest.approx(math.exp(c) / (1 + math.exp(c)))


def test_softmax_translation_invariant(rng: np.random.Generator) -> None:
    z = rng.normal(size=(5, 4))
    assert np.array_equal(softmax(z), softmax(z + 17.0))


def test_forward_probs_sum_to_one(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    _, probs = forward(small_net, rng.normal(size=(20, 2)))
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-9)


def test_forward_rejects_wrong_dimension(small_net: ModelParams) -> None:
    with pytest.raises(ConfigurationError):
        forward(small_net, np.zeros(3))


def test_cross_entropy_values() -> None:
    assert cross_entropy(np.array([0.0, 1.0]), 1) == 0.0
    assert cross_entropy(np.array([0.5, 0.5]), 0) == pytest.approx(
        0.6931471805599453
    )
    assert cross_entropy(np.array([1.0, 0.0]), 1) == pytest.approx(
        -math.log(1e-12)
    )


def test_cross_entropy_label_out_of_range() -> None:
    with pytest.raises(InputError):
        cross_entropy(np.array([0.5, 0.5]), 2)


def test_kl_divergence_values() -> None:
    p = np.array([0.2, 0.3, 0.5])
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence(
        np.array([1.0, 0.0]), np.array([0.5, 0.5])
    ) == pytest.approx(math.log(2))
    clamped = kl_divergence(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
    assert math.isfinite(clamped)
    assert clamped > 0


def test_kl_divergence_length_mismatch() -> None:
    with pytest.raises(InputError):
        kl_divergence(np.array([0.5, 0.5]), np.array([0.2, 0.3, 0.5]))


def test_mkl_shape_mismatch() -> None:
    with pytest.raises(InputError):
        misclassification_aware_kl(
            np.array([[0.5, 0.5]]), np.array([[0.2, 0.3, 0.5]]), 0
        )


def test_mkl_vanishes_for_certain_clean_prediction() -> None:
    value = misclassification_aware_kl(
        np.array([0.3, 0.7]), np.array([1.0, 0.0]), 0
    )
    assert value == 0.0


def test_linear_softmax_input_gradient() -> None:
    w = np.array([[1.0, -2.0], [0.5, 0.25], [-1.0, 1.0]])
    params = ModelParams(weights=(w,), biases=(np.array([0.1, 0.0, -0.2]),))
    x = np.array([0.4, -0.3])
    _, probs = forward(params, x)
    onehot = np.array([0.0, 1.0, 0.0])
    grads = backward(params, x, CrossEntropyLoss(labels=[1]))
    assert np.allclose(grads.input_grad, w.T @ (probs - onehot), atol=1e-14)


def test_constant_loss_has_zero_gradients(
    small_net: ModelParams, rng: np.random.Generator
) -> None:
    grads = backward(small_net, rng.normal(size=(4, 2)), ConstantLoss(3.0))
    assert not np.any(grads.input_grad)
    assert not np.any(grads.param_grads.flatten())


def _losses(y: np.ndarray, reference: np.ndarray) -> list:
    weights = np.linspace(0.5, 1.5, y.size)
    return [
        CrossEntropyLoss(labels=y, weights=weights),
        MarginLoss(labels=y),
        KLToReferenceLoss(reference=reference),
        BoostedCrossEntropyLoss(labels=y, weights=weights),
    ]


def _natural_losses(y: np.ndarray) -> list:
    weights = np.linspace(0.5, 1.5, y.size)
    return [
        CrossEntropyLoss(labels=y, on_natural=True),
        KLDivergenceLoss(weights=weights),
        MisclassificationAwareKLLoss(labels=y, weights=weights),
        CompositeLoss(
            terms=(
                (1.0, CrossEntropyLoss(labels=y, on_natural=True)),
                (5.0, KLDivergenceLoss(weights=weights)),
            )
        ),
    ]


@pytest.mark.parametrize("draw", range(GRADIENT_DRAWS))
def test_gradients_match_finite_differences(draw: int) -> None:
    rng = np.random.default_rng(draw)
    params = ModelParams.initialize((3, 6, 4), seed=draw)
    x = rng.normal(size=(5, 3))
    y = rng.integers(0, 4, size=5)
    _, reference = forward(params, rng.normal(size=(5, 3)))
    for loss in _losses(y, reference):
        grads = backward(params, x, loss)

        def at_input(point: np.ndarray, loss=loss) -> float:
            return float(np.sum(loss_value(params, point, loss)[0]))

        def at_params(p: ModelParams, loss=loss) -> float:
            return float(np.sum(loss_value(p, x, loss)[0]))

        assert (
            relative_error(grads.input_grad, numeric_gradient(at_input, x))
            < 1e-5
        )
        assert (
            relative_error(
                grads.param_grads.flatten(), param_gradient(at_params, params)
            )
            < 1e-5
        )


@pytest.mark.parametrize("draw", range(GRADIENT_DRAWS))
def test_two_branch_gradients_match_finite_differences(draw: int) -> None:
    rng = np.random.default_rng(100 + draw)
    params = ModelParams.initialize((3, 6, 4), seed=draw)
    x = rng.normal(size=(5, 3))
    adv = x + rng.uniform(-0.2, 0.2, size=x.shape)
    y = rng.integers(0, 4, size=5)
    for loss in _natural_losses(y):
        grads = backward(params, adv, loss, x_natural=x)

        def at_params(p: ModelParams, loss=loss) -> float:
            return float(np.sum(loss_value(p, adv, loss, x_natural=x)[0]))

        assert (
            relative_error(
                grads.param_grads.flatten(), param_gradient(at_params, params)
            )
            < 1e-5
        )


def test_natural_branch_requires_clean_input(small_net: ModelParams) -> None:
    with pytest.raises(ConfigurationError):
        backward(small_net, np.zeros((2, 2)), KLDivergenceLoss())


def test_predict_ties_go_to_lower_class() -> None:
    params = ModelParams(weights=(np.zeros((3, 2)),), biases=(np.zeros(3),))
    assert predict(params, np.ones((2, 2))).tolist() == [0, 0]


def test_flatten_unflatten_roundtrip(small_net: ModelParams) -> None:
    again = ModelParams.unflatten(small_net.flatten(), small_net.layer_dims)
    assert np.array_equal(again.flatten(), small_net.flatten())


def test_checkpoint_roundtrip_is_bitwise(
    small_net: ModelParams, tmp_path
) -> None:
    path = save_params(tmp_path / "model.ckpt", small_net)
    loaded = load_params(path)
    assert loaded.layer_dims == small_net.layer_dims
    assert np.array_equal(loaded.flatten(), small_net.flatten())
    assert (tmp_path / "model.ckpt.json").exists()


def test_checkpoint_architecture_mismatch(small_net: ModelParams) -> None:
    blob = encode_checkpoint(small_net)
    with pytest.raises(SchemaError):
        decode_checkpoint(blob, expected_dims=(2, 8, 3))


def test_checkpoint_bad_magic_reports_offset(small_net: ModelParams) -> None:
    blob = b"NOTACKPT" + encode_checkpoint(small_net)[8:]
    with pytest.raises(ParseError, match="offset 0") as info:
        decode_checkpoint(blob)
    assert info.value.offset == 0


def test_checkpoint_truncated_payload(small_net: ModelParams) -> None:
    blob = encode_checkpoint(small_net)
    with pytest.raises(ParseError):
        decode_checkpoint(blob[:-3])


def test_checkpoint_keeps_extra_sections(small_net: ModelParams) -> None:
    extra = np.arange(5.0)
    blob = encode_checkpoint(
        small_net, sections={"extra": extra}, metadata={"epoch": 4}
    )
    ckpt = decode_checkpoint(blob)
    assert np.array_equal(ckpt.sections["extra"], extra)
    assert ckpt.metadata == {"epoch": 4}


def _rewrite_header(blob: bytes, **changes: object) -> bytes:
    prefix = struct.Struct("<8sI")
    magic, length = prefix.unpack_from(blob, 0)
    header = json.loads(blob[prefix.size : prefix.size + length])
    header.update(changes)
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    return prefix.pack(magic, len(raw)) + raw + blob[prefix.size + length :]


def test_checkpoint_payload_not_fitting_layer_dims() -> None:
    blob = encode_checkpoint(ModelParams.initialize((2, 3), seed=0))
    forged = _rewrite_header(blob, layer_dims=[2, 2], num_classes=2)
    with pytest.raises(SchemaError, match="layer_dims") as info:
        decode_checkpoint(forged)
    assert info.value.offset == 12
