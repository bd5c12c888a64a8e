"""Dense ReLU classifier with exact reverse-mode gradients.

Weights follow the ``z = W a + b`` convention, so ``weights[l]`` has shape
``(out, in)``. Batched inputs are rows: ``Z = A @ W.T + b``.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from errors import ConfigurationError, NumericError
from network.functional import Array, softmax
from network.losses import LossDefinition, LossEvaluation

ACTIVATIONS = ("relu",)


def _layer_pairs(dims: Sequence[int]) -> list[tuple[int, int]]:
    return list(zip(dims[:-1], dims[1:], strict=True))


def _frozen(values: npt.ArrayLike) -> Array:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Layer weights and biases of an MLP with ReLU hidden layers."""

    weights: tuple[Array, ...]
    biases: tuple[Array, ...]
    activation: str = "relu"

    def __post_init__(self) -> None:
        weights = tuple(_frozen(w) for w in self.weights)
        biases = tuple(_frozen(b) for b in self.biases)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

        if self.activation not in ACTIVATIONS:
            msg = f"unsupported activation {self.activation!r}"
            raise ConfigurationError(msg)
        if not weights or len(weights) != len(biases):
            msg = "need one bias vector per weight matrix"
            raise ConfigurationError(msg)
        for layer, (w, b) in enumerate(zip(weights, biases, strict=True)):
            if w.ndim != 2 or b.shape != (w.shape[0],):  # noqa: PLR2004
                msg = (
                    f"layer {layer}: weight {w.shape} and bias {b.shape} "
                    "do not match"
                )
                raise ConfigurationError(msg)
            if layer > 0 and w.shape[1] != weights[layer - 1].shape[0]:
                msg = f"layer {layer} does not chain with layer {layer - 1}"
                raise ConfigurationError(msg)
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                msg = f"layer {layer} holds non-finite parameters"
                raise NumericError(msg, layer=layer)

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1], *(w.shape[0] for w in self.weights))

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    def layers(self) -> list[tuple[Array, Array]]:
        return list(zip(self.weights, self.biases, strict=True))

    @classmethod
    def initialize(
        cls, layer_dims: Sequence[int], seed: int = 0
    ) -> "ModelParams":
        """He-normal weights and zero biases."""
        if len(layer_dims) < 2 or min(layer_dims) < 1:  # noqa: PLR2004
            msg = f"invalid layer dims {list(layer_dims)}"
            raise ConfigurationError(msg)
        rng = np.random.default_rng(seed)
        weights = []
        biases = []
        for fan_in, fan_out in _layer_pairs(layer_dims):
            scale = np.sqrt(2.0 / fan_in)
            weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights=tuple(weights), biases=tuple(biases))

    def flatten(self) -> Array:
        """All parameters as one vector, layer by layer (W then b)."""
        parts = []
        for w, b in self.layers():
            parts.extend((w.ravel(), b.ravel()))
        return np.concatenate(parts)

    @classmethod
    def unflatten(
        cls,
        vector: npt.ArrayLike,
        layer_dims: Sequence[int],
        activation: str = "relu",
    ) -> "ModelParams":
        flat = np.asarray(vector, dtype=np.float64)
        pairs = _layer_pairs(layer_dims)
        expected = sum((fan_in + 1) * fan_out for fan_in, fan_out in pairs)
        if flat.shape != (expected,):
            msg = f"expected {expected} parameters, got {flat.shape}"
            raise ConfigurationError(msg)
        weights = []
        biases = []
        offset = 0
        for fan_in, fan_out in pairs:
            size = fan_in * fan_out
            block = flat[offset : offset + size]
            weights.append(block.reshape(fan_out, fan_in))
            offset += size
            biases.append(flat[offset : offset + fan_out])
            offset += fan_out
        return cls(
            weights=tuple(weights), biases=tuple(biases), activation=activation
        )

    def map(
        self, fn: Callable[..., Array], *others: "ModelParams"
    ) -> "ModelParams":
        """Apply ``fn`` leaf-wise over this and ``others`` (same shapes)."""
        weights = tuple(
            fn(w, *(o.weights[i] for o in others))
            for i, w in enumerate(self.weights)
        )
        biases = tuple(
            fn(b, *(o.biases[i] for o in others))
            for i, b in enumerate(self.biases)
        )
        return ModelParams(
            weights=weights, biases=biases, activation=self.activation
        )

    def zeros_like(self) -> "ModelParams":
        return self.map(np.zeros_like)


@dataclass(frozen=True)
class GradBundle:
    """Gradients of a scalar loss w.r.t. parameters and the input."""

    param_grads: ModelParams
    input_grad: Array


@dataclass(frozen=True)
class ForwardCache:
    """Intermediate values kept for the backward pass."""

    activations: list[Array] = field(default_factory=list)
    pre_activations: list[Array] = field(default_factory=list)

    @property
    def logits(self) -> Array:
        return self.pre_activations[-1]


@dataclass(frozen=True)
class LossResult:
    """Value, per-instance terms, logits and gradients of one evaluation."""

    total: float
    per_instance: Array
    logits: Array
    grads: GradBundle


def as_batch(params: ModelParams, x: npt.ArrayLike) -> Array:
    """Return ``x`` as an ``(n, d)`` float64 batch, checking ``d``."""
    arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[1] != params.input_dim:  # noqa: PLR2004
        msg = (
            f"input of shape {np.shape(x)} does not match first layer "
            f"width {params.input_dim}"
        )
        raise ConfigurationError(msg)
    return arr


def forward_cached(params: ModelParams, x: npt.ArrayLike) -> ForwardCache:
    a = as_batch(params, x)
    cache = ForwardCache(activations=[a])
    last = len(params.weights) - 1
    for layer, (w, b) in enumerate(params.layers()):
        z = a @ w.T + b
        if not np.all(np.isfinite(z)):
            msg = f"non-finite activations in layer {layer}"
            raise NumericError(msg, layer=layer)
        cache.pre_activations.append(z)
        if layer < last:
            a = np.maximum(z, 0.0)
            cache.activations.append(a)
    return cache


def forward(params: ModelParams, x: npt.ArrayLike) -> tuple[Array, Array]:
    """Logits and softmax probabilities for a vector or a batch."""
    logits = forward_cached(params, x).logits
    probs = softmax(logits)
    if np.ndim(x) == 1:
        return logits[0], probs[0]
    return logits, probs


def predict(params: ModelParams, x: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Arg-max class per row; ties go to the lower class index."""
    logits = forward_cached(params, x).logits
    return np.argmax(logits, axis=-1)


def backprop(
    params: ModelParams, cache: ForwardCache, grad_logits: Array
) -> GradBundle:
    """Push ``dL/dlogits`` back through the cached forward pass."""
    dz = grad_logits
    weight_grads: list[Array] = []
    bias_grads: list[Array] = []
    input_grad = dz
    for layer in range(len(params.weights) - 1, -1, -1):
        w = params.weights[layer]
        weight_grads.append(dz.T @ cache.activations[layer])
        bias_grads.append(dz.sum(axis=0))
        upstream = dz @ w
        if layer > 0:
            # ReLU subgradient at 0 is 0.
            dz = upstream * (cache.pre_activations[layer - 1] > 0)
        else:
            input_grad = upstream
    if not np.all(np.isfinite(input_grad)):
        msg = "non-finite input gradient"
        raise NumericError(msg, layer=0)
    grads = ModelParams(
        weights=tuple(reversed(weight_grads)),
        biases=tuple(reversed(bias_grads)),
        activation=params.activation,
    )
    return GradBundle(param_grads=grads, input_grad=input_grad)


def _evaluate(
    params: ModelParams,
    x: npt.ArrayLike,
    loss: LossDefinition,
    x_natural: npt.ArrayLike | None,
) -> tuple[ForwardCache, ForwardCache | None, LossEvaluation]:
    cache = forward_cached(params, x)
    natural_cache = None
    if loss.uses_natural:
        if x_natural is None:
            msg = f"{type(loss).__name__} needs the natural input"
            raise ConfigurationError(msg)
        natural_cache = forward_cached(params, x_natural)
    evaluation = loss.evaluate(
        cache.logits,
        natural_cache.logits if natural_cache is not None else None,
    )
    return cache, natural_cache, evaluation


def value_and_grad(
    params: ModelParams,
    x: npt.ArrayLike,
    loss: LossDefinition,
    *,
    x_natural: npt.ArrayLike | None = None,
) -> LossResult:
    """Evaluate ``loss`` and its exact gradients.

    ``x`` is the primary (possibly perturbed) input and ``input_grad`` is
    taken with respect to it. Losses reading the clean prediction get it
    from ``x_natural``; their clean-branch gradient flows to the
    parameters only.
    """
    cache, natural_cache, evaluation = _evaluate(params, x, loss, x_natural)
    grads = backprop(params, cache, evaluation.grad_logits)
    if natural_cache is not None and evaluation.grad_natural is not None:
        natural = backprop(params, natural_cache, evaluation.grad_natural)
        grads = GradBundle(
            param_grads=grads.param_grads.map(np.add, natural.param_grads),
            input_grad=grads.input_grad,
        )
    if np.ndim(x) == 1:
        grads = GradBundle(
            param_grads=grads.param_grads, input_grad=grads.input_grad[0]
        )
    return LossResult(
        total=float(np.sum(evaluation.per_instance)),
        per_instance=evaluation.per_instance,
        logits=cache.logits,
        grads=grads,
    )


def backward(
    params: ModelParams,
    x: npt.ArrayLike,
    loss: LossDefinition,
    *,
    x_natural: npt.ArrayLike | None = None,
) -> GradBundle:
    """Exact gradients of the summed ``loss`` (see ``value_and_grad``)."""
    return value_and_grad(params, x, loss, x_natural=x_natural).grads


def loss_value(
    params: ModelParams,
    x: npt.ArrayLike,
    loss: LossDefinition,
    *,
    x_natural: npt.ArrayLike | None = None,
) -> tuple[Array, Array]:
    """Per-instance loss and logits without a backward pass."""
    cache, _, evaluation = _evaluate(params, x, loss, x_natural)
    return evaluation.per_instance, cache.logits
