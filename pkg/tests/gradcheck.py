"""Central finite differences for the gradient tests."""

from collections.abc import Callable

import numpy as np

from config import CONFIG
from network import ModelParams

H = CONFIG.numeric.finite_difference_step
GRADIENT_DRAWS = 100


def numeric_gradient(
    fn: Callable[[np.ndarray], float], point: np.ndarray, h: float = H
) -> np.ndarray:
    grad = np.zeros_like(point)
    flat = point.ravel()
    out = grad.ravel()
    for i in range(flat.size):
        up = flat.copy()
        down = flat.copy()
        up[i] += h
        down[i] -= h
        out[i] = (
            fn(up.reshape(point.shape)) - fn(down.reshape(point.shape))
        ) / (2 * h)
    return grad


def param_gradient(
    fn: Callable[[ModelParams], float], params: ModelParams, h: float = H
) -> np.ndarray:
    """Finite-difference gradient with respect to ``params.flatten()``."""
    dims = params.layer_dims
    return numeric_gradient(
        lambda v: fn(ModelParams.unflatten(v, dims)), params.flatten(), h
    )


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric)) / scale)
