"""Projection onto the L-infinity threat model."""

import numpy as np
import numpy.typing as npt

from errors import InputError
from models.config import ThreatModel
from network.functional import Array


def _pull_inside(delta: Array, x: Array, lo: float, hi: float) -> Array:
    """Nudge coordinates whose ``x + delta`` rounds outside ``[lo, hi]``."""
    over = x + delta > hi
    while np.any(over):
        delta[over] = np.nextafter(delta[over], -np.inf)
        over = x + delta > hi
    under = x + delta < lo
    while np.any(under):
        delta[under] = np.nextafter(delta[under], np.inf)
        under = x + delta < lo
    return delta


def project(
    delta: npt.ArrayLike, threat: ThreatModel, x: npt.ArrayLike
) -> Array:
    """Clamp ``delta`` to ``[-eps, eps]``, then keep ``x + delta`` in the box.

    Values already inside both sets are returned bitwise unchanged.

    Raises:
        InputError: If ``x`` itself lies outside ``threat.clamp_domain``.
    """
    d = np.asarray(delta, dtype=np.float64)
    eps = threat.epsilon
    out = np.clip(d, -eps, eps)
    if threat.clamp_domain is None:
        return out
    lo, hi = threat.clamp_domain
    base = np.broadcast_to(np.asarray(x, dtype=np.float64), out.shape)
    if np.any(base < lo) or np.any(base > hi):
        msg = f"input lies outside the clamp domain [{lo}, {hi}]"
        raise InputError(msg)
    out = np.clip(out, lo - base, hi - base)
    return _pull_inside(out, base, lo, hi)


def threat_violations(
    delta: npt.ArrayLike, threat: ThreatModel, x: npt.ArrayLike
) -> int:
    """Number of rows of ``delta`` outside the threat model (exact check)."""
    d = np.atleast_2d(np.asarray(delta, dtype=np.float64))
    bad = np.any(np.abs(d) > threat.epsilon, axis=1)
    if threat.clamp_domain is not None:
        lo, hi = threat.clamp_domain
        adv = np.atleast_2d(np.asarray(x, dtype=np.float64)) + d
        bad |= np.any((adv < lo) | (adv > hi), axis=1)
    return int(np.count_nonzero(bad))
