"""Shared kernel for the simultaneous averaging iteration

    x <- (1 - a) x + a v(y),    y <- (1 - a) y + a s(x).

The state is carried as an unevaluated sum ``hi + lo`` (TwoSum), so that tiny
steps ``a`` do not stall once ``a |v - x|`` falls below one ulp of ``x``.
Without this, constant-step runs with ``a`` around 1e-3 flatten out at a duality
gap near ``eta * (1e-16 / a)^2`` instead of continuing to contract.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator

import numpy as np

from .errors import NumericError

_SMALL_D = 1e-3
# (-1)^k / (k (k - 1)) for k = 8 .. 2, Horner order; truncation < 1e-17 relative on |d| < 1e-3
_SERIES = [1.0 / (k * (k - 1)) * (-1) ** k for k in range(8, 1, -1)]


def bregman_phi(d: np.ndarray) -> np.ndarray:
    """``(1 + d) log1p(d) - d``, accurate to a few ulps for small ``|d|``."""
    if np.max(np.abs(d)) < _SMALL_D:
        acc = _SERIES[0]
        for c in _SERIES[1:]:
            acc = acc * d + c
        return acc * d * d
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (1.0 + d) * np.log1p(d) - d
    direct = np.where(d <= -1.0, 1.0, direct)
    small = np.abs(d) < _SMALL_D
    if np.any(small):
        ds = d[small]
        acc = _SERIES[0]
        for c in _SERIES[1:]:
            acc = acc * ds + c
        direct[small] = acc * ds * ds
    return direct


def softmax_unchecked(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def averaged_pairs(
    respond: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
    weights: np.ndarray,
    x0: np.ndarray,
    y0: np.ndarray,
    alpha: Callable[[int], float],
) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray, float]]:
    """Yield ``(t, state, v, s, gap)`` for ``t = 0, 1, ...``.

    ``state`` is the rounded concatenation ``[x, y]``; ``gap`` is
    ``sum weights * KL(state || responses)``, i.e. the duality gap of the
    rounded state when ``weights`` holds the regularization strengths.
    Arrays yielded are fresh each step and safe to keep.
    """
    n = x0.size
    hi = np.concatenate((x0, y0)).astype(float)
    lo = np.zeros_like(hi)
    t = 0
    while True:
        # overflow shows up as a non-finite gap, reported just below
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            v, s = respond(hi[:n], hi[n:])
            w = np.concatenate((v, s))
            d = (hi - w) / w
            gap = float(np.dot(weights, w * bregman_phi(d)))
        if not np.isfinite(gap):
            raise NumericError(f"non-finite duality gap at iteration {t}")
        yield t, hi, v, s, gap
        a = alpha(t)
        c = lo + a * ((w - hi) - lo)
        new = hi + c
        bb = new - hi
        lo = (hi - (new - bb)) + (c - bb)
        hi = new
        t += 1
