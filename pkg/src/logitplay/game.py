"""Entropy-regularized two-player zero-sum games.

Player I mixes over the ``n`` columns of ``A`` (``x`` minimizes), player II
over the ``m`` rows (``y`` maximizes).  The saddle function is

    S(x, y) = eta * h(x) + y^T A x - eta * h(y),   h(p) = sum_i p_i ln p_i.

All responses, conjugates and gaps are evaluated with max-subtraction so that
``|A| / eta`` in the hundreds is harmless.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._averaging import bregman_phi, softmax_unchecked
from .errors import InvalidInputError, NumericError

SIMPLEX_ATOL = 1e-12



@dataclass(frozen=True, eq=False)
class RegularizedGame:
    """Payoff matrix ``A`` (m x n) together with the regularization ``eta``."""

    A: np.ndarray
    eta: float

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise InvalidInputError(f"payoff matrix must be 2-d and non-empty, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidInputError("payoff matrix has non-finite entries")
        eta = float(self.eta)
        if not (np.isfinite(eta) and eta > 0):
            raise InvalidInputError(f"eta must be a positive finite number, got {self.eta!r}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "eta", eta)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def norm(self) -> float:
        """``||A||_{1->inf}``, the largest absolute entry."""
        return float(np.max(np.abs(self.A)))

    def __repr__(self):
        return f"RegularizedGame(m={self.m}, n={self.n}, eta={self.eta!r})"


class JointState(NamedTuple):
    x: np.ndarray
    y: np.ndarray


def as_simplex(p, dim: int | None = None, name: str = "p") -> np.ndarray:
    """Validate ``p`` as a probability vector and return it as a float array.

    Inputs off the simplex are rejected, never renormalized.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-d vector, got shape {p.shape}")
    if dim is not None and p.size != dim:
        raise InvalidInputError(f"{name} has length {p.size}, expected {dim}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if np.any(p < 0):
        raise InvalidInputError(f"{name} has negative entries")
    total = float(np.sum(p))
    if abs(total - 1.0) > SIMPLEX_ATOL:
        raise InvalidInputError(f"{name} sums to {total!r}, not 1")
    return p


def _as_finite(w, dim: int, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (dim,):
        raise InvalidInputError(f"{name} must have shape ({dim},), got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return w


def uniform(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def vertex(k: int, i: int) -> np.ndarray:
    e = np.zeros(k)
    e[i] = 1.0
    return e


# ---------------------------------------------------------------------------
# stable primitives (also used row-wise by the Monte-Carlo engine)


def logsumexp(z: np.ndarray) -> np.ndarray:
    zmax = np.max(z, axis=-1, keepdims=True)
    out = np.log(np.sum(np.exp(z - zmax), axis=-1)) + zmax[..., 0]
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    p = e / np.sum(e, axis=-1, keepdims=True)
    if not np.all(p > 0):
        if not np.all(np.isfinite(p)):
            raise NumericError("non-finite value in softmax")
        raise NumericError("softmax coordinate underflowed to zero; payoff range / eta too large")
    return p


def relative_entropy(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Generalized KL divergence ``sum p ln(p/q) - p + q`` along the last axis.

    ``q`` must be strictly positive.  Written as ``sum q * phi((p - q) / q)`` so
    each term is nonnegative and second order in ``p - q``; this keeps full
    relative accuracy down to divergences near 1e-30.
    """
    d = (p - q) / q
    return np.sum(q * bregman_phi(d), axis=-1)


# ---------------------------------------------------------------------------
# responses, entropy and conjugates


def entropy(p) -> float:
    """Negative entropy ``sum p_i ln p_i`` with ``0 ln 0 = 0``."""
    p = as_simplex(p)
    return float(_entropy(p))


def _entropy(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > 0, p, 1.0)
    return np.sum(np.where(p > 0, p * np.log(safe), 0.0), axis=-1)


def logit_response_x(game: RegularizedGame, y) -> np.ndarray:
    """Player I's smoothed best response ``argmin_x <A^T y, x> + eta h(x)``."""
    y = as_simplex(y, game.m, "y")
    return softmax(-(y @ game.A) / game.eta)


def logit_response_y(game: RegularizedGame, x) -> np.ndarray:
    """Player II's smoothed best response ``argmax_y <A x, y> - eta h(y)``."""
    x = as_simplex(x, game.n, "x")
    return softmax((game.A @ x) / game.eta)


def _conjugate(w: np.ndarray, eta: float) -> float:
    return float(eta * logsumexp(w / eta))


def conjugate_x(game: RegularizedGame, w) -> float:
    """``g_x(w) = max_x <w, x> - eta h(x) = eta * logsumexp(w / eta)`` over n terms."""
    return _conjugate(_as_finite(w, game.n, "w"), game.eta)


def conjugate_y(game: RegularizedGame, u) -> float:
    return _conjugate(_as_finite(u, game.m, "u"), game.eta)


def conjugate_grad_x(game: RegularizedGame, w) -> np.ndarray:
    """Gradient of :func:`conjugate_x`, i.e. its maximizer ``softmax(w / eta)``."""
    return softmax(_as_finite(w, game.n, "w") / game.eta)


def conjugate_grad_y(game: RegularizedGame, u) -> np.ndarray:
    return softmax(_as_finite(u, game.m, "u") / game.eta)


def saddle_value(game: RegularizedGame, x, y) -> float:
    x = as_simplex(x, game.n, "x")
    y = as_simplex(y, game.m, "y")
    return float(game.eta * _entropy(x) + y @ game.A @ x - game.eta * _entropy(y))


# ---------------------------------------------------------------------------
# duality gap


def _gap(game: RegularizedGame, x, y, v, s) -> float:
    # S(x, y) - S(v, y) = eta KL(x || v) and S(x, s) - S(x, y) = eta KL(y || s)
    return float(game.eta * (relative_entropy(x, v) + relative_entropy(y, s)))


def duality_gap(game: RegularizedGame, x, y) -> float:
    """``G(x, y) = max_y' S(x, y') - min_x' S(x', y)``.

    Evaluated as ``eta * (KL(x || P_x(y)) + KL(y || P_y(x)))``, which equals the
    conjugate form of :func:`duality_gap_conjugate` exactly on the simplex but
    does not lose relative accuracy as the gap goes to zero.
    """
    x = as_simplex(x, game.n, "x")
    y = as_simplex(y, game.m, "y")
    v = softmax(-(y @ game.A) / game.eta)
    s = softmax((game.A @ x) / game.eta)
    return _gap(game, x, y, v, s)


def duality_gap_conjugate(game: RegularizedGame, x, y) -> float:
    """Gap as ``eta h(x) + g_y(A x) + g_x(-A^T y) + eta h(y)``."""
    x = as_simplex(x, game.n, "x")
    y = as_simplex(y, game.m, "y")
    eta = game.eta
    return float(
        eta * _entropy(x)
        + _conjugate(game.A @ x, eta)
        + _conjugate(-(y @ game.A), eta)
        + eta * _entropy(y)
    )


def duality_gap_alt(game: RegularizedGame, x, y) -> float:
    """Gap as ``S(x, P_y(x)) - S(P_x(y), y)``."""
    x = as_simplex(x, game.n, "x")
    y = as_simplex(y, game.m, "y")
    v = logit_response_x(game, y)
    s = logit_response_y(game, x)
    return saddle_value(game, x, s) - saddle_value(game, v, y)


def kappa(game: RegularizedGame) -> float:
    """Condition number ``||A||_{1->inf} / eta``."""
    return game.norm / game.eta


def gap_upper_bound(game: RegularizedGame) -> float:
    """Largest duality gap over the product of simplices.

    Each term of the conjugate form is convex in ``x`` or in ``y`` alone, so the
    maximum sits at a vertex pair; at ``(e_j, e_i)`` the entropies vanish and the
    gap separates into ``g_y(A[:, j]) + g_x(-A[i, :])``.
    """
    eta = game.eta
    col_terms = eta * logsumexp(game.A.T / eta)  # g_y(A e_j), one per column j
    row_terms = eta * logsumexp(-game.A / eta)  # g_x(-A^T e_i), one per row i
    return float(np.max(col_terms) + np.max(row_terms))


def responses(game: RegularizedGame, x: np.ndarray, y: np.ndarray):
    """Both smoothed responses at the same state, without input validation."""
    v = softmax(-(y @ game.A) / game.eta)
    s = softmax((game.A @ x) / game.eta)
    return v, s


def responder(game: RegularizedGame):
    """Unchecked ``(x, y) -> (P_x(y), P_y(x))`` for the iteration kernel."""
    A = game.A
    At = np.ascontiguousarray(A.T)
    inv = 1.0 / game.eta

    def respond(x, y):
        return softmax_unchecked(-(At @ y) * inv), softmax_unchecked((A @ x) * inv)

    return respond
