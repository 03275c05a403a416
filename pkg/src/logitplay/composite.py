"""Strongly convex composite problems ``min_x F(x) = ell(A x) + f_x(x)``.

Two solvers are compared: the generalized Frank-Wolfe method, which recomputes
the dual point ``s = grad ell(A x)`` from scratch every step, and the DLFP
variant, which carries and averages a dual iterate ``y`` as well.

For any ``x`` and ``y`` the saddle function ``S(x, y) = f_x(x) + y^T A x - f_y(y)``
gives the duality gap ``V(x, y) = F(x) - D(y) >= F(x) - F*``, which is how
every reported primal gap is certified.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._averaging import averaged_pairs
from .dlfp import InequalityCheck, Trace, VerificationReport
from .errors import InvalidInputError
from .game import _entropy, as_simplex, logsumexp, relative_entropy, softmax, uniform
from .schedules import NesterovGFW, StepSchedule, constant_contraction, constant_optimal_step, step_sizes


@dataclass(frozen=True, eq=False)
class CompositeProblem:
    """Oracle bundle for a composite problem over simplices.

    ``x_oracle(c)`` returns ``argmin_x <c, x> + f_x(x)``; ``y_oracle(u)``
    returns ``argmax_y <u, y> - f_y(y)``, the gradient of ``ell``.
    ``fy_value`` is needed only for duality gaps of general problems;
    ``kl_weights = (mu_x, mu_y)`` marks problems whose regularizers are scaled
    entropies (plus linear terms), where the gap is a weighted KL sum.
    """

    x_oracle: Callable[[np.ndarray], np.ndarray]
    y_oracle: Callable[[np.ndarray], np.ndarray]
    ell: Callable[[np.ndarray], float]
    fx_value: Callable[[np.ndarray], float]
    matrix: np.ndarray
    mu_x: float
    mu_y: float
    norm_A: float
    fy_value: Callable[[np.ndarray], float] | None = None
    kl_weights: tuple[float, float] | None = None

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.size == 0 or not np.all(np.isfinite(A)):
            raise InvalidInputError("matrix must be a finite non-empty 2-d array")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        if not (self.mu_x > 0 and self.mu_y > 0):
            raise InvalidInputError(f"strong-convexity moduli must be positive, got {self.mu_x!r}, {self.mu_y!r}")
        if not self.norm_A >= 0:
            raise InvalidInputError(f"norm_A must be nonnegative, got {self.norm_A!r}")

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def entropic_instance(A, eta_x: float, eta_y: float, tilt=None) -> CompositeProblem:
    """``f_x = eta_x h + <b, .>`` on the n-simplex and ``f_y = eta_y h`` on the m-simplex.

    Both moduli follow from Pinsker's inequality.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise InvalidInputError(f"matrix must be 2-d, got shape {A.shape}")
    m, n = A.shape
    for name, val in (("eta_x", eta_x), ("eta_y", eta_y)):
        if not (np.isfinite(val) and val > 0):
            raise InvalidInputError(f"{name} must be positive, got {val!r}")
    b = np.zeros(n) if tilt is None else np.array(tilt, dtype=float)
    if b.shape != (n,) or not np.all(np.isfinite(b)):
        raise InvalidInputError(f"tilt must be a finite vector of length {n}")
    eta_x, eta_y = float(eta_x), float(eta_y)
    inv_x, inv_y = 1.0 / eta_x, 1.0 / eta_y

    def x_oracle(c):
        return softmax(-(c + b) * inv_x)

    def y_oracle(u):
        return softmax(u * inv_y)

    def ell(u):
        return float(eta_y * logsumexp(u * inv_y))

    def fx_value(x):
        return float(eta_x * _entropy(x) + b @ x)

    def fy_value(y):
        return float(eta_y * _entropy(y))

    return CompositeProblem(
        x_oracle,
        y_oracle,
        ell,
        fx_value,
        A,
        eta_x,
        eta_y,
        float(np.max(np.abs(A))) if A.size else 0.0,
        fy_value,
        (eta_x, eta_y),
    )


def kappa_bar(problem: CompositeProblem) -> float:
    return problem.norm_A / math.sqrt(problem.mu_x * problem.mu_y)


def _point(problem: CompositeProblem, x, y=None):
    x = as_simplex(x, problem.n, "x")
    if y is None:
        return x
    return x, as_simplex(y, problem.m, "y")


def primal_value(problem: CompositeProblem, x) -> float:
    """``F(x) = ell(A x) + f_x(x)``."""
    x = _point(problem, x)
    return problem.ell(problem.matrix @ x) + problem.fx_value(x)


def composite_gap(problem: CompositeProblem, x, y) -> float:
    """Duality gap ``max_y' S(x, y') - min_x' S(x', y)``."""
    x, y = _point(problem, x, y)
    A = problem.matrix
    v = problem.x_oracle(y @ A)
    s = problem.y_oracle(A @ x)
    if problem.kl_weights is not None:
        wx, wy = problem.kl_weights
        return float(wx * relative_entropy(x, v) + wy * relative_entropy(y, s))
    if problem.fy_value is None:
        raise InvalidInputError("duality gap needs fy_value or kl_weights")
    dual = -problem.fy_value(y) + float(y @ A @ v) + problem.fx_value(v)
    return primal_value(problem, x) - dual


def gfw_step(problem: CompositeProblem, x, alpha: float) -> np.ndarray:
    """``(1 - alpha) x + alpha x_oracle(A^T y_oracle(A x))``; no dual state is kept."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha!r}")
    x = _point(problem, x)
    A = problem.matrix
    s = problem.y_oracle(A @ x)
    v = problem.x_oracle(s @ A)
    return (1 - alpha) * x + alpha * v


def dlfp_composite_step(problem: CompositeProblem, state, alpha: float):
    """Simultaneous averaging of both players toward their oracle responses."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha!r}")
    x, y = _point(problem, *state)
    A = problem.matrix
    v = problem.x_oracle(y @ A)
    s = problem.y_oracle(A @ x)
    return (1 - alpha) * x + alpha * v, (1 - alpha) * y + alpha * s


def run_dlfp_composite(problem: CompositeProblem, init, T: int, alpha: float | None = None) -> Trace:
    """Constant-step DLFP variant for ``T`` steps, recording every state.

    ``alpha`` defaults to ``min(1 / (2 kappa_bar^2), 1)``; the bound column is
    the resulting linear rate times ``V_0``.
    """
    if T < 1:
        raise InvalidInputError(f"T must be positive, got {T}")
    kb = kappa_bar(problem)
    if alpha is None:
        alpha = constant_optimal_step(kb)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha!r}")
    x0, y0 = _point(problem, *init)
    started = time.perf_counter()
    A = problem.matrix
    n = problem.n

    def respond(x, y):
        return problem.x_oracle(y @ A), problem.y_oracle(A @ x)

    kl = problem.kl_weights
    weights = np.concatenate((np.full(n, kl[0]), np.full(problem.m, kl[1]))) if kl else np.zeros(n + problem.m)
    states = np.empty((T + 1, n + problem.m))
    gaps = np.empty(T + 1)
    for t, z, _, _, gap in averaged_pairs(respond, weights, x0, y0, lambda _: alpha):
        states[t] = z
        gaps[t] = gap if kl else composite_gap(problem, z[:n], z[n:])
        if t == T:
            break
    factor = constant_contraction(kb, alpha)
    bounds = gaps[0] * factor ** np.arange(T + 1, dtype=float)
    bounds[0] = np.nan
    meta = {"method": "dlfp-variant", "alpha": alpha, "kappa_bar": kb, "seconds": time.perf_counter() - started}
    return Trace(np.arange(T + 1), np.full(T + 1, alpha), gaps, bounds, states[:, :n], states[:, n:], meta)


def run_gfw(problem: CompositeProblem, x0, T: int, schedule: StepSchedule = NesterovGFW()) -> Trace:
    """Generalized Frank-Wolfe for ``T`` steps.

    ``gaps`` holds ``V(x^t, s^t)`` with ``s^t = y_oracle(A x^t)``, a certificate
    for ``F(x^t) - F*``; ``meta["primal"]`` holds ``F(x^t)``.
    """
    if T < 1:
        raise InvalidInputError(f"T must be positive, got {T}")
    x = _point(problem, x0)
    started = time.perf_counter()
    A = problem.matrix
    alphas = step_sizes(schedule, T + 1)
    xs = np.empty((T + 1, problem.n))
    ys = np.empty((T + 1, problem.m))
    gaps = np.empty(T + 1)
    primal = np.empty(T + 1)
    for t in range(T + 1):
        s = problem.y_oracle(A @ x)
        v = problem.x_oracle(s @ A)
        xs[t], ys[t] = x, s
        primal[t] = problem.ell(A @ x) + problem.fx_value(x)
        if problem.kl_weights is not None:
            # y = s makes the second KL term vanish
            gaps[t] = problem.kl_weights[0] * relative_entropy(x, v)
        else:
            gaps[t] = composite_gap(problem, x, s)
        if t < T:
            a = alphas[t]
            x = (1 - a) * x + a * v
    meta = {"method": "gfw", "schedule": schedule.name, "primal": primal, "seconds": time.perf_counter() - started}
    return Trace(np.arange(T + 1), alphas, gaps, np.full(T + 1, np.nan), xs, ys, meta)


class Comparison(NamedTuple):
    gfw_trace: Trace
    dlfp_trace: Trace
    f_ref: float


def run_comparison(
    problem: CompositeProblem,
    T: int,
    gfw_schedule: StepSchedule = NesterovGFW(),
    dlfp_alpha: float | None = None,
) -> Comparison:
    """Run both methods from uniform points and certify their primal gaps.

    ``F*`` lies in ``[F_best - V_best, F_best]`` where ``F_best`` is the best
    primal value seen and ``V_best`` the smallest gap seen, over both runs;
    ``f_ref`` is the lower end.  The GFW trace keeps ``V(x^t, s^t)`` as its
    certificate: ``F(x^t) - f_ref`` is also an upper bound on ``F(x^t) - F*``
    but is a difference of O(1) numbers and bottoms out at round-off, so it
    is stored in ``meta["primal_gap_bound"]`` only.  The DLFP trace keeps
    ``V_t`` and gets ``F(x^t)`` in ``meta["primal"]``.
    """
    x0 = uniform(problem.n)
    gfw = run_gfw(problem, x0, T, gfw_schedule)
    dl = run_dlfp_composite(problem, (x0, uniform(problem.m)), T, dlfp_alpha)
    dl.meta["primal"] = np.array([primal_value(problem, x) for x in dl.xs])
    f_best = min(float(np.min(gfw.meta["primal"])), float(np.min(dl.meta["primal"])))
    v_best = min(float(np.min(gfw.gaps)), float(np.min(dl.gaps)))
    f_ref = f_best - v_best
    for tr in (gfw, dl):
        tr.meta["primal_gap_bound"] = tr.meta["primal"] - f_ref
        tr.meta["f_bracket"] = (f_ref, f_best)
    return Comparison(gfw, dl, f_ref)


def verify_composite(problem: CompositeProblem, trace: Trace, f_ref: float | None = None, rtol: float = 1e-9):
    """Check the DLFP-variant recursions (and the certificate ordering if ``f_ref`` is given)."""
    if not trace.has_states:
        raise InvalidInputError("trace has no recorded states")
    V = trace.gaps
    a = trace.alphas[:-1]
    k2 = kappa_bar(problem) ** 2
    t = trace.iterations[:-1]
    checks = [
        InequalityCheck("contraction", t, V[1:], (1 - a + k2 * a * a) * V[:-1], rtol * np.maximum(1.0, V[:-1])),
    ]
    has_bound = ~np.isnan(trace.bounds)
    if np.any(has_bound):
        checks.append(
            InequalityCheck(
                "linear_rate",
                trace.iterations[has_bound],
                V[has_bound],
                trace.bounds[has_bound],
                rtol * np.maximum(1.0, V[has_bound]),
            )
        )
    if f_ref is not None:
        primal = trace.meta.get("primal")
        if primal is None:
            primal = np.array([primal_value(problem, x) for x in trace.xs])
        checks.append(
            InequalityCheck("certificate", trace.iterations, primal - f_ref, V, np.full(V.size, 1e-9))
        )
    return VerificationReport(checks)
