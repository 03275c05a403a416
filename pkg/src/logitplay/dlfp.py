"""Deterministic logistic fictitious play: runs, traces and recursion checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NonConvergenceError, UnsupportedScheduleError
from ._averaging import averaged_pairs
from .game import (
    JointState,
    RegularizedGame,
    as_simplex,
    kappa,
    relative_entropy,
    responder,
    responses,
    softmax,
    uniform,
)
from .schedules import StepSchedule, constant_optimal_step, rho, step_sizes, theorem3_rate

# States are kept by default only up to this horizon.
RECORD_STATES_LIMIT = 100_000


@dataclass
class Trace:
    """Per-iteration record of a run.

    ``bounds`` holds NaN where no theoretical bound applies; ``xs``/``ys`` are
    ``None`` unless states were recorded.
    """

    iterations: np.ndarray
    alphas: np.ndarray
    gaps: np.ndarray
    bounds: np.ndarray
    xs: np.ndarray | None = None
    ys: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.gaps < -1e-12):
            raise InvalidInputError("trace contains a negative duality gap")

    def __len__(self):
        return len(self.iterations)

    @property
    def has_states(self) -> bool:
        return self.xs is not None and self.ys is not None


def _check_state(game: RegularizedGame, state) -> JointState:
    x, y = state
    return JointState(as_simplex(x, game.n, "x"), as_simplex(y, game.m, "y"))


def dlfp_step(game: RegularizedGame, state, alpha: float) -> JointState:
    """One simultaneous DLFP update; both responses use the incoming state."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha!r}")
    x, y = _check_state(game, state)
    v, s = responses(game, x, y)
    return JointState((1 - alpha) * x + alpha * v, (1 - alpha) * y + alpha * s)


def uniform_state(game: RegularizedGame) -> JointState:
    return JointState(uniform(game.n), uniform(game.m))


def run_dlfp(
    game: RegularizedGame,
    init,
    schedule: StepSchedule,
    T: int,
    record_states: bool | None = None,
) -> Trace:
    """Run DLFP for ``T`` steps and record ``t = 0..T``.

    The bound column holds the global rate for the schedule (constant, ``q = 1``
    or ``q = 2``) with ``V_0`` taken from the run, and NaN otherwise.
    """
    if T < 1:
        raise InvalidInputError(f"T must be positive, got {T}")
    if record_states is None:
        record_states = T <= RECORD_STATES_LIMIT
    x0, y0 = _check_state(game, init)
    started = time.perf_counter()
    alphas = step_sizes(schedule, T + 1)
    gaps = np.empty(T + 1)
    states = np.empty((T + 1, game.n + game.m)) if record_states else None
    weights = np.full(game.n + game.m, game.eta)
    for t, z, _, _, gap in averaged_pairs(responder(game), weights, x0, y0, alphas.item):
        gaps[t] = gap
        if record_states:
            states[t] = z
        if t == T:
            break

    bounds = np.full(T + 1, np.nan)
    try:
        rate = theorem3_rate(kappa(game), game.eta, schedule, gaps[0])
    except UnsupportedScheduleError:
        rate = None
    if rate is not None:
        bounds[1:] = rate(np.arange(1, T + 1, dtype=float))
    meta = {
        "game": repr(game),
        "schedule": schedule.name,
        "seconds": time.perf_counter() - started,
    }
    xs = states[:, : game.n] if record_states else None
    ys = states[:, game.n :] if record_states else None
    return Trace(np.arange(T + 1), alphas, gaps, bounds, xs, ys, meta)


# ---------------------------------------------------------------------------
# verification


@dataclass
class InequalityCheck:
    """``lhs <= rhs + tol`` checked at each ``t``."""

    name: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    tol: np.ndarray

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def passed(self) -> np.ndarray:
        return self.lhs <= self.rhs + self.tol

    @property
    def n_checked(self) -> int:
        return int(self.t.size)

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(~self.passed))

    def worst(self):
        """``(t, slack + tol)`` at the tightest point, or ``None`` if empty."""
        if self.t.size == 0:
            return None
        margin = self.slack + self.tol
        k = int(np.argmin(margin))
        return int(self.t[k]), float(margin[k])


@dataclass
class VerificationReport:
    checks: list[InequalityCheck] = field(default_factory=list)

    def __getitem__(self, name: str) -> InequalityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def n_checked(self) -> int:
        return sum(c.n_checked for c in self.checks)

    @property
    def n_failed(self) -> int:
        return sum(c.n_failed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.n_failed == 0

    def summary(self) -> dict:
        out = {"checked": self.n_checked, "failed": self.n_failed, "checks": {}}
        for c in self.checks:
            worst = c.worst()
            out["checks"][c.name] = {
                "checked": c.n_checked,
                "passed": c.n_checked - c.n_failed,
                "failed": c.n_failed,
                "worst_t": None if worst is None else worst[0],
                "worst_margin": None if worst is None else worst[1],
            }
        return out


def batch_gaps(game: RegularizedGame, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Duality gaps of many states at once (rows of ``xs``/``ys``)."""
    V = softmax(-(ys @ game.A) / game.eta)
    S = softmax((xs @ game.A.T) / game.eta)
    return game.eta * (relative_entropy(xs, V) + relative_entropy(ys, S))


def verify_recursions(game: RegularizedGame, trace: Trace, rtol: float = 1e-9) -> VerificationReport:
    """Check the two one-step gap recursions along a recorded DLFP trace.

    Gaps are recomputed from the recorded states.  Checked inequalities:

    * ``gap_consistency``: recorded gap equals the recomputed one;
    * ``contraction``: ``V_{t+1} <= (1 - a_t + kappa^2 a_t^2) V_t``;
    * ``additive``: ``V_{t+1} <= (1 - a_t) V_t + 4 a_t^2 eta kappa^2``;
    * ``rate``: ``V_t`` below the attached global bound, where present.

    The first three use tolerance ``rtol * max(1, V_t)``; the rate check uses
    ``rtol * bound``.
    """
    if not trace.has_states:
        raise InvalidInputError("trace has no recorded states; rerun with record_states=True")
    V = batch_gaps(game, trace.xs, trace.ys)
    k2 = kappa(game) ** 2
    eta = game.eta
    a = trace.alphas[:-1]
    Vt, Vn = V[:-1], V[1:]
    t = trace.iterations[:-1]
    tol = rtol * np.maximum(1.0, Vt)
    checks = [
        InequalityCheck(
            "gap_consistency",
            trace.iterations,
            np.abs(trace.gaps - V),
            np.zeros_like(V),
            rtol * np.maximum(1.0, V),
        ),
        InequalityCheck("contraction", t, Vn, (1 - a + k2 * a * a) * Vt, tol),
        InequalityCheck("additive", t, Vn, (1 - a) * Vt + 4 * a * a * eta * k2, tol),
    ]
    has_bound = ~np.isnan(trace.bounds)
    if np.any(has_bound):
        b = trace.bounds[has_bound]
        checks.append(InequalityCheck("rate", trace.iterations[has_bound], V[has_bound], b, rtol * b))
    return VerificationReport(checks)


# ---------------------------------------------------------------------------
# fixed point


@dataclass
class SaddlePoint:
    x_star: np.ndarray
    y_star: np.ndarray
    residual: float
    gap: float
    iterations: int = 0
    gap_target: float = 0.0


def fixed_point_gap_target(game: RegularizedGame, tol: float) -> float:
    """Gap level that guarantees an l1 fixed-point residual of at most ``tol``.

    Strong convexity gives ``G >= (eta/2)(|x - P_x(y)|_1^2 + |y - P_y(x)|_1^2)``,
    so the residual is at most ``2 sqrt(G / eta)``.
    """
    return min(tol, game.eta * tol * tol / 4.0)


def fixed_point_iteration_bound(game: RegularizedGame, V0: float, gap_target: float) -> int:
    """Iterations after which constant-step DLFP is guaranteed below ``gap_target``."""
    if V0 <= gap_target:
        return 0
    r = rho(kappa(game) ** 2)
    if r == 0.0:
        return 1
    return math.ceil(math.log(V0 / gap_target) / -math.log(r))


def solve_fixed_point(game: RegularizedGame, tol: float = 1e-10, max_iter: int = 1_000_000) -> SaddlePoint:
    """Solve ``P_x(y) = x, P_y(x) = y`` by constant-step DLFP from the uniform pair.

    Iterates until the duality gap drops to :func:`fixed_point_gap_target`, which
    certifies an l1 residual of at most ``tol``.  Raises
    :class:`NonConvergenceError` (carrying the best point) after ``max_iter``.
    """
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol!r}")
    alpha = constant_optimal_step(kappa(game))
    target = fixed_point_gap_target(game, tol)
    x0, y0 = uniform_state(game)
    weights = np.full(game.n + game.m, game.eta)
    n = game.n
    best = None
    for t, z, v, s, gap in averaged_pairs(responder(game), weights, x0, y0, lambda _: alpha):
        if best is None or gap < best.gap:
            residual = float(np.abs(v - z[:n]).sum() + np.abs(s - z[n:]).sum())
            best = SaddlePoint(z[:n], z[n:], residual, gap, t, target)
        if gap <= target or t >= max_iter:
            break
    if best.gap > target:
        raise NonConvergenceError(
            f"gap {best.gap:.3e} above target {target:.3e} after {max_iter} iterations", best=best
        )
    return best
