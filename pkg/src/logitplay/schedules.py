"""Step-size rules and the rate bounds attached to them.

Three families are supported: a constant step, ``q / (t + q)`` for a positive
integer ``q`` (``q = 1`` is the harmonic rule, ``q = 2`` the Frank-Wolfe rule),
and the generalized Frank-Wolfe rule ``6 (t + 1) / ((t + 2) (2 t + 3))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedScheduleError


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidInputError(f"constant step must lie in [0, 1], got {self.value!r}")

    @property
    def name(self) -> str:
        return f"constant:{self.value!r}"

    def __call__(self, t: int) -> float:
        return float(self.value)


@dataclass(frozen=True)
class RationalQ:
    q: int

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise InvalidInputError(f"q must be a positive integer, got {self.q!r}")

    @property
    def name(self) -> str:
        return {1: "harmonic", 2: "fw"}.get(self.q, f"rational:{self.q}")

    def __call__(self, t: int) -> float:
        return self.q / (t + self.q)


@dataclass(frozen=True)
class NesterovGFW:
    @property
    def name(self) -> str:
        return "nesterov-gfw"

    def __call__(self, t: int) -> float:
        return 6.0 * (t + 1) / ((t + 2) * (2 * t + 3))


StepSchedule = Constant | RationalQ | NesterovGFW


def step_size(schedule: StepSchedule, t: int) -> float:
    if t < 0:
        raise InvalidInputError(f"iteration index must be nonnegative, got {t}")
    return schedule(t)


def step_sizes(schedule: StepSchedule, T: int) -> np.ndarray:
    """``alpha_0, ..., alpha_{T-1}`` as an array."""
    t = np.arange(T, dtype=float)
    if isinstance(schedule, Constant):
        return np.full(T, float(schedule.value))
    if isinstance(schedule, RationalQ):
        return schedule.q / (t + schedule.q)
    return 6.0 * (t + 1) / ((t + 2) * (2 * t + 3))


def parse_schedule(text: str, kappa: float | None = None) -> StepSchedule:
    """Parse a CLI schedule name.

    ``constant`` alone means the optimal constant step for the game, which needs
    ``kappa``; ``constant:<c>`` fixes the value.
    """
    text = text.strip().lower()
    if text == "constant":
        if kappa is None:
            raise InvalidInputError("schedule 'constant' needs the game's kappa")
        return Constant(constant_optimal_step(kappa))
    if text.startswith("constant:"):
        return Constant(float(text.split(":", 1)[1]))
    if text == "harmonic":
        return RationalQ(1)
    if text == "fw":
        return RationalQ(2)
    if text.startswith("rational:"):
        return RationalQ(int(text.split(":", 1)[1]))
    if text == "nesterov-gfw":
        return NesterovGFW()
    raise InvalidInputError(f"unknown schedule {text!r}")


def constant_optimal_step(kappa: float) -> float:
    """Minimizer of ``1 - a + kappa^2 a^2`` over ``[0, 1]``."""
    if kappa < 0:
        raise InvalidInputError(f"kappa must be nonnegative, got {kappa!r}")
    k2 = kappa * kappa
    if k2 <= 0.5:
        return 1.0
    return 1.0 / (2.0 * k2)


def rho(z: float) -> float:
    """Linear rate for the optimal constant step at ``z = kappa^2``."""
    if z < 0:
        raise InvalidInputError(f"rho is defined for z >= 0, got {z!r}")
    if z >= 0.5:
        return 1.0 - 1.0 / (4.0 * z)
    return float(z)


# ---------------------------------------------------------------------------
# rate bounds


@dataclass(frozen=True)
class Linear:
    rho: float
    V0: float

    def __call__(self, t):
        return self.rho**t * self.V0


@dataclass(frozen=True)
class LogOverT:
    C: float

    def __call__(self, t):
        return self.C * (1.0 + np.log(t)) / t


@dataclass(frozen=True)
class OneOverT:
    C: float

    def __call__(self, t):
        return 4.0 * self.C / (t + 1.0)


RateBound = Linear | LogOverT | OneOverT


def constant_contraction(kappa: float, alpha: float) -> float:
    """Per-step factor ``1 - alpha + kappa^2 alpha^2`` of the linear recursion.

    At the optimal step this is exactly ``rho(kappa^2)``.
    """
    if alpha == constant_optimal_step(kappa):
        return rho(kappa * kappa)
    return 1.0 - alpha + kappa * kappa * alpha * alpha


def theorem3_rate(kappa: float, eta: float, schedule: StepSchedule, V0: float) -> RateBound:
    """Global DLFP rate for ``schedule``.

    A constant step ``a`` gives ``(1 - a + kappa^2 a^2)^t V0``, which is
    ``rho(kappa^2)^t V0`` at the optimal step; ``q = 1`` and ``q = 2`` give the
    sublinear bounds with ``C = 4 eta kappa^2``.
    """
    if isinstance(schedule, Constant):
        return Linear(constant_contraction(kappa, schedule.value), V0)
    C = 4.0 * eta * kappa * kappa
    if isinstance(schedule, RationalQ) and schedule.q == 1:
        return LogOverT(C)
    if isinstance(schedule, RationalQ) and schedule.q == 2:
        return OneOverT(C)
    raise UnsupportedScheduleError(f"no global DLFP rate for schedule {schedule.name!r}")


def theorem3_bound(game_kappa: float, eta: float, schedule: StepSchedule, V0: float, t: int) -> float:
    if t < 1:
        raise InvalidInputError(f"bounds are stated for t >= 1, got {t}")
    return float(theorem3_rate(game_kappa, eta, schedule, V0)(t))


def lemma4_bound(C: float, schedule: StepSchedule, t: int) -> float:
    """Bound on ``V_t`` for ``V_{t+1} <= (1 - a_t) V_t + a_t^2 C`` with ``a_t = q/(t+q)``.

    For ``q > 2`` this is the telescoped sum
    ``C * sum_{i<t} (q/(i+q)) binom(i+q-1, q-1) / binom(t+q-1, q)``, with both
    binomials carried as running products and the ratio formed incrementally.
    """
    if not isinstance(schedule, RationalQ):
        raise UnsupportedScheduleError(f"recursion bound needs a q/(t+q) schedule, got {schedule.name!r}")
    if t < 1:
        raise InvalidInputError(f"bounds are stated for t >= 1, got {t}")
    q = schedule.q
    if q == 1:
        return C * (1.0 + math.log(t)) / t
    if q == 2:
        return 4.0 * C / (t + 1)
    return C * _telescoped_ratio(q, t)


def _telescoped_ratios(q: int, T: int) -> np.ndarray:
    # R_k = S_k / binom(k+q-1, q) with S_k the partial sum over i < k.  Using
    # binom(k+q-1, q) / binom(k+q, q) = k / (k+q) and the fact that the k-th
    # summand over binom(k+q, q) is q^2 / (k+q)^2 gives
    # R_{k+1} = R_k k / (k+q) + q^2 / (k+q)^2, with R_1 = 1.
    out = np.empty(T)
    ratio = 1.0
    out[0] = ratio
    for k in range(1, T):
        ratio = ratio * (k / (k + q)) + q * q / ((k + q) * (k + q))
        out[k] = ratio
    return out


def _telescoped_ratio(q: int, t: int) -> float:
    return float(_telescoped_ratios(q, t)[-1])


def lemma4_bounds(C: float, schedule: StepSchedule, T: int) -> np.ndarray:
    """:func:`lemma4_bound` for every ``t = 1..T`` in one pass."""
    if not isinstance(schedule, RationalQ):
        raise UnsupportedScheduleError(f"recursion bound needs a q/(t+q) schedule, got {schedule.name!r}")
    t = np.arange(1, T + 1, dtype=float)
    if schedule.q == 1:
        return C * (1.0 + np.log(t)) / t
    if schedule.q == 2:
        return 4.0 * C / (t + 1.0)
    return C * _telescoped_ratios(schedule.q, T)


@dataclass(frozen=True)
class StepConditionReport:
    schedule: str
    horizon: int
    sum_alpha: float
    sum_alpha_sq: float
    satisfied: bool
    verdict: str


def check_step_size_conditions(schedule: StepSchedule, horizon: int) -> StepConditionReport:
    """Partial sums of ``alpha_t`` and ``alpha_t^2`` up to ``horizon``.

    The verdict (non-summable steps with summable squares) is decided by the
    schedule family, not inferred from the partial sums.
    """
    if horizon < 1:
        raise InvalidInputError(f"horizon must be positive, got {horizon}")
    a = step_sizes(schedule, horizon)
    if isinstance(schedule, Constant):
        if schedule.value > 0:
            ok, verdict = False, "violates: squares diverge"
        else:
            ok, verdict = False, "violates: steps are summable"
    else:
        ok, verdict = True, "satisfies"
    return StepConditionReport(schedule.name, horizon, float(math.fsum(a)), float(math.fsum(a * a)), ok, verdict)
