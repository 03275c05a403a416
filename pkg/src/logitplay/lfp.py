"""Stochastic logistic fictitious play and its Monte-Carlo replica harness.

Random numbers
--------------
Every trajectory owns one ``numpy.random.Generator`` backed by the Philox-4x64
counter-based bit generator, keyed by ``SeedSequence(seed, spawn_key=(r,))``
for replica ``r`` (a single run uses ``r = 0``).  Each iteration consumes two
doubles from that stream, first for player I's action and then for player
II's, and each action is drawn by inverse CDF on its double.  A replica's
trajectory therefore depends only on ``(seed, r)`` and the inputs, never on
how many other replicas run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dlfp import SaddlePoint, Trace, batch_gaps
from .errors import ConfigurationError, InvalidInputError, UnsupportedScheduleError
from .game import RegularizedGame, as_simplex, gap_upper_bound, kappa, responses, softmax, vertex
from .schedules import Constant, RationalQ, StepSchedule, lemma4_bound, step_sizes

DEFAULT_BLOCK = 1024


def replica_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Generator for replica ``replica`` of an experiment seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))


def categorical_index(dist: np.ndarray, u: float) -> int:
    """Inverse-CDF index (0-based) for one uniform ``u`` in ``[0, 1)``."""
    cdf = np.cumsum(dist)
    return min(int(np.searchsorted(cdf, u, side="right")), dist.size - 1)


def sample_categorical(dist, rng: np.random.Generator) -> int:
    dist = as_simplex(dist, name="dist")
    return categorical_index(dist, rng.random())


def _batch_indices(P: np.ndarray, u: np.ndarray) -> np.ndarray:
    # row-wise searchsorted(cumsum, u, side="right")
    idx = np.count_nonzero(np.cumsum(P, axis=1) <= u[:, None], axis=1)
    return np.minimum(idx, P.shape[1] - 1)


class LfpState(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    last_actions: tuple[int, int]


class NoiseRecord(NamedTuple):
    """``zeta_x = e_i - v`` and ``zeta_y = e_j - s``; rows may be stacked."""

    zeta_x: np.ndarray
    zeta_y: np.ndarray


def initial_state(game: RegularizedGame, init_actions=(0, 0)) -> LfpState:
    i0, j0 = init_actions
    if not (0 <= i0 < game.n and 0 <= j0 < game.m):
        raise InvalidInputError(f"initial actions {init_actions} out of range for a {game.m}x{game.n} game")
    return LfpState(vertex(game.n, i0), vertex(game.m, j0), (int(i0), int(j0)))


def lfp_step(game: RegularizedGame, state: LfpState, alpha: float, rng: np.random.Generator):
    """One LFP iteration; returns ``(next_state, noise)``."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha!r}")
    x = as_simplex(state.x, game.n, "x")
    y = as_simplex(state.y, game.m, "y")
    v, s = responses(game, x, y)
    i = categorical_index(v, rng.random())
    j = categorical_index(s, rng.random())
    x_new = (1 - alpha) * x
    x_new[i] += alpha
    y_new = (1 - alpha) * y
    y_new[j] += alpha
    zx = -v
    zx[i] += 1.0
    zy = -s
    zy[j] += 1.0
    return LfpState(x_new, y_new, (i, j)), NoiseRecord(zx, zy)


def checkpoints(T: int, stride: int | None = None) -> np.ndarray:
    """Iterations at which gaps are recorded; always includes 0 and ``T``.

    The default is every step up to 1000 and every 10th step after that.
    """
    if stride is None:
        cps = np.concatenate((np.arange(0, min(T, 1000) + 1), np.arange(1000, T + 1, 10)))
    else:
        if stride < 1:
            raise InvalidInputError(f"checkpoint stride must be positive, got {stride}")
        cps = np.arange(0, T + 1, stride)
    return np.unique(np.append(cps, T))


def _require_decreasing(schedule: StepSchedule, allow_constant: bool):
    if isinstance(schedule, Constant) and not allow_constant:
        raise ConfigurationError(
            "a constant step does not give a convergent stochastic run; pass allow_constant=True (--allow-constant-step) to force it"
        )


def run_lfp(
    game: RegularizedGame,
    init_actions,
    schedule: StepSchedule,
    T: int,
    seed: int,
    checkpoint_stride: int | None = None,
    allow_constant: bool = False,
    record_states: bool = True,
) -> Trace:
    """Run one LFP trajectory, recording the gap at each checkpoint.

    Reproducible from ``seed`` and the inputs; identical to replica 0 of
    :func:`monte_carlo` with the same seed.
    """
    _require_decreasing(schedule, allow_constant)
    if T < 1:
        raise InvalidInputError(f"T must be positive, got {T}")
    started = time.perf_counter()
    rng = replica_rng(seed, 0)
    cps = checkpoints(T, checkpoint_stride)
    alphas = step_sizes(schedule, T + 1)
    state = initial_state(game, init_actions)
    xs = np.empty((cps.size, game.n))
    ys = np.empty((cps.size, game.m))
    actions = np.empty((T, 2), dtype=np.int64)
    k = 0
    for t in range(T + 1):
        if t == cps[k]:
            xs[k], ys[k] = state.x, state.y
            k += 1
        if t == T:
            break
        state, _ = lfp_step(game, state, alphas[t], rng)
        actions[t] = state.last_actions
    gaps = batch_gaps(game, xs, ys)
    meta = {
        "game": repr(game),
        "schedule": schedule.name,
        "seed": int(seed),
        "init_actions": tuple(int(a) for a in init_actions),
        "actions": actions,
        "seconds": time.perf_counter() - started,
    }
    return Trace(
        cps,
        alphas[cps],
        gaps,
        np.full(cps.size, np.nan),
        xs if record_states else None,
        ys if record_states else None,
        meta,
    )


# ---------------------------------------------------------------------------
# replica harness


@dataclass
class NoiseSummary:
    """Running statistics of the realized noise over a batch run."""

    count: int = 0
    max_l1_x: float = 0.0
    max_l1_y: float = 0.0
    max_abs_sum_x: float = 0.0
    max_abs_sum_y: float = 0.0
    sum_sq_x: float = 0.0
    sum_sq_y: float = 0.0

    def update(self, Zx: np.ndarray, Zy: np.ndarray):
        nx = np.abs(Zx).sum(axis=1)
        ny = np.abs(Zy).sum(axis=1)
        self.count += Zx.shape[0]
        self.max_l1_x = max(self.max_l1_x, float(nx.max()))
        self.max_l1_y = max(self.max_l1_y, float(ny.max()))
        self.max_abs_sum_x = max(self.max_abs_sum_x, float(np.abs(Zx.sum(axis=1)).max()))
        self.max_abs_sum_y = max(self.max_abs_sum_y, float(np.abs(Zy.sum(axis=1)).max()))
        self.sum_sq_x += float(np.dot(nx, nx))
        self.sum_sq_y += float(np.dot(ny, ny))

    @property
    def sigma2_x(self) -> float:
        return self.sum_sq_x / self.count

    @property
    def sigma2_y(self) -> float:
        return self.sum_sq_y / self.count


@dataclass
class ReplicaRun:
    """Raw output of :func:`simulate_replicas`; rows index checkpoints."""

    checkpoints: np.ndarray
    gaps: np.ndarray  # (n_checkpoints, replicas)
    xs: np.ndarray  # (n_checkpoints, replicas, n)
    ys: np.ndarray  # (n_checkpoints, replicas, m)
    noise: NoiseSummary | None = None


def simulate_replicas(
    game: RegularizedGame,
    schedule: StepSchedule,
    T: int,
    rngs: list[np.random.Generator],
    init_actions=(0, 0),
    checkpoint_stride: int | None = None,
    track_noise: bool = False,
    block: int = DEFAULT_BLOCK,
) -> ReplicaRun:
    """Advance one LFP trajectory per generator, vectorized across replicas.

    Uniforms are pre-drawn per replica in blocks of ``block`` iterations, which
    consumes each stream in exactly the order :func:`lfp_step` would.
    """
    R = len(rngs)
    n, m = game.n, game.m
    i0, j0 = initial_state(game, init_actions).last_actions
    X = np.zeros((R, n))
    X[:, i0] = 1.0
    Y = np.zeros((R, m))
    Y[:, j0] = 1.0
    rows = np.arange(R)
    cps = checkpoints(T, checkpoint_stride)
    xs = np.empty((cps.size, R, n))
    ys = np.empty((cps.size, R, m))
    alphas = step_sizes(schedule, T + 1)
    noise = NoiseSummary() if track_noise else None
    A = game.A
    At = np.ascontiguousarray(A.T)
    inv = 1.0 / game.eta
    k = 0
    U = None
    for t in range(T + 1):
        if t == cps[k]:
            xs[k] = X
            ys[k] = Y
            k += 1
        if t == T:
            break
        b = t % block
        if b == 0:
            U = np.stack([g.random((min(block, T - t), 2)) for g in rngs])
        V = softmax(-(Y @ A) * inv)
        S = softmax((X @ At) * inv)
        i = _batch_indices(V, U[:, b, 0])
        j = _batch_indices(S, U[:, b, 1])
        if noise is not None:
            Zx = -V
            Zx[rows, i] += 1.0
            Zy = -S
            Zy[rows, j] += 1.0
            noise.update(Zx, Zy)
        a = alphas[t]
        X *= 1 - a
        X[rows, i] += a
        Y *= 1 - a
        Y[rows, j] += a
    gaps = batch_gaps(game, xs.reshape(-1, n), ys.reshape(-1, m)).reshape(cps.size, R)
    return ReplicaRun(cps, gaps, xs, ys, noise)


@dataclass
class AggregateTrace:
    """Per-checkpoint summary of a replica ensemble.

    ``in_event[k]`` counts replicas inside both l1 balls at every checkpoint
    from ``iterations[k]`` on (the empirical event started at that time);
    the conditional columns average over replicas in the event started at
    ``burn_in`` and are NaN when that event is empty.
    """

    iterations: np.ndarray
    alphas: np.ndarray
    mean_gap: np.ndarray
    std_gap: np.ndarray
    ci95: np.ndarray
    in_event: np.ndarray
    conditional_mean_gap: np.ndarray
    conditional_ci95: np.ndarray
    replicas: int
    burn_in: int
    event_mask: np.ndarray
    replica_gaps: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def event_fraction(self) -> np.ndarray:
        return self.in_event / self.replicas

    @property
    def burn_in_event_fraction(self) -> float:
        return float(np.mean(self.event_mask))

    def at(self, t: int) -> int:
        """Row index of checkpoint ``t``."""
        k = int(np.searchsorted(self.iterations, t))
        if k >= self.iterations.size or self.iterations[k] != t:
            raise KeyError(f"{t} is not a checkpoint")
        return k


def _mean_ci(G: np.ndarray):
    k = G.shape[1]
    mean = G.mean(axis=1)
    std = G.std(axis=1, ddof=1) if k > 1 else np.zeros(G.shape[0])
    return mean, std, 1.96 * std / math.sqrt(k)


def aggregate(
    run: ReplicaRun,
    saddle: SaddlePoint,
    radii: tuple[float, float],
    burn_in: int,
    alphas: np.ndarray,
    keep_replica_gaps: bool = True,
    meta: dict | None = None,
) -> AggregateTrace:
    r_x, r_y = radii
    inside = (np.abs(run.xs - saddle.x_star).sum(axis=2) <= r_x) & (
        np.abs(run.ys - saddle.y_star).sum(axis=2) <= r_y
    )
    # suffix-all over checkpoints: inside from this checkpoint to the horizon
    from_here = np.flip(np.logical_and.accumulate(np.flip(inside, axis=0), axis=0), axis=0)
    in_event = from_here.sum(axis=1)
    k0 = int(np.searchsorted(run.checkpoints, burn_in))
    if k0 >= run.checkpoints.size:
        raise InvalidInputError(f"burn_in {burn_in} is past the last checkpoint")
    mask = from_here[k0]
    mean, std, ci = _mean_ci(run.gaps)
    if mask.sum() >= 1:
        cmean, _, cci = _mean_ci(run.gaps[:, mask])
        if mask.sum() == 1:
            cci = np.full_like(cmean, np.nan)
    else:
        cmean = np.full(run.checkpoints.size, np.nan)
        cci = np.full(run.checkpoints.size, np.nan)
    return AggregateTrace(
        run.checkpoints,
        alphas[run.checkpoints],
        mean,
        std,
        ci,
        in_event,
        cmean,
        cci,
        run.gaps.shape[1],
        int(run.checkpoints[k0]),
        mask,
        run.gaps if keep_replica_gaps else None,
        dict(meta or {}),
    )


def monte_carlo(
    game: RegularizedGame,
    schedule: StepSchedule,
    T: int,
    replicas: int,
    seed: int,
    saddle: SaddlePoint,
    radii: tuple[float, float],
    burn_in: int,
    checkpoint_stride: int | None = None,
    init_actions=(0, 0),
    allow_constant: bool = False,
    replica_keys=None,
) -> AggregateTrace:
    """Run ``replicas`` independent LFP trajectories and aggregate their gaps.

    ``replica_keys`` overrides the per-replica spawn keys (default
    ``0..replicas-1``); it exists to check that equal keys give equal
    trajectories.
    """
    _require_decreasing(schedule, allow_constant)
    if replicas < 2:
        raise InvalidInputError(f"need at least 2 replicas, got {replicas}")
    keys = range(replicas) if replica_keys is None else list(replica_keys)
    if len(keys) != replicas:
        raise InvalidInputError("replica_keys must have one key per replica")
    started = time.perf_counter()
    rngs = [replica_rng(seed, r) for r in keys]
    run = simulate_replicas(game, schedule, T, rngs, init_actions, checkpoint_stride)
    meta = {
        "seed": int(seed),
        "replicas": replicas,
        "schedule": schedule.name,
        "burn_in": int(burn_in),
        "radii": (float(radii[0]), float(radii[1])),
        "seconds": time.perf_counter() - started,
    }
    return aggregate(run, saddle, radii, burn_in, step_sizes(schedule, T + 1), meta=meta)


# ---------------------------------------------------------------------------
# noise and constants


def frozen_noise(game: RegularizedGame, x, y, draws: int, rng: np.random.Generator) -> NoiseRecord:
    """Noise realizations at a fixed state, ``draws`` rows per player."""
    v, s = responses(game, as_simplex(x, game.n, "x"), as_simplex(y, game.m, "y"))
    U = rng.random((draws, 2))
    i = _batch_indices(np.broadcast_to(v, (draws, game.n)), U[:, 0])
    j = _batch_indices(np.broadcast_to(s, (draws, game.m)), U[:, 1])
    rows = np.arange(draws)
    Zx = np.tile(-v, (draws, 1))
    Zx[rows, i] += 1.0
    Zy = np.tile(-s, (draws, 1))
    Zy[rows, j] += 1.0
    return NoiseRecord(Zx, Zy)


class NoiseStats(NamedTuple):
    sigma2_x_hat: float
    sigma2_y_hat: float
    mean_zeta_x: np.ndarray
    mean_zeta_y: np.ndarray


def estimate_noise_stats(noise_records) -> NoiseStats:
    """Empirical ``E ||zeta||_1^2`` and coordinate means.

    Accepts a sequence of :class:`NoiseRecord` or one record of stacked rows.
    """
    if isinstance(noise_records, NoiseRecord):
        Zx, Zy = np.atleast_2d(noise_records.zeta_x), np.atleast_2d(noise_records.zeta_y)
    else:
        records = list(noise_records)
        if not records:
            raise InvalidInputError("need at least one noise record")
        Zx = np.vstack([np.atleast_2d(r.zeta_x) for r in records])
        Zy = np.vstack([np.atleast_2d(r.zeta_y) for r in records])
    nx = np.abs(Zx).sum(axis=1)
    ny = np.abs(Zy).sum(axis=1)
    return NoiseStats(float(np.mean(nx * nx)), float(np.mean(ny * ny)), Zx.mean(axis=0), Zy.mean(axis=0))


@dataclass(frozen=True)
class LocalityEstimate:
    r_x: float
    r_y: float
    L_x: float
    L_y: float
    kappa_x: float
    kappa_y: float
    sigma2_x: float
    sigma2_y: float
    C_bar: float
    kappa: float
    eta: float


def locality_constants(
    game: RegularizedGame, saddle: SaddlePoint, sigma2_x: float = 4.0, sigma2_y: float = 4.0
) -> LocalityEstimate:
    """Neighborhood radii and local constants around the saddle point.

    Radii are half the smallest saddle coordinate.  On such a ball every
    coordinate stays above ``min x* - r_x = min x* / 2``, so the entropy
    Hessian ``diag(1/x)`` gives l1-smoothness ``L_x = 2 / min x*``.
    ``sigma2`` defaults to the worst case 4 since ``||zeta||_1 <= 2``.
    """
    mx = float(np.min(saddle.x_star))
    my = float(np.min(saddle.y_star))
    if not (mx > 0 and my > 0):
        raise InvalidInputError("saddle point must lie in the relative interior")
    r_x, r_y = mx / 2, my / 2
    L_x, L_y = 1.0 / (mx - r_x), 1.0 / (my - r_y)
    eta = game.eta
    k = kappa(game)
    kx, ky = L_x / eta, L_y / eta
    C_bar = (k * k + kx) * eta * (4 + sigma2_x) + (k * k + ky) * eta * (4 + sigma2_y)
    return LocalityEstimate(r_x, r_y, L_x, L_y, kx, ky, float(sigma2_x), float(sigma2_y), C_bar, k, eta)


def theorem4_bound(loc: LocalityEstimate, schedule: StepSchedule, t: int) -> float:
    """Local rate on the conditional expected gap, ``t`` steps past the burn-in."""
    if not (isinstance(schedule, RationalQ) and schedule.q in (1, 2)):
        raise UnsupportedScheduleError(f"local rate is stated for q = 1 or 2, got {schedule.name!r}")
    return lemma4_bound(loc.C_bar, schedule, t)


@dataclass(frozen=True)
class ComplexityEstimate:
    """Iteration estimate for an expected ``epsilon`` gap.

    The total is ``T(delta) + tail_iterations``; ``T(delta)`` (the time after
    which the trajectory stays near the saddle with probability ``1 - delta``)
    has no known bound and is left as ``None``.
    """

    tail_iterations: int
    v_bar: float
    delta: float
    burn_in: None = None


def _ceil(q: float) -> int:
    k = round(q)
    return k if abs(q - k) <= 1e-12 * max(1.0, abs(q)) else math.ceil(q)


def global_complexity_estimate(game: RegularizedGame, loc: LocalityEstimate, epsilon: float) -> ComplexityEstimate:
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon!r}")
    v_bar = gap_upper_bound(game)
    return ComplexityEstimate(_ceil(8 * loc.C_bar / epsilon) - 1, v_bar, epsilon / (2 * v_bar))
