import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import MATCHING_PENNIES
from hypothesis import given
from hypothesis import strategies as st
from oracles import reference_lfp

from logitplay.dlfp import SaddlePoint, solve_fixed_point
from logitplay.errors import ConfigurationError, InvalidInputError, UnsupportedScheduleError
from logitplay.game import RegularizedGame, duality_gap, uniform, vertex
from logitplay.lfp import (
    LfpState,
    LocalityEstimate,
    NoiseRecord,
    categorical_index,
    checkpoints,
    estimate_noise_stats,
    frozen_noise,
    global_complexity_estimate,
    initial_state,
    lfp_step,
    locality_constants,
    monte_carlo,
    replica_rng,
    run_lfp,
    sample_categorical,
    simulate_replicas,
    theorem4_bound,
)
from logitplay.schedules import Constant, NesterovGFW, RationalQ


def loc_with(C_bar):
    return LocalityEstimate(0.1, 0.1, 1.0, 1.0, 1.0, 1.0, 4.0, 4.0, C_bar, 1.0, 1.0)


# --- sampling ----------------------------------------------------------


def test_degenerate_distribution_always_hits_its_vertex():
    rng = replica_rng(0)
    assert all(sample_categorical([0.0, 1.0], rng) == 1 for _ in range(1000))
    assert categorical_index(np.array([0.0, 1.0]), 0.0) == 1


def test_inverse_cdf_boundary():
    assert categorical_index(np.full(3, 1 / 3), 0.99) == 2
    assert categorical_index(np.full(3, 1 / 3), 0.0) == 0
    assert categorical_index(np.array([0.25, 0.75]), 0.25) == 1


def test_fair_coin_frequency():
    rng = replica_rng(123)
    draws = [sample_categorical([0.5, 0.5], rng) for _ in range(100_000)]
    # 6 sigma of a binomial(1e5, 1/2) proportion is about 0.0095
    assert abs(draws.count(0) / 1e5 - 0.5) <= 0.01


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_inverse_cdf_agrees_with_searchsorted(seed, k):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    for u in rng.random(20):
        i = categorical_index(p, u)
        assert 0 <= i < k
        assert i == min(int(np.searchsorted(np.cumsum(p), u, side="right")), k - 1)


def test_block_draws_match_scalar_draws():
    a, b = replica_rng(5, 2), replica_rng(5, 2)
    scalars = [a.random() for _ in range(9)]
    block = b.random((4, 2)).ravel().tolist() + [b.random()]
    assert scalars == block


def test_replica_streams_differ():
    assert replica_rng(1, 0).random() != replica_rng(1, 1).random()


# --- single steps and runs ---------------------------------------------


def test_step_alpha_zero_keeps_histories():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    state = LfpState(np.array([0.3, 0.7]), np.array([0.6, 0.4]), (0, 0))
    new, _ = lfp_step(game, state, 0.0, replica_rng(0))
    np.testing.assert_array_equal(new.x, state.x)
    np.testing.assert_array_equal(new.y, state.y)


def test_zero_game_noise_is_vertex_minus_uniform():
    game = RegularizedGame(np.zeros((3, 4)), 1.0)
    state = initial_state(game, (1, 2))
    new, noise = lfp_step(game, state, 0.5, replica_rng(9))
    i, j = new.last_actions
    np.testing.assert_allclose(noise.zeta_x, vertex(4, i) - uniform(4), atol=1e-15)
    np.testing.assert_allclose(noise.zeta_y, vertex(3, j) - uniform(3), atol=1e-15)


def test_step_replay_is_bit_identical():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    state = LfpState(np.array([0.3, 0.7]), np.array([0.6, 0.4]), (0, 0))
    a = lfp_step(game, state, 0.25, replica_rng(77))
    b = lfp_step(game, state, 0.25, replica_rng(77))
    np.testing.assert_array_equal(a[0].x, b[0].x)
    np.testing.assert_array_equal(a[0].y, b[0].y)
    assert a[0].last_actions == b[0].last_actions


def test_first_harmonic_step_overwrites_init():
    game = RegularizedGame(np.random.default_rng(0).uniform(-1, 1, (3, 4)), 0.3)
    tr = run_lfp(game, (2, 1), RationalQ(1), 1, seed=4)
    i, j = tr.meta["actions"][0]
    np.testing.assert_array_equal(tr.xs[-1], vertex(4, i))
    np.testing.assert_array_equal(tr.ys[-1], vertex(3, j))


def test_pennies_run_matches_reference_implementation():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    tr = run_lfp(game, (0, 0), RationalQ(2), 10_000, seed=2024)
    actions, x, y = reference_lfp(MATCHING_PENNIES, 0.2, 0, 0, 2, 10_000, 2024)
    assert [tuple(a) for a in tr.meta["actions"].tolist()] == actions
    np.testing.assert_allclose(tr.xs[-1], x, rtol=1e-12)
    np.testing.assert_allclose(tr.ys[-1], y, rtol=1e-12)
    assert tr.gaps[-1] <= 0.5
    assert tr.gaps[-1] == pytest.approx(duality_gap(game, x, y), rel=1e-9)


def test_run_is_reproducible():
    game = RegularizedGame(np.random.default_rng(1).uniform(-1, 1, (4, 3)), 0.3)
    a = run_lfp(game, (0, 0), RationalQ(1), 3000, seed=8)
    b = run_lfp(game, (0, 0), RationalQ(1), 3000, seed=8)
    np.testing.assert_array_equal(a.gaps, b.gaps)
    np.testing.assert_array_equal(a.meta["actions"], b.meta["actions"])


def test_constant_schedule_needs_override():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    with pytest.raises(ConfigurationError):
        run_lfp(game, (0, 0), Constant(0.1), 10, seed=0)
    tr = run_lfp(game, (0, 0), Constant(0.1), 10, seed=0, allow_constant=True)
    assert len(tr) == 11


def test_bad_initial_actions():
    with pytest.raises(InvalidInputError):
        run_lfp(RegularizedGame(MATCHING_PENNIES, 0.2), (2, 0), RationalQ(1), 5, seed=0)


def test_checkpoint_layout():
    cps = checkpoints(2000)
    assert cps[0] == 0 and cps[-1] == 2000
    assert np.all(np.diff(cps[:1001]) == 1) and np.all(np.diff(cps[1000:]) == 10)
    np.testing.assert_array_equal(checkpoints(25, 10), [0, 10, 20, 25])
    with pytest.raises(InvalidInputError):
        checkpoints(10, 0)


# --- replica harness ---------------------------------------------------


@pytest.fixture(scope="module")
def pennies_saddle():
    return solve_fixed_point(RegularizedGame(MATCHING_PENNIES, 0.2))


def test_single_run_equals_replica_zero():
    game = RegularizedGame(np.random.default_rng(2).uniform(-1, 1, (3, 5)), 0.25)
    tr = run_lfp(game, (1, 2), RationalQ(2), 1500, seed=31)
    run = simulate_replicas(game, RationalQ(2), 1500, [replica_rng(31, 0)], (1, 2), block=100)
    np.testing.assert_allclose(run.xs[:, 0], tr.xs, rtol=0, atol=1e-15)
    np.testing.assert_allclose(run.gaps[:, 0], tr.gaps, rtol=1e-12, atol=1e-15)


def test_replica_independent_of_ensemble_size():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    small = simulate_replicas(game, RationalQ(1), 500, [replica_rng(3, r) for r in range(3)])
    large = simulate_replicas(game, RationalQ(1), 500, [replica_rng(3, r) for r in range(7)], block=64)
    np.testing.assert_array_equal(small.gaps, large.gaps[:, :3])


def test_forced_identical_keys_give_identical_replicas(pennies_saddle):
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    agg = monte_carlo(game, RationalQ(2), 300, 2, 17, pennies_saddle, (0.25, 0.25), 10, replica_keys=[5, 5])
    np.testing.assert_array_equal(agg.replica_gaps[:, 0], agg.replica_gaps[:, 1])
    assert np.all(agg.std_gap == 0)


def test_full_radius_event_contains_everything(pennies_saddle):
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    agg = monte_carlo(game, RationalQ(1), 400, 20, 0, pennies_saddle, (2.0, 2.0), 0)
    assert np.all(agg.in_event == 20)
    np.testing.assert_allclose(agg.conditional_mean_gap, agg.mean_gap, rtol=1e-14)


def test_empty_event_is_flagged_absent(pennies_saddle):
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    agg = monte_carlo(game, RationalQ(1), 200, 5, 0, pennies_saddle, (0.0, 0.0), 0)
    assert agg.burn_in_event_fraction == 0.0
    assert np.all(np.isnan(agg.conditional_mean_gap)) and np.all(np.isnan(agg.conditional_ci95))


def test_event_fraction_non_decreasing(pennies_saddle):
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    agg = monte_carlo(game, RationalQ(2), 2000, 50, 4, pennies_saddle, (0.25, 0.25), 100)
    assert np.all(np.diff(agg.in_event) >= 0)
    assert np.all(agg.in_event <= agg.replicas)
    assert np.all(agg.mean_gap >= 0) and np.all(agg.ci95 >= 0)


def test_zero_game_mean_gap_decreases():
    game = RegularizedGame(np.zeros((2, 2)), 1.0)
    sp = SaddlePoint(uniform(2), uniform(2), 0.0, 0.0)
    agg = monte_carlo(game, RationalQ(2), 1000, 1000, 6, sp, (2.0, 2.0), 0)
    k100, k1000 = agg.at(100), agg.at(1000)
    assert agg.mean_gap[k1000] + agg.ci95[k1000] < agg.mean_gap[k100] - agg.ci95[k100]


def test_monte_carlo_validation(pennies_saddle):
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    with pytest.raises(InvalidInputError):
        monte_carlo(game, RationalQ(1), 10, 1, 0, pennies_saddle, (1, 1), 0)
    with pytest.raises(ConfigurationError):
        monte_carlo(game, Constant(0.1), 10, 4, 0, pennies_saddle, (1, 1), 0)
    with pytest.raises(InvalidInputError):
        monte_carlo(game, RationalQ(1), 10, 3, 0, pennies_saddle, (1, 1), 0, replica_keys=[0, 1])


def test_histories_stay_normalized_over_a_million_updates():
    game = RegularizedGame(np.random.default_rng(5).uniform(-1, 1, (4, 6)), 0.1)
    run = simulate_replicas(game, RationalQ(1), 10_000, [replica_rng(1, r) for r in range(100)], checkpoint_stride=500)
    assert np.max(np.abs(run.xs.sum(axis=2) - 1)) <= 1e-12
    assert np.max(np.abs(run.ys.sum(axis=2) - 1)) <= 1e-12


# --- noise -------------------------------------------------------------


def test_recorded_noise_is_bounded_and_centered():
    game = RegularizedGame(np.random.default_rng(5).uniform(-1, 1, (4, 6)), 0.1)
    run = simulate_replicas(game, RationalQ(2), 2000, [replica_rng(2, r) for r in range(10)], track_noise=True)
    nz = run.noise
    assert nz.count == 20_000
    assert nz.max_l1_x <= 2 + 1e-12 and nz.max_l1_y <= 2 + 1e-12
    assert nz.max_abs_sum_x <= 1e-12 and nz.max_abs_sum_y <= 1e-12
    assert 0 <= nz.sigma2_x <= 4 and 0 <= nz.sigma2_y <= 4


def test_frozen_state_noise_is_unbiased():
    game = RegularizedGame(np.random.default_rng(5).uniform(-1, 1, (4, 6)), 0.3)
    rec = frozen_noise(game, np.random.default_rng(1).dirichlet(np.ones(6)), uniform(4), 100_000, replica_rng(8))
    for Z in (rec.zeta_x, rec.zeta_y):
        se = Z.std(axis=0, ddof=1) / math.sqrt(Z.shape[0])
        assert np.all(np.abs(Z.mean(axis=0)) <= 6 * se + 1e-15)


def test_noise_stats_of_zero_records():
    stats = estimate_noise_stats([NoiseRecord(np.zeros(3), np.zeros(2))] * 5)
    assert stats.sigma2_x_hat == 0 and stats.sigma2_y_hat == 0
    assert not stats.mean_zeta_x.any() and not stats.mean_zeta_y.any()


def test_noise_stats_degenerate_distribution():
    game = RegularizedGame(np.array([[0.0, 50.0]]), 1.0)
    rec = frozen_noise(game, [1.0, 0.0], [1.0], 1000, replica_rng(0))
    stats = estimate_noise_stats(rec)
    assert stats.sigma2_x_hat <= 1e-40 and stats.sigma2_y_hat == 0.0


def test_noise_stats_zero_game_two_actions():
    game = RegularizedGame(np.zeros((2, 2)), 1.0)
    rec = frozen_noise(game, uniform(2), uniform(2), 100_000, replica_rng(4))
    stats = estimate_noise_stats(rec)
    # |e_i - (1/2, 1/2)|_1 = 1 for either i
    assert stats.sigma2_x_hat == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.abs(stats.mean_zeta_x) <= 0.02) and np.all(np.abs(stats.mean_zeta_y) <= 0.02)


def test_noise_stats_needs_records():
    with pytest.raises(InvalidInputError):
        estimate_noise_stats([])


# --- constants ---------------------------------------------------------


def test_locality_pennies():
    game = RegularizedGame(MATCHING_PENNIES, 0.5)
    loc = locality_constants(game, solve_fixed_point(game))
    assert loc.r_x == pytest.approx(0.25, rel=1e-9) and loc.L_x == pytest.approx(4.0, rel=1e-9)
    assert loc.kappa_x == pytest.approx(8.0, rel=1e-9)
    k2 = 4.0
    assert loc.C_bar == pytest.approx((k2 + loc.kappa_x) * 8 * 0.5 + (k2 + loc.kappa_y) * 8 * 0.5, rel=1e-12)


def test_locality_random_game_smoothness_dominates_ball_samples():
    game = RegularizedGame(np.random.default_rng(13).uniform(-1, 1, (4, 5)), 0.3)
    sp = solve_fixed_point(game)
    loc = locality_constants(game, sp, sigma2_x=1.5, sigma2_y=2.5)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        d = rng.normal(size=5)
        d -= d.mean()
        d *= rng.uniform(0, loc.r_x) / np.abs(d).sum()
        worst = max(worst, np.max(1 / (sp.x_star + d)))
    assert worst <= loc.L_x
    expected = (loc.kappa**2 + loc.kappa_x) * 0.3 * 5.5 + (loc.kappa**2 + loc.kappa_y) * 0.3 * 6.5
    assert loc.C_bar == pytest.approx(expected, rel=1e-12)
    assert loc.r_x <= np.min(sp.x_star) and loc.r_y <= np.min(sp.y_star)


def test_locality_rejects_boundary_saddle():
    game = RegularizedGame(MATCHING_PENNIES, 0.5)
    sp = SaddlePoint(np.array([1.0, 0.0]), uniform(2), 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        locality_constants(game, sp)


def test_local_rate_bound_examples():
    assert theorem4_bound(loc_with(1.0), RationalQ(2), 3) == 1.0
    assert theorem4_bound(loc_with(1.0), RationalQ(1), 1) == 1.0
    with pytest.raises(UnsupportedScheduleError):
        theorem4_bound(loc_with(1.0), RationalQ(3), 3)
    with pytest.raises(UnsupportedScheduleError):
        theorem4_bound(loc_with(1.0), NesterovGFW(), 3)


def test_local_rate_bound_pennies_value():
    game = RegularizedGame(MATCHING_PENNIES, 0.2)
    loc = locality_constants(game, solve_fixed_point(game))
    # kappa^2 = 25, kappa_x = kappa_y = 20, sigma^2 = 4: C = 2 * 45 * 0.2 * 8 = 144
    assert loc.C_bar == pytest.approx(144.0, rel=1e-9)
    assert theorem4_bound(loc, RationalQ(2), 1000) == pytest.approx(float(Fraction(576, 1001)), rel=1e-9)


def test_complexity_examples():
    game = RegularizedGame(np.zeros((2, 2)), 1.0)
    assert global_complexity_estimate(game, loc_with(1.0), 1.0).tail_iterations == 7
    assert global_complexity_estimate(game, loc_with(1.0), 0.001).tail_iterations == 7999
    est = global_complexity_estimate(game, loc_with(1.0), 0.1)
    assert est.v_bar == pytest.approx(2 * math.log(2), rel=1e-15)
    # epsilon / (2 * v_bar) = 0.1 / (4 ln 2)
    assert est.delta == pytest.approx(0.025 / math.log(2), rel=1e-14)
    assert est.burn_in is None
    with pytest.raises(InvalidInputError):
        global_complexity_estimate(game, loc_with(1.0), 0.0)
