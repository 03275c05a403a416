import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])

# 3x4 instance shared by the frozen oracle values
A34 = np.array(
    [
        [0.62, -0.37, 0.91, -0.05],
        [-0.84, 0.13, 0.47, -0.69],
        [0.28, 0.76, -0.52, 0.35],
    ]
)


def random_simplex(rng, k, floor=0.0):
    w = rng.exponential(size=k) + floor
    return w / w.sum()


@st.composite
def games(draw, max_dim=6, etas=(0.05, 2.0)):
    from logitplay.game import RegularizedGame

    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    eta = draw(st.floats(*etas))
    A = np.random.default_rng(seed).uniform(-1, 1, (m, n))
    return RegularizedGame(A, eta)


@st.composite
def game_points(draw, max_dim=6, etas=(0.05, 2.0), floor=0.0):
    """A game with a random ``(x, y)`` pair."""
    game = draw(games(max_dim, etas))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return game, random_simplex(rng, game.n, floor), random_simplex(rng, game.m, floor)


@pytest.fixture
def pennies():
    from logitplay.game import RegularizedGame

    return RegularizedGame(MATCHING_PENNIES, 0.5)
