import numpy as np
import pytest

from channel_model import ChiSquare, Exponential, FadingDistribution, RandomStream, table_one


@pytest.fixture
def four_state():
    return table_one()


@pytest.fixture
def rayleigh_coarse():
    """Exp(2) x Exp(1) on a lighter grid for the faster solver tests."""
    return FadingDistribution.independent(Exponential(2.0), Exponential(1.0), quadrature_order=48)


@pytest.fixture
def chi_square_coarse():
    return FadingDistribution.independent(ChiSquare(2.0, 2.0), ChiSquare(2.0, 1.0), quadrature_order=48)


@pytest.fixture
def point_mass_eve():
    """Three main-gain levels against a deterministic eavesdropper."""
    return FadingDistribution.discrete([(0.5, 1.0, 0.1), (2.0, 1.0, 0.3), (8.0, 1.0, 0.6)])


@pytest.fixture
def stream():
    return RandomStream(seed=12345, stream_id=0)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
