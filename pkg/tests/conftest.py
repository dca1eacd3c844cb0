import numpy as np
import pytest

from radcomopt import ChannelRealization, DeploymentSpec


@pytest.fixture
def sep_spec():
    """Default separated deployment: 8+8 antennas, 50+50 power, 4 users."""
    return DeploymentSpec.separated()


@pytest.fixture
def shared_spec():
    return DeploymentSpec.shared()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_channels(rng, n_users, n_total, n_radar=0):
    h = (rng.standard_normal((n_users, n_total))
         + 1j * rng.standard_normal((n_users, n_total))) / np.sqrt(2.0)
    return ChannelRealization(full_channels=h, n_radar=n_radar)


def random_precoder(rng, n, k, power=None):
    p = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    if power is not None:
        p *= np.sqrt(power) / np.linalg.norm(p)
    return p
