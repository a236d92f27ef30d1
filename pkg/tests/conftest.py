import numpy as np
import pytest

from secbeam import ScenarioConfig, generate_channels


@pytest.fixture
def desk_cfg():
    """The standard simulation geometry at a 5 dB target, 20 dB budget."""
    return ScenarioConfig(n_tx=4, n_rx=2, n_eve=4, n_users=3,
                          total_power=100.0, sinr_targets=10 ** 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_channels(cfg, seed):
    return generate_channels(cfg, np.random.default_rng(seed))
