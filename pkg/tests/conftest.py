import numpy as np
import pytest

from smallnoise.paths import Grid, NoiseSpec, add_noise, simulate_brownian


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brownian_sample(sigma=0.2, n=20000, seed=0, zeta=0.0, jumps=()):
    """Constant-volatility path, optionally with fixed jumps and small noise."""
    path = simulate_brownian(sigma, Grid(n), seed, jumps)
    zeta = np.broadcast_to(np.asarray(zeta, float), (path.d,))
    return add_noise(path, NoiseSpec(tuple(zeta)), seed)
