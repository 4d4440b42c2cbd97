import numpy as np

from .errors import ShapeError


def observations(sample) -> np.ndarray:
    """Observation matrix ``(d, n+1)`` from a sample, latent path or array."""
    if hasattr(sample, "y"):
        obs = sample.y
    elif hasattr(sample, "x"):
        obs = sample.x
    else:
        obs = sample
    obs = np.asarray(obs, dtype=float)
    if obs.ndim == 1:
        obs = obs[None, :]
    if obs.ndim != 2 or obs.shape[1] < 2:
        raise ShapeError(f"expected (d, n+1) observations, got shape {obs.shape}")
    return obs


def increments(sample) -> np.ndarray:
    """Increments ``(d, n)`` of the observations."""
    return np.diff(observations(sample), axis=1)


def univariate_increments(sample) -> np.ndarray:
    dy = increments(sample)
    if dy.shape[0] != 1:
        raise ShapeError(f"expected a univariate sample, got d={dy.shape[0]}")
    return dy[0]
