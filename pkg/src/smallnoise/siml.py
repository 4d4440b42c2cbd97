"""SIML estimation of quadratic variation, noise level and integrated volatility.

The observed increments are projected onto the eigenvectors of
``C_n^{-1} C_n^{-T}`` (a cosine basis) and the quadratic variation is read
off the lowest ``m_n = n^p`` frequencies, where the noise contribution
vanishes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from ._util import increments, observations
from .errors import ParameterError
from .variation import TruncationRule, bivariate_truncated_cov, truncated_rv

__all__ = [
    "SimlConfig",
    "SimlResult",
    "difference_matrix",
    "cosine_basis",
    "siml_eigenvalues",
    "siml_transform",
    "siml_qv",
    "siml",
    "noise_variance",
    "integrated_volatility",
]

# direct projection is used below this many n*m entries
_DIRECT_LIMIT = 6_000_000


@dataclass(frozen=True)
class SimlConfig:
    """Number of frequencies ``m_n = floor(n^p)``, ``0 < p < 1/2``."""

    p: float = 0.49

    def __post_init__(self):
        if not 0 < self.p < 0.5:
            raise ParameterError("SIML exponent p must lie in (0, 1/2)")

    def m(self, n: int) -> int:
        return max(1, int(math.floor(n**self.p)))


@dataclass
class SimlResult:
    qv: np.ndarray
    zeta_hat: np.ndarray
    zeta_raw: np.ndarray
    m: int
    diagnostics: list = field(default_factory=list)


def difference_matrix(n: int) -> np.ndarray:
    """``C_n^{-1}``: ones on the diagonal, minus ones below it."""
    return np.eye(n) - np.eye(n, k=-1)


def cosine_basis(n: int, m: int | None = None) -> np.ndarray:
    """First ``m`` rows of ``P_n``, ``p_kj = sqrt(2/(n+1/2)) cos(2 pi (k-1/2)(j-1/2)/(2n+1))``."""
    m = n if m is None else m
    k = np.arange(1, m + 1)[:, None] - 0.5
    j = np.arange(1, n + 1)[None, :] - 0.5
    return math.sqrt(2.0 / (n + 0.5)) * np.cos((2.0 * math.pi / (2 * n + 1)) * k * j)


def siml_eigenvalues(n: int) -> np.ndarray:
    """``d_k = 2 (1 - cos(pi (2k-1)/(2n+1)))``, ``k = 1..n``."""
    k = np.arange(1, n + 1)
    return 2.0 * (1.0 - np.cos(math.pi * (2 * k - 1) / (2 * n + 1)))


@functools.lru_cache(maxsize=4)
def _basis_cached(n, m):
    basis = cosine_basis(n, m)
    basis.setflags(write=False)
    return basis


def _project_fft(dy, m):
    # Re FFT of the increments placed on odd slots of a length 4(2n+1) buffer
    n = dy.shape[0]
    length = 4 * (2 * n + 1)
    buf = np.zeros((length,) + dy.shape[1:])
    buf[1 : 2 * n : 2] = dy
    spec = scipy.fft.rfft(buf, axis=0)
    return math.sqrt(2.0 / (n + 0.5)) * spec[1 : 2 * m : 2].real


def siml_transform(dy, m: int, method: str = "auto") -> np.ndarray:
    """Rows ``1..m`` of ``Z_n = dt^{-1/2} P_n C_n^{-1} (W_n - W_0)``.

    ``C_n^{-1}(W_n - W_0)`` is the increment matrix, so only the cosine
    projection of ``dy`` (shape ``(n,)`` or ``(n, d)``) is computed.
    ``method`` is ``"direct"`` (cached basis, O(nm)), ``"fft"`` or ``"auto"``.
    """
    dy = np.asarray(dy, dtype=float)
    n = dy.shape[0]
    if not 1 <= m <= n:
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    if method == "auto":
        method = "direct" if n * m <= _DIRECT_LIMIT else "fft"
    if method == "direct":
        z = _basis_cached(n, m) @ dy
    elif method == "fft":
        z = _project_fft(dy, m)
    else:
        raise ParameterError(f"unknown transform method {method!r}")
    return math.sqrt(n) * z


def siml_qv(sample, cfg: SimlConfig | None = None, method: str = "auto") -> np.ndarray:
    """SIML estimate of ``[X, X]``: ``(1/m) sum_{k<=m} z_k z_k^T``, a ``d x d`` matrix."""
    return _qv(increments(sample), cfg or SimlConfig(), method)


def _qv(dy, cfg, method):
    m = cfg.m(dy.shape[1])
    z = siml_transform(dy.T, m, method)
    qv = z.T @ z / m
    return 0.5 * (qv + qv.T)


def siml(sample, cfg: SimlConfig | None = None, method: str = "auto") -> SimlResult:
    """Quadratic variation and noise level ``zeta_m = (RV_m - qv_mm) / 2``.

    Negative noise estimates are floored at zero and reported in
    ``diagnostics``; ``zeta_raw`` keeps the unfloored values.
    """
    return _fit(increments(sample), cfg or SimlConfig(), method)


def _fit(dy, cfg, method="auto"):
    qv = _qv(dy, cfg, method)
    rv = np.sum(dy * dy, axis=1)
    raw = 0.5 * (rv - np.diag(qv))
    diagnostics = []
    for m, value in enumerate(raw):
        if value < 0:
            diagnostics.append(f"zeta_hat[{m}] = {value:.3e} floored at 0")
        if qv[m, m] < 0:
            diagnostics.append(f"qv[{m},{m}] = {qv[m, m]:.3e} negative")
    return SimlResult(qv=qv, zeta_hat=np.maximum(raw, 0.0), zeta_raw=raw, m=cfg.m(dy.shape[1]), diagnostics=diagnostics)


def noise_variance(sample, cfg: SimlConfig | None = None) -> np.ndarray:
    """Per-component noise level estimate, floored at zero."""
    return siml(sample, cfg).zeta_hat


def integrated_volatility(sample, cfg: SimlConfig | None = None, rule: TruncationRule | None = None) -> np.ndarray:
    """Jump- and noise-robust integrated (co)volatility, ``d x d``.

    Diagonal: SIML quadratic variation minus the truncated jump variation.
    Off-diagonal (``d == 2``): SIML covariation minus the jump covariation of
    cells whose joint increment exceeds the threshold.
    """
    obs = observations(sample)
    iv = siml_qv(obs, cfg).copy()
    for m in range(obs.shape[0]):
        iv[m, m] -= truncated_rv(obs[m], rule)[1]
    if obs.shape[0] == 2:
        jump_cov = bivariate_truncated_cov(obs, rule, side="above")
        iv[0, 1] -= jump_cov
        iv[1, 0] -= jump_cov
    return iv
