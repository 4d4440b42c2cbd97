"""Power, multipower and truncated variations of observed increments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import increments, univariate_increments
from .errors import ParameterError, ShapeError

__all__ = [
    "TruncationRule",
    "abs_moment",
    "power_variation",
    "bipower_variation",
    "multipower_variation",
    "truncated_rv",
    "bivariate_truncated_cov",
]


@dataclass(frozen=True)
class TruncationRule:
    """Jump threshold ``alpha * dt^theta`` with ``0 < theta < 1/2``."""

    alpha: float = 2.0
    theta: float = 0.48

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("truncation alpha must be positive")
        if not 0 < self.theta < 0.5:
            raise ParameterError("truncation theta must lie in (0, 1/2)")

    def threshold(self, n: int) -> float:
        return self.alpha * (1.0 / n) ** self.theta


def abs_moment(r: float) -> float:
    """``E|N(0,1)|^r = 2^(r/2) Gamma((r+1)/2) / Gamma(1/2)``."""
    if not r > 0:
        raise ParameterError("moment order must be positive")
    return math.exp(0.5 * r * math.log(2.0) + math.lgamma((r + 1) / 2) - math.lgamma(0.5))


def power_variation(sample, p: float) -> float:
    """Sum of ``|dY_i|^p`` over all increments."""
    if not p > 0:
        raise ParameterError("power must be positive")
    dy = univariate_increments(sample)
    if p == 2:
        return float(np.sum(dy * dy))
    return float(np.sum(np.abs(dy) ** p))


def multipower_variation(sample, exponents, scaled: bool = False) -> float:
    """Sum over ``i`` of ``prod_k |dY_{i+k}|^{p_k}``.

    With ``scaled=True`` the sum is multiplied by ``n^(sum p / 2 - 1)`` and
    divided by ``prod m_{p_k}``, which targets ``int sigma^(sum p) dt`` for a
    continuous path.
    """
    exponents = [float(p) for p in exponents]
    if not exponents:
        raise ParameterError("need at least one exponent")
    if any(not p > 0 for p in exponents):
        raise ParameterError("exponents must be positive")
    dy = np.abs(univariate_increments(sample))
    n, width = dy.size, len(exponents)
    if n < width:
        raise ParameterError(f"need at least {width} increments, got {n}")
    prod = np.ones(n - width + 1)
    for k, p in enumerate(exponents):
        block = dy[k : n - width + 1 + k]
        prod *= block * block if p == 2 else block**p
    value = float(np.sum(prod))
    if scaled:
        total = sum(exponents)
        value *= n ** (total / 2 - 1) / math.prod(abs_moment(p) for p in exponents)
    return value


def bipower_variation(sample, r: float = 1.0, s: float = 1.0, scaled: bool = False) -> float:
    """``sum_{i=1}^{n-1} |dY_i|^r |dY_{i+1}|^s``, optionally normalized."""
    return multipower_variation(sample, (r, s), scaled=scaled)


def truncated_rv(sample, rule: TruncationRule | None = None) -> tuple[float, float]:
    """Split realized variance at ``alpha dt^theta``.

    Returns ``(trvc, trvj)``: squared increments with ``|dY| <=`` threshold
    and ``>`` threshold respectively.
    """
    rule = rule or TruncationRule()
    dy = univariate_increments(sample)
    sq = dy * dy
    big = np.abs(dy) > rule.threshold(dy.size)
    return float(np.sum(sq[~big])), float(np.sum(sq[big]))


def bivariate_truncated_cov(sample, rule: TruncationRule | None = None, side: str = "above") -> float:
    """Cross realized covariance restricted by the norm of the joint increment.

    ``side="below"`` keeps cells with ``||dY_i|| <=`` threshold (continuous
    covariation), ``side="above"`` the rest (jump covariation).
    """
    rule = rule or TruncationRule()
    dy = increments(sample)
    if dy.shape[0] != 2:
        raise ShapeError(f"bivariate covariance needs d=2, got d={dy.shape[0]}")
    if side not in ("below", "above"):
        raise ParameterError(f"side must be 'below' or 'above', got {side!r}")
    big = np.hypot(dy[0], dy[1]) > rule.threshold(dy.shape[1])
    keep = big if side == "above" else ~big
    return float(np.sum(dy[0, keep] * dy[1, keep]))
