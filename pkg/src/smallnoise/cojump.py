"""Ratio test for common jumps in a bivariate path observed with small noise.

``T = S(2) / S(1)`` compares fourth-order cross power sums of two-step and
one-step increments. ``T -> 1`` when the two components jump together, so
the null of co-jumps is rejected when ``|T - 1| / sqrt(V)`` is large.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ._util import increments
from .avar import NO_MASS, AvarReport, WindowRule, cojump_avar, cojump_ingredients
from .errors import DegenerateError, ParameterError, ShapeError
from .siml import SimlConfig
from .variation import TruncationRule

__all__ = ["TestReport", "s_krs", "t_stat", "cojump_test", "VARIANTS"]

VARIANTS = ("corrected", "jt")


@dataclass
class TestReport:
    t_stat: float
    s122: float
    s222: float
    variance: AvarReport
    z: float
    level: float
    critical: float
    reject: bool
    variant: str
    n: int
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "t": self.t_stat,
            "z": self.z,
            "variance": self.variance.value,
            "variant": self.variant,
            "level": self.level,
            "reject": self.reject,
            "n": self.n,
            "seed": self.seed,
        }


def _bivariate(sample):
    dy = increments(sample)
    if dy.shape[0] != 2:
        raise ShapeError(f"co-jump statistics need d=2, got d={dy.shape[0]}")
    return dy


def _s(dy, k, r, s):
    n = dy.shape[1]
    blocks = n // k
    if blocks < 1:
        raise ParameterError(f"need n >= k, got n={n}, k={k}")
    if k == 1:
        a, b = dy[0], dy[1]
    else:
        a = dy[0, : blocks * k].reshape(blocks, k).sum(axis=1)
        b = dy[1, : blocks * k].reshape(blocks, k).sum(axis=1)
    return float(np.sum(a**r * b**s))


def s_krs(sample, k: int, r: int, s: int) -> float:
    """``sum_{i=1}^{[n/k]} (Y^1_{ik} - Y^1_{(i-1)k})^r (Y^2_{ik} - Y^2_{(i-1)k})^s``.

    A trailing partial block (odd ``n`` with ``k = 2``) is discarded.
    """
    if k not in (1, 2):
        raise ParameterError(f"k must be 1 or 2, got {k}")
    return _s(_bivariate(sample), k, r, s)


def t_stat(sample) -> float:
    """``S_{2,2,2} / S_{1,2,2}``."""
    dy = _bivariate(sample)
    s1 = _s(dy, 1, 2, 2)
    if not s1 > 0:
        raise DegenerateError("S_{1,2,2} is zero", {"s122": s1})
    return _s(dy, 2, 2, 2) / s1


def cojump_test(sample, level: float = 0.05, variant: str = "corrected", cfg: SimlConfig | None = None,
                window: WindowRule | None = None, trunc: TruncationRule | None = None,
                pairing: str = "limit", denominator: str = "squared", jump_filter: str = "joint",
                ingredients: dict | None = None, seed: int | None = None) -> TestReport:
    """Two-sided test of the null that the components share jumps.

    ``z = (T - 1) / sqrt(V)``; the null is rejected when ``|z|`` reaches
    the ``1 - level/2`` normal quantile. ``variant="jt"`` omits the noise
    terms from ``V``; ``jump_filter`` is passed to ``cojump_ingredients``.
    A zero variance estimate gives an infinite ``z``.
    Raises ``DegenerateError`` when no co-jump mass is detected.
    """
    if not 0 < level < 1:
        raise ParameterError("level must lie in (0, 1)")
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}")
    dy = _bivariate(sample)
    n = dy.shape[1]
    s1 = _s(dy, 1, 2, 2)
    s2 = _s(dy, 2, 2, 2)
    if not s1 > NO_MASS:
        raise DegenerateError("not applicable: no co-jump mass detected", {"s122": s1, "s222": s2})
    t = s2 / s1
    if ingredients is None:
        ingredients = cojump_ingredients(sample, cfg, window, trunc, jump_filter=jump_filter)
    report = cojump_avar(
        None, pairing=pairing, denominator=denominator, noise_terms=(variant == "corrected"),
        ingredients=ingredients,
    )
    if report.value > 0:
        z = (t - 1.0) / np.sqrt(report.value)
    elif t != 1.0:
        z = np.copysign(np.inf, t - 1.0)
        report.diagnostics.append("zero variance estimate: |z| taken as infinite")
    else:
        raise DegenerateError("variance estimate is zero and T = 1", {"t": t, **report.to_dict()})
    critical = float(norm.ppf(1.0 - level / 2.0))
    return TestReport(
        t_stat=t, s122=s1, s222=s2, variance=report, z=float(z), level=level, critical=critical,
        reject=bool(abs(z) >= critical), variant=variant, n=n, seed=seed,
    )
