"""Spot volatility and asymptotic-variance estimators under small noise.

Spot covariances come from truncated local windows with the noise level
``2 zeta`` removed; the jump functionals ``D``, ``J``, ``F`` and the
integrated powers ``A`` are built on top of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import increments
from .errors import DegenerateError, ParameterError, ShapeError
from .siml import SimlConfig, _fit
from .variation import TruncationRule

__all__ = [
    "WindowRule",
    "AvarReport",
    "spot_vol_path",
    "spot_vol",
    "a_hat",
    "d_hat",
    "d_hat_11",
    "j_hat",
    "f_hat",
    "rv_avar",
    "cojump_avar",
    "cojump_variance",
    "cojump_ingredients",
]


@dataclass(frozen=True)
class WindowRule:
    """Half-width ``k_n = ceil(c n^gamma)`` of the spot-volatility window."""

    c: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if not self.c > 0 or not 0 < self.gamma < 1:
            raise ParameterError("window rule needs c > 0 and gamma in (0, 1)")

    def k(self, n: int) -> int:
        return max(1, int(math.ceil(self.c * n**self.gamma)))


@dataclass
class AvarReport:
    which: str
    value: float
    ingredients: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "value": self.value,
            "ingredients": {k: _jsonable(v) for k, v in self.ingredients.items()},
            "diagnostics": list(self.diagnostics),
        }


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _zeta(zeta_hat, d):
    if zeta_hat is None:
        return np.zeros(d)
    zeta = np.broadcast_to(np.asarray(zeta_hat, dtype=float), (d,))
    if np.any(zeta < 0):
        raise ParameterError("noise estimates must be non-negative")
    return zeta


def _spot(dy, l, m, window, trunc, zeta):
    d, n = dy.shape
    k = window.k(n)
    norm = np.sqrt(np.sum(dy * dy, axis=0))
    g = np.where(norm <= trunc.threshold(n), dy[l] * dy[m], 0.0)
    csum = np.concatenate(([0.0], np.cumsum(g)))
    idx = np.arange(n)
    lo = np.maximum(idx - k, 0)
    hi = np.minimum(idx + k, n - 1)
    total = csum[hi + 1] - csum[lo] - g
    c = total * n / (hi - lo)
    if l == m:
        c = np.maximum(c - 2.0 * zeta[l], 0.0)
    return c


def spot_vol_path(sample, l: int = 0, m: int = 0, window: WindowRule | None = None,
                  trunc: TruncationRule | None = None, zeta_hat=None) -> np.ndarray:
    """Spot (co)variance ``c_i^{(l,m)}`` for every cell ``i = 1..n``.

    Window ``I_n(i) = {j != i : |i - j| <= k_n}`` clipped to the sample;
    the average is over the actual number of cells in the window. Cells
    whose joint increment norm exceeds the threshold are dropped, then
    ``2 sqrt(zeta_l zeta_m)`` is subtracted on the diagonal and diagonal
    values are floored at zero. Components are 0-based.
    """
    dy = increments(sample)
    _check_components(dy.shape[0], l, m)
    return _spot(dy, l, m, window or WindowRule(), trunc or TruncationRule(), _zeta(zeta_hat, dy.shape[0]))


def spot_vol(sample, i: int, l: int = 0, m: int = 0, window: WindowRule | None = None,
             trunc: TruncationRule | None = None, zeta_hat=None) -> float:
    """Spot (co)variance at cell ``i`` (1-based, ``1 <= i <= n``)."""
    n = increments(sample).shape[1]
    if not 1 <= i <= n:
        raise ParameterError(f"cell index {i} outside 1..{n}")
    return float(spot_vol_path(sample, l, m, window, trunc, zeta_hat)[i - 1])


def _check_components(d, *components):
    for c in components:
        if not 0 <= c < d:
            raise ShapeError(f"component {c} out of range for d={d}")


def _a(spot, r, k):
    n = spot.size
    return float(np.sum(spot[: n - k + 1] ** r) / n)


def a_hat(sample, l: int = 0, m: int = 0, r: int = 1, window: WindowRule | None = None,
          trunc: TruncationRule | None = None, zeta_hat=None) -> float:
    """``dt * sum_{i=1}^{n-k_n+1} (c_i^{(l,m)})^r``, an estimate of ``int (c^{(l,m)})^r``."""
    if int(r) != r or r < 1:
        raise ParameterError("power r must be a positive integer")
    window = window or WindowRule()
    spot = spot_vol_path(sample, l, m, window, trunc, zeta_hat)
    return _a(spot, int(r), window.k(spot.size))


def _d(dy, l, m, r, s, spot):
    return float(np.sum(dy[l] ** r * dy[m] ** s * spot))


def d_hat(sample, l: int, m: int, p: int, q: int, r: int, s: int, window: WindowRule | None = None,
          trunc: TruncationRule | None = None, zeta_hat=None) -> float:
    """``sum_i (dY_i^l)^r (dY_i^m)^s c_i^{(p,q)}`` for ``r, s >= 2``.

    Estimates ``D^{(l,m)}_{p,q}(r,s) = sum_u c_u^{(p,q)} (dX_u^l)^r (dX_u^m)^s``.
    """
    if r < 2 or s < 2:
        raise ParameterError("d_hat needs r, s >= 2; use d_hat_11 for (1, 1)")
    dy = increments(sample)
    _check_components(dy.shape[0], l, m, p, q)
    spot = _spot(dy, p, q, window or WindowRule(), trunc or TruncationRule(), _zeta(zeta_hat, dy.shape[0]))
    return _d(dy, l, m, r, s, spot)


def _d11(dy, l, m, threshold, spot):
    big = np.sqrt(np.sum(dy * dy, axis=0)) > threshold
    return float(np.sum(spot[big] * dy[l, big] * dy[m, big]))


def d_hat_11(sample, l: int = 0, m: int = 0, p: int = 0, q: int = 0, window: WindowRule | None = None,
             trunc: TruncationRule | None = None, zeta_hat=None) -> float:
    """``sum_i c_i^{(p,q)} dY_i^l dY_i^m 1{||dY_i|| > threshold}``."""
    trunc = trunc or TruncationRule()
    dy = increments(sample)
    _check_components(dy.shape[0], l, m, p, q)
    spot = _spot(dy, p, q, window or WindowRule(), trunc, _zeta(zeta_hat, dy.shape[0]))
    return _d11(dy, l, m, trunc.threshold(dy.shape[1]), spot)


def j_hat(sample, l: int, m: int, r: int, s: int) -> float:
    """``sum_i (dY_i^l)^r (dY_i^m)^s``."""
    if r < 2 or s < 2:
        raise ParameterError("j_hat needs r, s >= 2")
    dy = increments(sample)
    _check_components(dy.shape[0], l, m)
    return _d(dy, l, m, r, s, 1.0)


def _f(dy, l, m, r, s, spot):
    return (
        r * r * _d(dy, l, m, 2 * (r - 1), 2 * s, spot(l, l))
        + 2 * r * s * _d(dy, l, m, 2 * r - 1, 2 * s - 1, spot(l, m))
        + s * s * _d(dy, l, m, 2 * r, 2 * (s - 1), spot(m, m))
    )


def _spot_cache(dy, window, trunc, zeta):
    cache = {}

    def spot(p, q):
        key = (min(p, q), max(p, q))
        if key not in cache:
            cache[key] = _spot(dy, key[0], key[1], window, trunc, zeta)
        return cache[key]

    return spot


def f_hat(sample, l: int = 0, m: int = 1, r: int = 2, s: int = 2, window: WindowRule | None = None,
          trunc: TruncationRule | None = None, zeta_hat=None) -> float:
    """``r^2 D_{l,l}(2r-2, 2s) + 2rs D_{l,m}(2r-1, 2s-1) + s^2 D_{m,m}(2r, 2s-2)``."""
    if r < 2 or s < 2:
        raise ParameterError("f_hat needs r, s >= 2 so that every inner exponent is >= 2")
    dy = increments(sample)
    _check_components(dy.shape[0], l, m)
    spot = _spot_cache(dy, window or WindowRule(), trunc or TruncationRule(), _zeta(zeta_hat, dy.shape[0]))
    return _f(dy, l, m, r, s, spot)


def _floor(report):
    if report.value < 0:
        report.diagnostics.append(f"variance {report.value:.3e} floored at 0")
        report.value = 0.0
    return report


def rv_avar(sample, mode: str = "continuous", cfg: SimlConfig | None = None, window: WindowRule | None = None,
            trunc: TruncationRule | None = None, correct: bool = True) -> AvarReport:
    """Variance of realized variance under small noise, divided by ``n``.

    ``mode="continuous"``: ``(2 int c^2 + 8 zeta int c + 12 zeta^2) / n``.
    ``mode="jump"``: ``(2 int c^2 + 4 D(1,1) + 8 zeta [X,X]) / n``.
    ``correct=False`` sets the noise estimate to zero throughout, the
    classical no-noise standardization.
    """
    if mode not in ("continuous", "jump"):
        raise ParameterError(f"unknown mode {mode!r}")
    window = window or WindowRule()
    trunc = trunc or TruncationRule()
    dy = increments(sample)
    if dy.shape[0] != 1:
        raise ShapeError("rv_avar needs a univariate sample")
    n = dy.shape[1]
    fit = _fit(dy, cfg or SimlConfig())
    zeta = float(fit.zeta_hat[0]) if correct else 0.0
    spot = _spot(dy, 0, 0, window, trunc, np.array([zeta]))
    k = window.k(n)
    a2 = _a(spot, 2, k)
    ingredients = {"zeta_hat": zeta, "a2": a2, "qv": float(fit.qv[0, 0]), "n": n}
    if mode == "continuous":
        a1 = _a(spot, 1, k)
        ingredients["a1"] = a1
        value = (2 * a2 + 8 * zeta * a1 + 12 * zeta * zeta) / n
        which = "V_c"
    else:
        d11 = _d11(dy, 0, 0, trunc.threshold(n), spot)
        ingredients["d11"] = d11
        value = (2 * a2 + 4 * d11 + 8 * zeta * fit.qv[0, 0]) / n
        which = "V_j"
    return _floor(AvarReport(which, float(value), ingredients, list(fit.diagnostics)))


NO_MASS = 1e-12
PAIRINGS = ("limit", "swapped")
DENOMINATORS = ("squared", "linear")


def cojump_variance(f22, j22, j42, j24, zeta, n, pairing="limit", denominator="squared"):
    """Combine co-jump variance ingredients.

    ``limit`` pairs ``zeta_2`` with ``J(4,2)`` and ``zeta_1`` with
    ``J(2,4)``; ``swapped`` swaps them. ``squared`` divides by
    ``n J(2,2)^2``, ``linear`` by ``n J(2,2)``.
    """
    if pairing not in PAIRINGS:
        raise ParameterError(f"unknown pairing {pairing!r}")
    if denominator not in DENOMINATORS:
        raise ParameterError(f"unknown denominator {denominator!r}")
    z1, z2 = float(zeta[0]), float(zeta[1])
    if pairing == "limit":
        noise = 8.0 * (z2 * j42 + z1 * j24)
    else:
        noise = 8.0 * (z2 * j24 + z1 * j42)
    scale = j22 * j22 if denominator == "squared" else j22
    return (f22 + noise) / (n * scale)


JUMP_FILTERS = ("joint", "none")


def cojump_ingredients(sample, cfg: SimlConfig | None = None, window: WindowRule | None = None,
                       trunc: TruncationRule | None = None, zeta_hat=None, jump_filter: str = "joint") -> dict:
    """``F(2,2)``, ``J(2,2)``, ``J(4,2)``, ``J(2,4)`` and the noise estimates.

    With ``jump_filter="joint"`` the numerator functionals ``F``, ``J(4,2)``
    and ``J(2,4)`` only sum cells where both increments exceed the
    truncation threshold; ``"none"`` sums every cell. ``J(2,2)`` always
    sums every cell.
    """
    if jump_filter not in JUMP_FILTERS:
        raise ParameterError(f"unknown jump filter {jump_filter!r}")
    trunc = trunc or TruncationRule()
    dy = increments(sample)
    if dy.shape[0] != 2:
        raise ShapeError(f"co-jump variance needs d=2, got d={dy.shape[0]}")
    diagnostics = []
    if zeta_hat is None:
        fit = _fit(dy, cfg or SimlConfig())
        zeta = fit.zeta_hat
        diagnostics += fit.diagnostics
    else:
        zeta = _zeta(zeta_hat, 2)
    spot = _spot_cache(dy, window or WindowRule(), trunc, zeta)
    if jump_filter == "joint":
        both = np.all(np.abs(dy) > trunc.threshold(dy.shape[1]), axis=0)
        num = dy[:, both]
        filtered = lambda p, q: spot(p, q)[both]  # noqa: E731
    else:
        num, filtered = dy, spot
    return {
        "f22": _f(num, 0, 1, 2, 2, filtered),
        "j22": _d(dy, 0, 1, 2, 2, 1.0),
        "j42": _d(num, 0, 1, 4, 2, 1.0),
        "j24": _d(num, 0, 1, 2, 4, 1.0),
        "zeta_hat": np.asarray(zeta, dtype=float),
        "n": dy.shape[1],
        "diagnostics": diagnostics,
    }


def cojump_avar(sample, cfg: SimlConfig | None = None, window: WindowRule | None = None,
                trunc: TruncationRule | None = None, pairing: str = "limit",
                denominator: str = "squared", noise_terms: bool = True, zeta_hat=None,
                jump_filter: str = "joint", ingredients: dict | None = None) -> AvarReport:
    """Variance estimate for ``T - 1`` of the co-jump ratio statistic.

    ``noise_terms=False`` drops the ``8 zeta J`` terms (the no-noise test)
    while keeping the noise-corrected spot volatility inside ``F``.
    ``zeta_hat`` overrides the SIML noise estimate; ``ingredients`` reuses
    the output of ``cojump_ingredients``.
    """
    ing = dict(ingredients) if ingredients is not None else cojump_ingredients(
        sample, cfg, window, trunc, zeta_hat, jump_filter)
    diagnostics = list(ing.pop("diagnostics", []))
    if not ing["j22"] > NO_MASS:
        raise DegenerateError("no co-jump mass detected (J(2,2) ~ 0)", ing)
    zeta = ing["zeta_hat"] if noise_terms else np.zeros(2)
    value = cojump_variance(ing["f22"], ing["j22"], ing["j42"], ing["j24"], zeta, ing["n"], pairing, denominator)
    which = "V_j12" if noise_terms else "V_JT"
    return _floor(AvarReport(which, float(value), ing, diagnostics))
