"""Simulation of Ito semimartingales observed with small additive noise.

The latent log-price follows

    dX_t = sigma_t dW_t + dJ_t,
    d sigma_t^2 = alpha (beta - sigma_t^2) dt + sigma_t^2 dW^sigma_t,

on a regular grid of ``n`` steps over [0, 1], with ``J`` a compound Poisson
or symmetric stable process. Observations are ``Y = X + eps_n v`` with i.i.d.
standard normal ``v`` and ``n eps_n^2 = zeta n^(-2q)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numba
import numpy as np

from . import rng as _rng
from .errors import ParameterError

VARIANCE_FLOOR = 1e-10

__all__ = [
    "Grid",
    "SVParams",
    "JumpSpec",
    "CojumpSpec",
    "NoiseSpec",
    "Truth",
    "LatentPath",
    "NoisySample",
    "SimConfig",
    "simulate_variance_path",
    "stable_variates",
    "simulate_univariate",
    "simulate_brownian",
    "simulate_bivariate_cojump",
    "add_noise",
    "write_csv",
    "write_truth",
    "read_csv",
]


@dataclass(frozen=True)
class Grid:
    """Regular grid ``t_i = i/n`` on [0, 1]."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"grid needs an integer n >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta(self) -> float:
        return 1.0 / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


@dataclass(frozen=True)
class SVParams:
    """Mean-reverting variance with leverage; ``v0`` defaults to ``beta``."""

    alpha: float = 5.0
    beta: float = 0.2
    rho: float = -0.5
    v0: float | None = None

    def __post_init__(self):
        if not self.alpha > 0 or not self.beta > 0:
            raise ParameterError("alpha and beta must be strictly positive")
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterError("rho must lie in [-1, 1]")
        if self.v0 is not None and not self.v0 > 0:
            raise ParameterError("v0 must be positive")

    @property
    def initial(self) -> float:
        return self.beta if self.v0 is None else self.v0


JUMP_KINDS = ("none", "compound_poisson", "stable")


@dataclass(frozen=True)
class JumpSpec:
    """Univariate jump component.

    ``compound_poisson`` draws ``Poisson(intensity)`` jumps with sizes uniform
    on ``[-high, -low] U [low, high]``; ``stable`` adds symmetric stable
    increments with index ``index`` and unit-time scale ``scale``.
    """

    kind: str = "none"
    intensity: float = 0.0
    low: float = 0.05
    high: float = 0.3
    index: float = 1.5
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise ParameterError(f"unknown jump kind {self.kind!r}")
        if self.intensity < 0:
            raise ParameterError("jump intensity must be non-negative")
        if self.kind == "compound_poisson" and not 0 < self.low < self.high:
            raise ParameterError("uniform jump bounds need 0 < low < high")
        if self.kind == "stable":
            if not 0 < self.index < 2:
                raise ParameterError("stable index must lie in (0, 2)")
            if not self.scale > 0:
                raise ParameterError("stable scale must be positive")


@dataclass(frozen=True)
class CojumpSpec:
    """Bivariate jumps: idiosyncratic ``N1``, ``N2`` and common ``N3``.

    ``size_sd`` holds the standard deviations of the Gaussian sizes
    ``Z1`` (N1 -> X1), ``Z2`` (N2 -> X2), ``Z3`` (N3 -> X1), ``Z4`` (N3 -> X2).
    """

    intensities: tuple[float, float, float] = (5.0, 5.0, 10.0)
    size_sd: tuple[float, float, float, float] = (0.2, 0.2, 0.1, 0.1)

    def __post_init__(self):
        if len(self.intensities) != 3 or len(self.size_sd) != 4:
            raise ParameterError("need three intensities and four size deviations")
        if any(lam < 0 for lam in self.intensities):
            raise ParameterError("jump intensities must be non-negative")
        if any(sd < 0 for sd in self.size_sd):
            raise ParameterError("jump size deviations must be non-negative")
        object.__setattr__(self, "intensities", tuple(float(v) for v in self.intensities))
        object.__setattr__(self, "size_sd", tuple(float(v) for v in self.size_sd))


@dataclass(frozen=True)
class NoiseSpec:
    """Small noise ``eps_{m,n} = sqrt(zeta_m) n^(-(1+2q)/2)``."""

    zeta: tuple[float, ...] = (0.0,)
    q: float = 0.0

    def __post_init__(self):
        zeta = tuple(float(z) for z in np.atleast_1d(self.zeta))
        if any(z < 0 for z in zeta):
            raise ParameterError("noise zeta must be non-negative")
        if self.q < 0:
            raise ParameterError("noise rate q must be non-negative")
        object.__setattr__(self, "zeta", zeta)

    def eps(self, n: int, d: int | None = None) -> np.ndarray:
        zeta = np.asarray(self.zeta)
        if d is not None and zeta.size != d:
            if zeta.size != 1:
                raise ParameterError(f"noise has {zeta.size} components, path has {d}")
            zeta = np.repeat(zeta, d)
        return np.sqrt(zeta) * float(n) ** (-(1.0 + 2.0 * self.q) / 2.0)


@dataclass
class Truth:
    """Ground-truth functionals recorded by the simulator.

    Matrices are ``d x d``; the co-jump entries are only set for ``d == 2``.
    """

    iv: np.ndarray
    iq: np.ndarray
    jump_qv: np.ndarray
    n_jumps: int
    s0: float | None = None
    j42: float | None = None
    j24: float | None = None
    f22: float | None = None
    n_cojumps: int | None = None

    def to_dict(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            out[key] = value.tolist() if isinstance(value, np.ndarray) else value
        return out


@dataclass
class LatentPath:
    """Latent path on a grid plus its jump events and ground truth.

    ``x`` has shape ``(d, n+1)``. ``spot`` holds the spot covariance at the
    left end of every cell, shape ``(d, d, n)``. Jump event ``e`` lands in
    cell ``jump_cells[e]`` (increment ``x[:, c+1] - x[:, c]``) with size
    vector ``jump_sizes[e]``.
    """

    grid: Grid
    x: np.ndarray
    spot: np.ndarray
    jump_cells: np.ndarray
    jump_sizes: np.ndarray
    truth: Truth

    @property
    def d(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass
class NoisySample:
    """Observed ``y = x + eps v`` on the grid, shape ``(d, n+1)``."""

    y: np.ndarray
    noise: NoiseSpec
    seed: int | None = None
    latent: LatentPath | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.y.shape[0]

    @property
    def n(self) -> int:
        return self.y.shape[1] - 1

    @property
    def grid(self) -> Grid:
        return Grid(self.n)

    def strip(self) -> "NoisySample":
        """Copy without the latent path, for blind estimation runs."""
        return replace(self, latent=None)


@numba.njit(cache=True)
def _euler_variance(v0, alpha, beta, dt, dw_sigma, floor):
    n = dw_sigma.shape[0]
    v = np.empty(n + 1)
    v[0] = v0
    for i in range(n):
        nxt = v[i] + alpha * (beta - v[i]) * dt + v[i] * dw_sigma[i]
        v[i + 1] = nxt if nxt > floor else floor
    return v


def simulate_variance_path(params: SVParams, grid: Grid, driver, partner) -> np.ndarray:
    """Euler path of the variance process, ``n + 1`` values.

    ``driver`` and ``partner`` are ``n`` standard normal draws: ``driver``
    also drives the price, and the variance shock is
    ``sqrt(dt) (rho driver + sqrt(1 - rho^2) partner)``. Proposals below
    ``VARIANCE_FLOOR`` are clipped to it.
    """
    driver = np.asarray(driver, dtype=float)
    partner = np.asarray(partner, dtype=float)
    if driver.shape != (grid.n,) or partner.shape != (grid.n,):
        raise ParameterError("driver and partner need exactly n draws")
    rho = params.rho
    dw_sigma = math.sqrt(grid.delta) * (rho * driver + math.sqrt(1.0 - rho * rho) * partner)
    return _euler_variance(params.initial, params.alpha, params.beta, grid.delta, dw_sigma, VARIANCE_FLOOR)


def stable_variates(generator: np.random.Generator, index: float, size, scale: float = 1.0) -> np.ndarray:
    """Symmetric stable draws by the Chambers-Mallows-Stuck method.

    Characteristic function ``exp(-|scale t|^index)``.
    """
    if not 0 < index <= 2:
        raise ParameterError("stable index must lie in (0, 2]")
    u = generator.uniform(-math.pi / 2, math.pi / 2, size)
    w = generator.standard_exponential(size)
    if index == 1.0:
        return scale * np.tan(u)
    out = (np.sin(index * u) / np.cos(u) ** (1.0 / index)) * (
        np.cos((1.0 - index) * u) / w
    ) ** ((1.0 - index) / index)
    return scale * out


def _poisson_events(generator, intensity, n):
    count = generator.poisson(intensity)
    cells = np.minimum((generator.uniform(0.0, 1.0, count) * n).astype(np.int64), n - 1)
    return cells


def _truth(grid, spot, jump_cells, jump_sizes, cojump_mask=None):
    delta = grid.delta
    iv = spot.sum(axis=2) * delta
    iq = (spot**2).sum(axis=2) * delta
    jump_qv = jump_sizes.T @ jump_sizes
    truth = Truth(iv=iv, iq=iq, jump_qv=jump_qv, n_jumps=int(len(jump_cells)))
    if spot.shape[0] == 2:
        mask = cojump_mask if cojump_mask is not None else np.all(jump_sizes != 0, axis=1)
        a, b = jump_sizes[mask, 0], jump_sizes[mask, 1]
        c = spot[:, :, jump_cells[mask]]
        truth.s0 = float(np.sum(a**2 * b**2))
        truth.j42 = float(np.sum(a**4 * b**2))
        truth.j24 = float(np.sum(a**2 * b**4))
        truth.f22 = float(
            np.sum(4 * c[0, 0] * a**2 * b**4 + 8 * c[0, 1] * a**3 * b**3 + 4 * c[1, 1] * a**4 * b**2)
        )
        truth.n_cojumps = int(mask.sum())
    return truth


def simulate_univariate(sv: SVParams, jumps: JumpSpec, grid: Grid, seed) -> LatentPath:
    """Simulate ``dX = sigma dW + dJ`` with ``X_0 = 0``.

    Compound Poisson jumps are placed in the cell containing their arrival
    time; stable increments with per-step scale ``scale * dt^(1/index)`` are
    recorded as one jump event per cell.
    """
    n = grid.n
    z = _rng.generator(seed, _rng.DIFFUSION).standard_normal(n)
    z_perp = _rng.generator(seed, _rng.VOLATILITY).standard_normal(n)
    v = simulate_variance_path(sv, grid, z, z_perp)
    dx = np.sqrt(v[:-1] * grid.delta) * z

    jump_gen = _rng.generator(seed, _rng.JUMPS)
    if jumps.kind == "compound_poisson":
        cells = np.sort(_poisson_events(jump_gen, jumps.intensity, n))
        magnitude = jump_gen.uniform(jumps.low, jumps.high, cells.size)
        sign = np.where(jump_gen.uniform(size=cells.size) < 0.5, -1.0, 1.0)
        sizes = (sign * magnitude)[:, None]
    elif jumps.kind == "stable":
        cells = np.arange(n)
        step_scale = jumps.scale * grid.delta ** (1.0 / jumps.index)
        sizes = stable_variates(jump_gen, jumps.index, n, step_scale)[:, None]
    else:
        cells = np.zeros(0, dtype=np.int64)
        sizes = np.zeros((0, 1))
    np.add.at(dx, cells, sizes[:, 0])

    x = np.concatenate(([0.0], np.cumsum(dx)))[None, :]
    spot = v[None, None, :-1]
    return LatentPath(grid, x, spot, cells, sizes, _truth(grid, spot, cells, sizes))


def simulate_brownian(sigma, grid: Grid, seed, jumps=()) -> LatentPath:
    """Constant-volatility Brownian path with optional fixed jumps.

    ``sigma`` is a scalar or one value per component (independent drivers).
    ``jumps`` is a sequence of ``(cell, size)`` pairs, ``size`` a scalar or a
    vector with one entry per component; a jump in ``cell`` lands in the
    increment ``x[:, cell+1] - x[:, cell]``.
    """
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma < 0):
        raise ParameterError("sigma must be non-negative")
    d, n = sigma.size, grid.n
    dx = np.empty((d, n))
    for j in range(d):
        z = _rng.generator(seed, j * _rng.COMPONENT_STRIDE + _rng.DIFFUSION).standard_normal(n)
        dx[j] = sigma[j] * math.sqrt(grid.delta) * z
    cells = np.array([int(c) for c, _ in jumps], dtype=np.int64)
    sizes = np.array([np.broadcast_to(np.asarray(v, float), (d,)) for _, v in jumps]).reshape(-1, d)
    if cells.size and (cells.min() < 0 or cells.max() >= n):
        raise ParameterError("jump cell outside the grid")
    for e in range(cells.size):
        dx[:, cells[e]] += sizes[e]
    x = np.concatenate((np.zeros((d, 1)), np.cumsum(dx, axis=1)), axis=1)
    spot = np.zeros((d, d, n))
    for j in range(d):
        spot[j, j] = sigma[j] ** 2
    return LatentPath(grid, x, spot, cells, sizes, _truth(grid, spot, cells, sizes))


def _shift_free(cells, taken, n):
    out = cells.copy()
    used = set(int(c) for c in taken)
    for e, cell in enumerate(out):
        cell = int(cell)
        step = 1
        while cell in used:
            cell = int(out[e]) + step if int(out[e]) + step < n else int(out[e]) - step
            step += 1
        used.add(cell)
        out[e] = cell
    return out


def simulate_bivariate_cojump(sv, jumps: CojumpSpec, grid: Grid, seed, mode: str = "cojump") -> LatentPath:
    """Two-dimensional path with idiosyncratic and common jumps.

    ``sv`` is a pair of ``SVParams``; the Brownian drivers of the two
    components are independent, so the spot covariance is diagonal.
    ``mode="cojump"`` keeps the common jumps; ``mode="disjoint"`` drops them
    and moves any second-component jump sharing a cell with a first-component
    jump to the nearest free cell.
    """
    if mode not in ("cojump", "disjoint"):
        raise ParameterError(f"unknown mode {mode!r}")
    sv = tuple(sv)
    if len(sv) != 2:
        raise ParameterError("bivariate simulation needs two SVParams")
    n = grid.n
    dx = np.empty((2, n))
    spot = np.zeros((2, 2, n))
    for j in range(2):
        off = j * _rng.COMPONENT_STRIDE
        z = _rng.generator(seed, off + _rng.DIFFUSION).standard_normal(n)
        z_perp = _rng.generator(seed, off + _rng.VOLATILITY).standard_normal(n)
        v = simulate_variance_path(sv[j], grid, z, z_perp)
        dx[j] = np.sqrt(v[:-1] * grid.delta) * z
        spot[j, j] = v[:-1]

    lam1, lam2, lam3 = jumps.intensities
    sd1, sd2, sd3, sd4 = jumps.size_sd
    gen = _rng.generator(seed, _rng.JUMPS)
    c1 = _poisson_events(gen, lam1, n)
    c2 = _poisson_events(gen, lam2, n)
    c3 = _poisson_events(gen, lam3, n)
    z1 = gen.normal(0.0, sd1, c1.size)
    z2 = gen.normal(0.0, sd2, c2.size)
    z3 = gen.normal(0.0, sd3, c3.size)
    z4 = gen.normal(0.0, sd4, c3.size)
    if mode == "disjoint":
        c3, z3, z4 = c3[:0], z3[:0], z4[:0]
        c2 = _shift_free(c2, c1, n)

    cells = np.concatenate((c1, c2, c3))
    sizes = np.zeros((cells.size, 2))
    sizes[: c1.size, 0] = z1
    sizes[c1.size : c1.size + c2.size, 1] = z2
    sizes[c1.size + c2.size :, 0] = z3
    sizes[c1.size + c2.size :, 1] = z4
    common = np.zeros(cells.size, dtype=bool)
    common[c1.size + c2.size :] = True
    order = np.argsort(cells, kind="stable")
    cells, sizes, common = cells[order], sizes[order], common[order]
    np.add.at(dx[0], cells, sizes[:, 0])
    np.add.at(dx[1], cells, sizes[:, 1])

    x = np.concatenate((np.zeros((2, 1)), np.cumsum(dx, axis=1)), axis=1)
    truth = _truth(grid, spot, cells, sizes, cojump_mask=common)
    return LatentPath(grid, x, spot, cells, sizes, truth)


def add_noise(path: LatentPath, noise: NoiseSpec, seed) -> NoisySample:
    """Observe every grid point, ``t_0`` included, with small noise."""
    eps = noise.eps(path.n, path.d)
    v = _rng.generator(seed, _rng.NOISE).standard_normal(path.x.shape)
    y = path.x.copy()
    for m in range(path.d):
        if eps[m] != 0.0:
            y[m] = path.x[m] + eps[m] * v[m]
    return NoisySample(y=y, noise=noise, seed=seed if isinstance(seed, int) else None, latent=path)


@dataclass(frozen=True)
class SimConfig:
    """Complete data-generating process for one experiment cell.

    ``jumps`` is a ``JumpSpec`` for univariate paths and a ``CojumpSpec``
    for bivariate ones (``sv`` then holds two entries).
    """

    sv: tuple[SVParams, ...]
    jumps: JumpSpec | CojumpSpec
    noise: NoiseSpec
    n: int
    mode: str = "cojump"

    @property
    def d(self) -> int:
        return len(self.sv)

    def simulate(self, seed) -> NoisySample:
        grid = Grid(self.n)
        if self.d == 1:
            path = simulate_univariate(self.sv[0], self.jumps, grid, seed)
        else:
            path = simulate_bivariate_cojump(self.sv, self.jumps, grid, seed, self.mode)
        return add_noise(path, self.noise, seed)


def write_csv(sample: NoisySample, path) -> None:
    """Dump ``t, x1[, x2], y1[, y2]`` with 17 significant digits."""
    latent = sample.latent
    d = sample.d
    header = ["t"]
    columns = [Grid(sample.n).times]
    if latent is not None:
        header += [f"x{m + 1}" for m in range(d)]
        columns += list(latent.x)
    header += [f"y{m + 1}" for m in range(d)]
    columns += list(sample.y)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format(v, ".17g") for v in row])


def write_truth(sample: NoisySample, path) -> None:
    """JSON sidecar with the latent path's ground-truth functionals."""
    if sample.latent is None:
        raise ParameterError("sample carries no latent path")
    payload = {
        "n": sample.n,
        "d": sample.d,
        "noise": {"zeta": list(sample.noise.zeta), "q": sample.noise.q},
        "truth": sample.latent.truth.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def read_csv(path) -> NoisySample:
    """Load observations written by ``write_csv`` (or any ``t, y1[, y2]`` table).

    Only the ``y`` columns are used; the noise spec is unknown and set to zero.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    cols = [k for k, name in enumerate(header) if name.startswith("y")]
    if not cols:
        raise ParameterError(f"{path}: no y columns in header {header}")
    y = rows[:, cols].T.copy()
    return NoisySample(y=y, noise=NoiseSpec(tuple(0.0 for _ in cols)))
