"""Monte Carlo drivers for the RMSE, size/power, density and order studies.

Each replication is a pure function of ``(case, master seed, replication)``;
work is spread over a process pool with ordered collection, so results do
not depend on the number of workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .. import rng
from ..avar import JUMP_FILTERS, PAIRINGS, DENOMINATORS, cojump_ingredients, rv_avar
from ..cojump import VARIANTS, cojump_test
from ..errors import DegenerateError, ParameterError
from ..paths import Grid, JumpSpec, NoiseSpec, NoisySample, SVParams, add_noise, simulate_univariate
from ..siml import integrated_volatility
from ..variation import bipower_variation, power_variation, truncated_rv
from .cases import UNIVARIATE_SV, EstimatorConfig, case, case_key

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ResultTable",
    "run_rmse",
    "run_sizepower",
    "run_density",
    "run_order_study",
    "run_experiment",
    "histogram",
    "binomial_se",
    "log_slope",
]

SCHEMA_VERSION = 1
EXPERIMENTS = ("rmse", "sizepower", "density", "order-study")

DEFAULT_CASES = {
    "rmse": ["CJ1-i", "CJ1-ii", "CJ1-iii", "CJ2-i", "CJ2-ii", "CJ2-iii",
             "SJ1-i", "SJ1-ii", "SJ1-iii", "SJ2-i", "SJ2-ii", "SJ2-iii"],
    "sizepower": [f"{f}{s}-{r}" for f in "CD" for s in "12" for r in ("I", "II", "III", "IV")],
    "density": ["RV-cont", "RV-jump", "C1-IV"],
    "order-study": [],
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun one experiment bit-for-bit."""

    experiment: str
    cases: tuple = ()
    n: int | None = None
    reps: int = 1000
    seed: int = 20150601
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    level: float = 0.05
    pairing: str = "limit"
    denominator: str = "squared"
    jump_filter: str = "joint"
    variants: tuple = VARIANTS
    jobs: int = 1
    bins: int = 40
    bin_range: tuple = (-5.0, 5.0)
    order_q: tuple = (0.0, 0.5)
    order_log2n: tuple = (10, 11, 12, 13, 14, 15, 16)
    order_zeta: float = 1e-2
    order_paths: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.experiment!r}")
        if int(self.reps) < 1:
            raise ParameterError("reps must be >= 1")
        if int(self.jobs) < 1:
            raise ParameterError("jobs must be >= 1")
        if self.pairing not in PAIRINGS or self.denominator not in DENOMINATORS:
            raise ParameterError("unknown pairing or denominator")
        if self.jump_filter not in JUMP_FILTERS:
            raise ParameterError(f"unknown jump filter {self.jump_filter!r}")
        if any(v not in VARIANTS for v in self.variants):
            raise ParameterError(f"variants must be drawn from {VARIANTS}")
        if not self.cases:
            object.__setattr__(self, "cases", tuple(DEFAULT_CASES[self.experiment]))
        for label in self.cases:
            case(label)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "cases": list(self.cases),
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "estimator": self.estimator.to_dict(),
            "level": self.level,
            "pairing": self.pairing,
            "denominator": self.denominator,
            "jump_filter": self.jump_filter,
            "variants": list(self.variants),
            "bins": self.bins,
            "bin_range": list(self.bin_range),
            "order_q": list(self.order_q),
            "order_log2n": list(self.order_log2n),
            "order_zeta": self.order_zeta,
            "order_paths": self.order_paths,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ParameterError(f"config schema_version must be {SCHEMA_VERSION}, got {version!r}")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        data["estimator"] = EstimatorConfig.from_dict(data.get("estimator"))
        for key in ("cases", "variants", "bin_range", "order_q", "order_log2n"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass
class ResultTable:
    """Rows keyed by case label; ``wall_time`` is kept out of serialized output."""

    experiment: str
    columns: list
    rows: dict
    metadata: dict
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0


def binomial_se(p: float, reps: int) -> float:
    return math.sqrt(p * (1.0 - p) / reps)


def log_slope(n_values, gaps) -> float:
    """Least-squares slope of ``log gap`` on ``log n``; NaN if a gap is zero."""
    gaps = np.asarray(gaps, float)
    if np.any(gaps <= 0):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(n_values, float)), np.log(np.asarray(gaps, float)), 1)[0])


def histogram(values, bins: int = 40, bin_range=(-5.0, 5.0)) -> list:
    """``(left, right, count)`` triples; values outside the range are not counted."""
    counts, edges = np.histogram(np.asarray(values, float), bins=bins, range=bin_range)
    return [(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(bins)]


def _map(func, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


def _seed(cfg, label, rep):
    return rng.seed_sequence(cfg.seed, case_key(label), rep)


def _tasks(cfg, label, payload):
    sim = case(label, cfg.n)
    return [(sim, _seed(cfg, label, r), payload) for r in range(cfg.reps)]


def _metadata(cfg, extra=None):
    meta = {"config": cfg.to_dict()}
    meta.update(extra or {})
    return meta


# ---------------------------------------------------------------- RMSE


def _rmse_rep(task):
    sim, seed, est = task
    sample = sim.simulate(seed)
    truth = sample.latent.truth
    iv = truth.iv[0, 0]
    ivhat = integrated_volatility(sample, est.siml, est.trunc)[0, 0]
    trvc = truncated_rv(sample, est.trunc)[0]
    zeta = sample.noise.zeta[0]
    rv = power_variation(sample, 2)
    return ivhat - iv, trvc - iv, trvc - 2.0 * zeta - iv, rv - iv


def run_rmse(cfg: ExperimentConfig) -> ResultTable:
    """RMSE of the integrated-volatility estimator per case.

    ``ivhat`` is the SIML-minus-truncated-jump estimator. Two diagnostic
    columns are reported beside it: ``trvc`` (truncated RV below the
    threshold) and ``trvc_oracle`` (``trvc`` minus the true ``2 zeta``,
    infeasible), and plain ``rv``. All values are multiples of 1e-3.
    """
    start = time.perf_counter()
    rows = {}
    for label in cfg.cases:
        errors = np.array(_map(_rmse_rep, _tasks(cfg, label, cfg.estimator), cfg.jobs))
        rmse = np.sqrt(np.mean(errors**2, axis=0)) * 1e3
        bias = np.mean(errors, axis=0) * 1e3
        rows[label] = {
            "ivhat": float(rmse[0]),
            "ivhat_bias": float(bias[0]),
            "trvc": float(rmse[1]),
            "trvc_oracle": float(rmse[2]),
            "rv": float(rmse[3]),
        }
    columns = ["ivhat", "ivhat_bias", "trvc", "trvc_oracle", "rv"]
    return ResultTable("rmse", columns, rows, _metadata(cfg, {"units": "1e-3"}),
                       wall_time=time.perf_counter() - start)


# ------------------------------------------------------- size and power


def _test_rep(task):
    sim, seed, cfg = task
    sample = sim.simulate(seed)
    est = cfg.estimator
    out = {}
    try:
        ing = cojump_ingredients(sample, est.siml, est.window, est.trunc, jump_filter=cfg.jump_filter)
        for variant in cfg.variants:
            report = cojump_test(sample, cfg.level, variant, pairing=cfg.pairing,
                                 denominator=cfg.denominator, ingredients=ing)
            out[variant] = (report.z, report.reject)
    except DegenerateError:
        out = {variant: (math.nan, False) for variant in cfg.variants}
    return out


def run_sizepower(cfg: ExperimentConfig) -> ResultTable:
    """Rejection frequency of the co-jump test per case and variant.

    Under ``C`` cases (common jumps) this is the empirical size, under
    ``D`` cases the power. Replications where the test is not applicable
    count as non-rejections and are tallied in ``*_na``.
    """
    start = time.perf_counter()
    rows, zs = {}, {}
    for label in cfg.cases:
        results = _map(_test_rep, _tasks(cfg, label, replace(cfg, jobs=1)), cfg.jobs)
        row = {"kind": "size" if case(label).mode == "cojump" else "power"}
        for variant in cfg.variants:
            z = np.array([r[variant][0] for r in results])
            rate = float(np.mean([r[variant][1] for r in results]))
            row[variant] = rate
            row[f"{variant}_se"] = binomial_se(rate, cfg.reps)
            row[f"{variant}_na"] = int(np.sum(np.isnan(z)))
            zs[(label, variant)] = z
        rows[label] = row
    columns = ["kind"] + [f"{v}{s}" for v in cfg.variants for s in ("", "_se", "_na")]
    return ResultTable("sizepower", columns, rows, _metadata(cfg), extra={"z": zs},
                       wall_time=time.perf_counter() - start)


# ------------------------------------------------------------- density


def _rv_rep(task):
    sim, seed, est = task
    sample = sim.simulate(seed)
    truth = sample.latent.truth
    jumpy = sim.jumps.kind != "none"
    mode = "jump" if jumpy else "continuous"
    rv = power_variation(sample, 2)
    base = truth.iv[0, 0] + (truth.jump_qv[0, 0] if jumpy else 0.0)
    zeta = sample.noise.zeta[0]
    corrected = rv_avar(sample, mode, est.siml, est.window, est.trunc, correct=True).value
    plain = rv_avar(sample, mode, est.siml, est.window, est.trunc, correct=False).value
    return (rv - base - 2.0 * zeta) / math.sqrt(corrected), (rv - base) / math.sqrt(plain)


def _ks(values) -> float:
    values = np.asarray(values, float)
    values = values[np.isfinite(values)]
    return float(stats.kstest(values, "norm").statistic) if values.size else math.nan


def run_density(cfg: ExperimentConfig) -> ResultTable:
    """Standardized statistics, histograms and KS distances to N(0, 1).

    Realized-variance cases are centred at the simulator's true limit
    (integrated variance, plus jump variation, plus ``2 zeta`` when
    corrected) and scaled by the estimated variance. Uncorrected
    statistics set the noise level to zero in both. Co-jump cases report
    the test's ``z``.
    """
    start = time.perf_counter()
    rows, samples = {}, {}
    for label in cfg.cases:
        sim = case(label, cfg.n)
        if sim.d == 1:
            out = np.array(_map(_rv_rep, _tasks(cfg, label, cfg.estimator), cfg.jobs))
            series = {"corrected": out[:, 0], "uncorrected": out[:, 1]}
        else:
            tcfg = replace(cfg, jobs=1, variants=VARIANTS)
            results = _map(_test_rep, _tasks(cfg, label, tcfg), cfg.jobs)
            series = {v: np.array([r[v][0] for r in results]) for v in ("corrected", "jt")}
        row = {}
        for name, values in series.items():
            row[f"ks_{name}"] = _ks(values)
            samples[(label, name)] = values
        rows[label] = row
    columns = sorted({c for row in rows.values() for c in row})
    hist = {key: histogram(v, cfg.bins, cfg.bin_range) for key, v in samples.items()}
    return ResultTable("density", columns, rows, _metadata(cfg, {"centering": "true limit, estimated variance"}),
                       extra={"samples": samples, "histograms": hist}, wall_time=time.perf_counter() - start)


# --------------------------------------------------------- order study


def _subsample(path_x, n_fine, n):
    step = n_fine // n
    return path_x[:, ::step]


def _order_rep(task):
    x, q, zeta, seed = task
    n = x.shape[1] - 1
    eps = NoiseSpec((zeta,), q).eps(n, 1)[0]
    v = rng.generator(seed, rng.NOISE).standard_normal(n + 1)
    y = x[0] + eps * v
    rv_gap = power_variation(y, 2) - power_variation(x, 2)
    bpv_gap = bipower_variation(y) - bipower_variation(x)
    return rv_gap, bpv_gap


def run_order_study(cfg: ExperimentConfig) -> ResultTable:
    """Rate at which the noise-induced gap in RV and BPV shrinks with ``n``.

    A continuous latent path is simulated once on the finest grid and
    subsampled to every coarser grid; ``reps`` noise draws per grid give
    the mean absolute gap, and the slope of ``log gap`` on ``log n`` is
    reported next to the reference ``-q``.
    """
    start = time.perf_counter()
    log2n = sorted(int(k) for k in cfg.order_log2n)
    n_values = [2**k for k in log2n]
    n_fine = n_values[-1]
    rows, gaps_out = {}, {}
    for q in cfg.order_q:
        rv_gaps = np.zeros(len(n_values))
        bpv_gaps = np.zeros(len(n_values))
        for p in range(cfg.order_paths):
            path_seed = rng.seed_sequence(cfg.seed, case_key("order-path"), p)
            latent = simulate_univariate(UNIVARIATE_SV, JumpSpec("none"), Grid(n_fine), path_seed)
            for k, n in enumerate(n_values):
                x = _subsample(latent.x, n_fine, n)
                tasks = [(x, q, cfg.order_zeta, rng.seed_sequence(cfg.seed, case_key(f"order-{q}-{n}"), p, r))
                         for r in range(cfg.reps)]
                gaps = np.abs(np.array(_map(_order_rep, tasks, cfg.jobs)))
                rv_gaps[k] += gaps[:, 0].mean() / cfg.order_paths
                bpv_gaps[k] += gaps[:, 1].mean() / cfg.order_paths
        label = f"q={q:g}"
        rows[label] = {
            "q": float(q),
            "rv_slope": log_slope(n_values, rv_gaps),
            "bpv_slope": log_slope(n_values, bpv_gaps),
            "reference": -float(q),
        }
        gaps_out[label] = {"n": n_values, "rv_gap": rv_gaps.tolist(), "bpv_gap": bpv_gaps.tolist()}
    return ResultTable("order-study", ["q", "rv_slope", "bpv_slope", "reference"], rows,
                       _metadata(cfg), extra={"gaps": gaps_out}, wall_time=time.perf_counter() - start)


RUNNERS = {"rmse": run_rmse, "sizepower": run_sizepower, "density": run_density, "order-study": run_order_study}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    return RUNNERS[cfg.experiment](cfg)
