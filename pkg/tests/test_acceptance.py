"""Acceptance criteria, each run at its stated scale and tolerance.

Every test prints one ``[ACCEPTANCE k] PASS|FAIL`` line with the measured
values. ``SMALLNOISE_JOBS`` sets the worker count (default: all CPUs).
"""

import os

import numpy as np
import pytest

from smallnoise import rng as streams
from smallnoise.cojump import s_krs, t_stat
from smallnoise.harness.experiments import (
    ExperimentConfig,
    run_density,
    run_experiment,
    run_order_study,
    run_rmse,
    run_sizepower,
)
from smallnoise.harness.io import save_results
from smallnoise.siml import cosine_basis, difference_matrix, noise_variance, siml, siml_eigenvalues
from smallnoise.variation import abs_moment, bipower_variation, power_variation, truncated_rv

from conftest import brownian_sample

JOBS = int(os.environ.get("SMALLNOISE_JOBS", os.cpu_count() or 1))
REPS = 1000
SEED = 20150601

RMSE_TARGETS = {
    "CJ1-i": 2.137, "CJ1-ii": 2.192, "CJ1-iii": 2.349,
    "CJ2-i": 1.701, "CJ2-ii": 1.735, "CJ2-iii": 1.878,
    "SJ1-i": 11.45, "SJ1-ii": 11.47, "SJ1-iii": 11.40,
    "SJ2-i": 9.501, "SJ2-ii": 9.496, "SJ2-iii": 9.470,
}
SIZE = {
    "C1-I": 0.068, "C1-II": 0.064, "C1-III": 0.065, "C1-IV": 0.071,
    "C2-I": 0.058, "C2-II": 0.053, "C2-III": 0.052, "C2-IV": 0.046,
}
JT_SIZE = {"C1-IV": 0.253, "C2-IV": 0.237}
POWER = {
    "D1-I": 0.989, "D1-II": 0.992, "D1-III": 0.990, "D1-IV": 0.982,
    "D2-I": 0.995, "D2-II": 0.996, "D2-III": 0.995, "D2-IV": 0.988,
}


def report(capsys, number, ok, lines):
    with capsys.disabled():
        print(f"\n[ACCEPTANCE {number}] {'PASS' if ok else 'FAIL'}")
        for line in lines:
            print(f"    {line}")
    return ok


@pytest.fixture(scope="module")
def table2():
    cases = tuple(SIZE) + tuple(POWER)
    return run_sizepower(ExperimentConfig("sizepower", cases=cases, reps=REPS, seed=SEED, jobs=JOBS))


def test_criterion_1_rmse(capsys):
    table = run_rmse(ExperimentConfig("rmse", cases=tuple(RMSE_TARGETS), reps=REPS, seed=SEED, jobs=JOBS))
    ok, lines = True, []
    for label, target in RMSE_TARGETS.items():
        row = table.rows[label]
        tol = 0.25 if label.startswith("SJ") else 0.20
        hit = abs(row["ivhat"] - target) <= tol * target
        ok &= hit
        lines.append(f"{label}: ivhat RMSE {row['ivhat']:.3f}e-3 vs {target}e-3 (+-{tol:.0%}) "
                     f"{'ok' if hit else 'miss'}; trvc {row['trvc']:.3f}, trvc-2zeta oracle {row['trvc_oracle']:.3f}")
    assert report(capsys, 1, ok, lines)


def test_criterion_2_corrected_size(capsys, table2):
    ok, lines = True, []
    for label, target in SIZE.items():
        value = table2.rows[label]["corrected"]
        hit = abs(value - target) <= 0.02 + 1e-12
        ok &= hit
        lines.append(f"{label}: size {value:.3f} vs {target:.3f} +- 0.02 {'ok' if hit else 'miss'}")
    assert report(capsys, 2, ok, lines)


def test_criterion_3_jt_noise_sensitivity(capsys, table2):
    ok, lines = True, []
    for label, reference in JT_SIZE.items():
        jt = table2.rows[label]["jt"]
        corrected = table2.rows[label]["corrected"]
        hit = jt >= 0.18 and corrected <= 0.09
        ok &= hit
        lines.append(f"{label}: JT size {jt:.3f} (>= 0.18, reference {reference}), "
                     f"corrected {corrected:.3f} (<= 0.09) {'ok' if hit else 'miss'}")
    assert report(capsys, 3, ok, lines)


def test_criterion_4_power(capsys, table2):
    ok, lines = True, []
    for label, reference in POWER.items():
        value = table2.rows[label]["corrected"]
        hit = value >= 0.95
        ok &= hit
        lines.append(f"{label}: power {value:.3f} (>= 0.95, reference {reference}) {'ok' if hit else 'miss'}")
    assert report(capsys, 4, ok, lines)


def test_criterion_5_densities(capsys):
    table = run_density(ExperimentConfig("density", cases=("RV-cont", "RV-jump", "C1-IV"),
                                         reps=REPS, seed=SEED, jobs=JOBS))
    cont, jump, cj = table.rows["RV-cont"], table.rows["RV-jump"], table.rows["C1-IV"]
    checks = [
        ("continuous corrected KS < 0.05", cont["ks_corrected"], cont["ks_corrected"] < 0.05),
        ("jump corrected KS < 0.06", jump["ks_corrected"], jump["ks_corrected"] < 0.06),
        ("C1-IV co-jump z KS < 0.06", cj["ks_corrected"], cj["ks_corrected"] < 0.06),
        (f"continuous corrected KS {cont['ks_corrected']:.4f} < uncorrected KS", cont["ks_uncorrected"],
         cont["ks_corrected"] < cont["ks_uncorrected"]),
    ]
    lines = [f"{name}: {value:.4f} {'ok' if hit else 'miss'}" for name, value, hit in checks]
    assert report(capsys, 5, all(hit for _, _, hit in checks), lines)


def test_criterion_6_exact_identities(capsys):
    gen = np.random.default_rng(6)
    worst_partition = 0.0
    for _ in range(1000):
        n = int(gen.integers(2, 2000))
        y = np.concatenate(([0.0], np.cumsum(gen.standard_normal(n) * 10.0 ** gen.uniform(-6, 1))))
        trvc, trvj = truncated_rv(y)
        rv = power_variation(y, 2)
        worst_partition = max(worst_partition, abs(trvc + trvj - rv) / rv)
    worst_spectral = 0.0
    for n in range(2, 9):
        c_inv = difference_matrix(n)
        p = cosine_basis(n)
        diff = c_inv @ c_inv.T - p @ np.diag(siml_eigenvalues(n)) @ p.T
        worst_spectral = max(worst_spectral, float(np.max(np.abs(diff))))
    t_const = t_stat(np.vstack([np.arange(1001) * 0.01] * 2))
    worst_skrs = 0.0
    for _ in range(100):
        n = int(gen.integers(2, 80))
        y = np.cumsum(gen.standard_normal((2, n + 1)), axis=1)
        for k in (1, 2):
            brute = sum((y[0, i * k] - y[0, (i - 1) * k]) ** 2 * (y[1, i * k] - y[1, (i - 1) * k]) ** 2
                        for i in range(1, n // k + 1))
            worst_skrs = max(worst_skrs, abs(s_krs(y, k, 2, 2) - brute) / brute)
    checks = [
        ("TRVC + TRVJ = RV (rel)", worst_partition, worst_partition <= 1e-12),
        ("spectral identity n=2..8 (max abs)", worst_spectral, worst_spectral <= 1e-10),
        ("T on constant increments - 8", abs(t_const - 8.0), abs(t_const - 8.0) <= 1e-12),
        ("s_krs vs brute force (rel)", worst_skrs, worst_skrs <= 1e-12),
    ]
    lines = [f"{name}: {value:.2e} {'ok' if hit else 'miss'}" for name, value, hit in checks]
    assert report(capsys, 6, all(hit for _, _, hit in checks), lines)


def test_criterion_7_consistency(capsys):
    zetas = [siml(brownian_sample(0.2, 30000, seed=streams.seed_sequence(SEED, 7, r), zeta=1e-2)).zeta_raw[0]
             for r in range(200)]
    floored = [noise_variance(brownian_sample(0.2, 30000, seed=streams.seed_sequence(SEED, 7, r), zeta=1e-2))[0]
               for r in range(200)]
    bpv = [bipower_variation(brownian_sample(0.2, 20000, seed=streams.seed_sequence(SEED, 8, r)), scaled=True)
           for r in range(200)]
    zeta_err = abs(np.mean(zetas) / 1e-2 - 1)
    bpv_err = abs(np.mean(bpv) / 0.04 - 1)
    m2_err = abs(abs_moment(2) - 1.0)
    checks = [
        (f"mean zeta_hat {np.mean(zetas):.5f} (floored {np.mean(floored):.5f}) vs 0.01, rel err", zeta_err,
         zeta_err <= 0.15),
        (f"mean scaled BPV {np.mean(bpv):.5f} vs 0.04, rel err", bpv_err, bpv_err <= 0.05),
        ("|m_2 - 1|", m2_err, m2_err <= 1e-12),
    ]
    lines = [f"{name}: {value:.3e} {'ok' if hit else 'miss'}" for name, value, hit in checks]
    assert report(capsys, 7, all(hit for _, _, hit in checks), lines)


def test_criterion_8_order_study(capsys):
    table = run_order_study(ExperimentConfig("order-study", reps=100, seed=SEED, order_q=(0.0, 0.5), jobs=JOBS))
    ok, lines = True, []
    for label, row in table.rows.items():
        hit = abs(row["rv_slope"] - row["reference"]) <= 0.15
        ok &= hit
        lines.append(f"{label}: RV gap slope {row['rv_slope']:.3f} vs {row['reference']:.2f} +- 0.15 "
                     f"{'ok' if hit else 'miss'} (BPV slope {row['bpv_slope']:.3f})")
    assert report(capsys, 8, ok, lines)


def test_criterion_9_determinism(capsys, tmp_path):
    configs = [
        ExperimentConfig("rmse", cases=("CJ1-iii", "SJ1-ii"), reps=20, seed=9, jobs=JOBS),
        ExperimentConfig("sizepower", cases=("C1-III", "D2-I"), reps=20, seed=9, jobs=JOBS),
        ExperimentConfig("density", cases=("RV-cont", "C1-IV"), reps=20, seed=9, jobs=JOBS),
        ExperimentConfig("order-study", reps=10, seed=9, order_log2n=(10, 11, 12), jobs=JOBS),
    ]
    ok, lines = True, []
    for cfg in configs:
        first = save_results(run_experiment(cfg), tmp_path / cfg.experiment / "a")
        second = save_results(run_experiment(cfg), tmp_path / cfg.experiment / "b")
        same = all(a.read_bytes() == b.read_bytes() for a, b in zip(first, second)) and len(first) == len(second)
        ok &= same
        lines.append(f"{cfg.experiment}: {len(first)} files {'identical' if same else 'DIFFER'}")
    assert report(capsys, 9, ok, lines)
