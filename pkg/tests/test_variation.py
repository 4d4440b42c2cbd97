import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from smallnoise.errors import ParameterError, ShapeError
from smallnoise.paths import CojumpSpec, Grid, NoiseSpec, SimConfig, SVParams, simulate_bivariate_cojump
from smallnoise.variation import (
    TruncationRule,
    abs_moment,
    bipower_variation,
    bivariate_truncated_cov,
    multipower_variation,
    power_variation,
    truncated_rv,
)

from conftest import brownian_sample

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def path_from(increments):
    return np.concatenate(([0.0], np.cumsum(increments)))


def test_abs_moments():
    assert abs_moment(2) == pytest.approx(1.0, abs=1e-12)
    assert abs_moment(1) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-15)
    assert abs_moment(1) == pytest.approx(0.797885, abs=1e-6)
    assert abs_moment(4) == pytest.approx(3.0, rel=1e-13)
    with pytest.raises(ParameterError):
        abs_moment(0)


def test_power_variation_constant_increments():
    y = path_from(np.full(4, 0.1))
    assert power_variation(y, 2) == pytest.approx(0.04, abs=1e-15)
    assert power_variation(np.zeros(10), 3) == 0.0
    with pytest.raises(ParameterError):
        power_variation(y, 0)


def test_power_variation_rejects_bivariate():
    with pytest.raises(ShapeError):
        power_variation(np.zeros((2, 5)), 2)


def test_rv_clt_on_brownian():
    n = 20000
    rv = power_variation(brownian_sample(0.2, n, seed=1), 2)
    assert abs(rv - 0.04) < 3 * math.sqrt(2 * 0.04**2 / n)


def test_bipower_hand_value():
    y = path_from([1.0, -2.0, 3.0])
    assert bipower_variation(y) == 2.0 + 6.0
    assert bipower_variation(y, 2, 1) == 1 * 2 + 4 * 3
    assert bipower_variation(y, scaled=True) == pytest.approx(8.0 * 3 ** 0 / abs_moment(1) ** 2)


def test_multipower_consistency_between_ops(rng):
    y = path_from(rng.standard_normal(50))
    assert multipower_variation(y, [2]) == pytest.approx(power_variation(y, 2), rel=1e-14)
    assert multipower_variation(y, [1, 1]) == pytest.approx(bipower_variation(y, 1, 1), rel=1e-14)
    with pytest.raises(ParameterError):
        multipower_variation(y, [])
    with pytest.raises(ParameterError):
        multipower_variation(y[:2], [1, 1])


def test_multipower_permutation_brute_force(rng):
    dy = rng.standard_normal(9)
    y = path_from(dy)
    a = dy[:-1]
    b = dy[1:]
    brute12 = sum(abs(a[i]) ** 1 * abs(b[i]) ** 2 for i in range(8))
    brute21 = sum(abs(a[i]) ** 2 * abs(b[i]) ** 1 for i in range(8))
    assert multipower_variation(y, [1, 2]) == pytest.approx(brute12, rel=1e-13)
    assert multipower_variation(y, [2, 1]) == pytest.approx(brute21, rel=1e-13)
    # the two orders differ only through the end cells
    edge = abs(dy[0]) * abs(dy[1]) ** 2 + abs(dy[-2]) ** 2 * abs(dy[-1]) + np.max(np.abs(dy)) ** 3
    assert abs(brute12 - brute21) <= 2 * edge + 1e-12


@pytest.mark.parametrize("exponents, target", [((1, 1), 0.04), ((2, 2), 0.0016), ((1, 1, 1, 1), 0.0016)])
def test_scaled_multipower_on_constant_vol(exponents, target):
    values = [multipower_variation(brownian_sample(0.2, 20000, seed=s), exponents, scaled=True)
              for s in range(20)]
    assert np.mean(values) == pytest.approx(target, rel=0.03)


def test_truncation_rule():
    rule = TruncationRule()
    assert rule.threshold(20000) == pytest.approx(2 * 20000 ** -0.48)
    assert rule.threshold(20000) == pytest.approx(1.7e-2, abs=1e-3)
    with pytest.raises(ParameterError):
        TruncationRule(theta=0.5)
    with pytest.raises(ParameterError):
        TruncationRule(alpha=0.0)


@settings(max_examples=200, deadline=None)
@given(arrays(float, st.integers(2, 300), elements=finite))
def test_partition_identity(y):
    trvc, trvj = truncated_rv(y)
    rv = power_variation(y, 2)
    assert trvc + trvj == pytest.approx(rv, rel=1e-12, abs=1e-12)


def test_partition_identity_thousand_sequences(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 2000))
        y = path_from(rng.standard_normal(n) * 10.0 ** rng.uniform(-6, 1))
        trvc, trvj = truncated_rv(y)
        rv = power_variation(y, 2)
        worst = max(worst, abs(trvc + trvj - rv) / max(rv, 1e-300))
    assert worst < 1e-12


def test_single_large_increment_is_jump():
    n = 20000
    dy = np.full(n, 1e-6)
    dy[n // 2] = 0.5
    trvc, trvj = truncated_rv(path_from(dy))
    assert trvj == pytest.approx(0.25, abs=1e-15)
    assert trvc == pytest.approx((n - 1) * 1e-12, rel=1e-9)


def test_truncation_on_continuous_path():
    assert truncated_rv(brownian_sample(0.2, 20000, seed=2))[1] < 1e-3


def test_bivariate_cov_partition(rng):
    y = np.cumsum(rng.standard_normal((2, 500)) * 0.05, axis=1)
    below = bivariate_truncated_cov(y, side="below")
    above = bivariate_truncated_cov(y, side="above")
    dy = np.diff(y, axis=1)
    assert below + above == pytest.approx(np.sum(dy[0] * dy[1]), rel=1e-12, abs=1e-15)
    with pytest.raises(ShapeError):
        bivariate_truncated_cov(y[:1])
    with pytest.raises(ParameterError):
        bivariate_truncated_cov(y, side="middle")


SV2 = (SVParams(5.0, 0.2, -0.5), SVParams(5.0, 0.15, -0.4))


def test_bivariate_cov_disjoint_is_pure_leakage():
    # without common jumps only a * dW terms at jump cells survive, with
    # conditional standard deviation sqrt(sum a^2 c_other dt) ~ n^(-1/2)
    n, ratios = 20000, []
    for seed in range(200):
        path = simulate_bivariate_cojump(SV2, CojumpSpec(), Grid(n), seed, mode="disjoint")
        cells, sizes = path.jump_cells, path.jump_sizes
        var = np.sum(sizes[:, 0] ** 2 * path.spot[1, 1, cells] + sizes[:, 1] ** 2 * path.spot[0, 0, cells]) / n
        if var > 0:
            ratios.append(bivariate_truncated_cov(path) / np.sqrt(var))
    assert abs(np.mean(ratios)) < 0.25
    assert 0.8 < np.std(ratios) < 1.2


def test_bivariate_cov_tracks_cojump_truth():
    errs = []
    for seed in range(30):
        path = simulate_bivariate_cojump(SV2, CojumpSpec(), Grid(20000), seed)
        errs.append(bivariate_truncated_cov(path) - path.truth.jump_qv[0, 1])
    assert abs(np.mean(errs)) < 5e-4
    assert np.sqrt(np.mean(np.square(errs))) < 2e-3
