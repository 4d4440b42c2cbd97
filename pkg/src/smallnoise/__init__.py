"""Realized-volatility, SIML and co-jump estimators under small microstructure noise."""

from .avar import (
    AvarReport,
    WindowRule,
    a_hat,
    cojump_avar,
    d_hat,
    d_hat_11,
    f_hat,
    j_hat,
    rv_avar,
    spot_vol,
    spot_vol_path,
)
from .cojump import TestReport, cojump_test, s_krs, t_stat
from .errors import DegenerateError, ParameterError, ShapeError
from .paths import (
    CojumpSpec,
    Grid,
    JumpSpec,
    NoiseSpec,
    NoisySample,
    SimConfig,
    SVParams,
    add_noise,
    simulate_bivariate_cojump,
    simulate_univariate,
)
from .siml import SimlConfig, integrated_volatility, noise_variance, siml, siml_qv, siml_transform
from .variation import (
    TruncationRule,
    bipower_variation,
    multipower_variation,
    power_variation,
    truncated_rv,
)

__version__ = "0.1.0"
