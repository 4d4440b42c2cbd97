"""Registry of the Monte Carlo designs and the estimator tuning bundle.

Labels follow the tables they reproduce: ``CJ1-i`` .. ``SJ2-iii`` for the
integrated-volatility RMSE study, ``C1-I`` .. ``D2-IV`` for the co-jump
test, ``RV-cont`` and ``RV-jump`` for the realized-variance densities and
``IV-base`` (no jumps, no noise) as a baseline.
"""

from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass, replace

from ..avar import JUMP_FILTERS, WindowRule
from ..errors import ParameterError
from ..paths import CojumpSpec, JumpSpec, NoiseSpec, SimConfig, SVParams
from ..siml import SimlConfig
from ..variation import TruncationRule

__all__ = ["EstimatorConfig", "CASES", "case", "case_key", "cases_for", "UNIVARIATE_SV", "BIVARIATE_SV"]


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning constants left to the user: truncation, SIML exponent, window."""

    trunc_alpha: float = 2.0
    trunc_theta: float = 0.48
    siml_p: float = 0.49
    window_c: float = 1.0
    window_gamma: float = 0.5

    def __post_init__(self):
        # construct once to validate
        self.trunc, self.siml, self.window  # noqa: B018

    @property
    def trunc(self) -> TruncationRule:
        return TruncationRule(self.trunc_alpha, self.trunc_theta)

    @property
    def siml(self) -> SimlConfig:
        return SimlConfig(self.siml_p)

    @property
    def window(self) -> WindowRule:
        return WindowRule(self.window_c, self.window_gamma)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "EstimatorConfig":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown estimator settings: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


UNIVARIATE_SV = SVParams(alpha=5.0, beta=0.2, rho=-0.5)
BIVARIATE_SV = (SVParams(alpha=5.0, beta=0.2, rho=-0.5), SVParams(alpha=5.0, beta=0.15, rho=-0.4))

_RMSE_ZETA = {"i": 0.0, "ii": 1e-4, "iii": 1e-2}
_TEST_ZETA = {"I": 1e-4, "II": 1e-2, "III": 1e-1, "IV": 1.0}
_SIZE = {"1": 20000, "2": 30000}


def _build() -> dict:
    cases = {}
    jumps = {
        "CJ": JumpSpec("compound_poisson", intensity=10.0, low=0.05, high=0.3),
        "SJ": JumpSpec("stable", index=1.5, scale=1.0),
    }
    for family, spec in jumps.items():
        for size, n in _SIZE.items():
            for roman, zeta in _RMSE_ZETA.items():
                cases[f"{family}{size}-{roman}"] = SimConfig((UNIVARIATE_SV,), spec, NoiseSpec((zeta,)), n)
    for family, mode in (("C", "cojump"), ("D", "disjoint")):
        for size, n in _SIZE.items():
            for roman, zeta in _TEST_ZETA.items():
                cases[f"{family}{size}-{roman}"] = SimConfig(
                    BIVARIATE_SV, CojumpSpec(), NoiseSpec((zeta, zeta)), n, mode)
    cases["IV-base"] = SimConfig((UNIVARIATE_SV,), JumpSpec("none"), NoiseSpec((0.0,)), 20000)
    cases["RV-cont"] = SimConfig((UNIVARIATE_SV,), JumpSpec("none"), NoiseSpec((1e-2,)), 20000)
    cases["RV-jump"] = SimConfig((UNIVARIATE_SV,), jumps["CJ"], NoiseSpec((1e-2,)), 20000)
    return cases


CASES: dict[str, SimConfig] = _build()


def case(label: str, n: int | None = None) -> SimConfig:
    """Simulation config for ``label``, optionally with ``n`` overridden."""
    try:
        cfg = CASES[label]
    except KeyError:
        raise ParameterError(f"unknown case {label!r}; known: {', '.join(CASES)}") from None
    return cfg if n is None else replace(cfg, n=int(n))


def case_key(label: str) -> int:
    """Stable integer used in the replication seed, independent of run order."""
    return zlib.crc32(label.encode("utf-8"))


def cases_for(prefixes) -> list[str]:
    """All labels starting with any of ``prefixes``, in registry order."""
    return [label for label in CASES if label.startswith(tuple(prefixes))]


DEFAULT_JUMP_FILTER = JUMP_FILTERS[0]
