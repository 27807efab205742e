"""Canned scenarios: one representative model pair per case, and the acceptance set."""

from __future__ import annotations

import math

from .risk import CaseId
from .spectral import CharacteristicModel as CM
from .spectral import Scenario, SobolevSpec

# f_X shared by every canned scenario. Laplace has |f_X*|^2 (1+s^2) integrable but not
# (1+s^2)^(3/2), so k = 1 is attained; scale 0.8 keeps the mass outside [-12, 12]
# below 1e-6 and has squared Sobolev norm 5.03 <= B^2.
X_MODEL = CM.laplace(0.8)
SOBOLEV = SobolevSpec(k=1.0, B=2.5)

# (xi model, g model) per case
CASE_MODELS: dict[CaseId, tuple[CM, CM]] = {
    CaseId.I: (CM.laplace(1.0), CM.symmetric_gamma(1.0, 1.5)),
    CaseId.II: (CM.laplace(1.0), CM.symmetric_gamma(1.0, 1.25)),
    CaseId.III: (CM.laplace(1.0), CM.laplace(1.0)),
    CaseId.IV: (CM.laplace(1.0), CM.gaussian(1.0)),
    CaseId.V: (CM.exp_power(1.0, 1.0), CM.gaussian(math.sqrt(2.0))),
    CaseId.VI: (CM.gaussian(1.0), CM.gaussian(1.0)),
    CaseId.VII: (CM.gaussian(1.0), CM.laplace(1.0)),
    CaseId.VIII: (CM.gaussian(1.0), CM.hyperbolic_secant(1.0)),
}

REGIMES = ("above", "below", "far_below")
MATRIX_N = 10**12


def case_scenario(case: CaseId | str, sigma: float, n: int = MATRIX_N) -> Scenario:
    xi, g = CASE_MODELS[CaseId(case)]
    return Scenario(n=n, sigma=sigma, x_model=X_MODEL, xi_model=xi, g_model=g, sobolev=SOBOLEV)


def sigma_limit(case: CaseId | str) -> float:
    """Upper limit on sigma from the small-sigma condition (inf when it does not apply)."""
    xi, g = (m.envelope for m in CASE_MODELS[CaseId(case)])
    if xi.exp_scale > 0 and g.exp_scale > 0:
        return 0.5 * (xi.exp_scale / g.exp_scale) ** (1 / xi.exp_exp)
    return math.inf


def regime_sigma(case: CaseId | str, regime: str, n: int = MATRIX_N) -> float:
    """sigma well above, below, or far below the case's threshold at sample size n."""
    from .bandwidth import threshold

    thr = threshold(case_scenario(case, 1e-3, n))
    if regime == "above":
        return min(2 * thr, 0.9 * sigma_limit(case))
    if regime == "below":
        return thr / 4
    if regime == "far_below":
        return thr / 64
    raise ValueError(f"unknown regime {regime!r}")


def scenario_matrix(n: int = MATRIX_N) -> list[tuple[CaseId, str, Scenario]]:
    """The 8 cases x 3 sigma-regimes used for bound-level cross-checks."""
    return [(c, r, case_scenario(c, regime_sigma(c, r, n), n)) for c in CaseId for r in REGIMES]


# families of the Monte Carlo acceptance runs (a case IV pair)
def case_iv_scenario(n: int, sigma: float) -> Scenario:
    return case_scenario(CaseId.IV, sigma, n)
