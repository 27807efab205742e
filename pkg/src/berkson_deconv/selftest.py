"""Fast self-check over closed-form and trivial examples; used by `berkson-deconv selftest`."""

from __future__ import annotations

import math
from typing import Callable, TextIO

import numpy as np
from scipy import stats

from .bandwidth import mu1, optimal_bandwidth
from .estimator import DensityEstimate, GridSpec, ecf, ise, true_fw
from .risk import (CaseId, bias_bound, classify_case, kappa, laplace_approx, phi_profile,
                   solve_exp_eq, variance_bound)
from .spectral import CharacteristicModel as CM
from .spectral import Scenario, SobolevSpec, rho_squared, sobolev_norm_sq

_SOB = SobolevSpec(1.0, 2.0)


def _sc(xi, g, sigma, n=1000, x=None):
    return Scenario(n=n, sigma=sigma, x_model=x or CM.laplace(1.0), xi_model=xi, g_model=g,
                    sobolev=_SOB)


def _gauss_ise() -> float:
    grid = GridSpec(-30.0, 30.0, 4001)
    a = DensityEstimate(grid, stats.norm.pdf(grid.x), 0.0)
    b = DensityEstimate(grid, stats.norm.pdf(grid.x, scale=2.0), 0.0)
    return ise(a, b)


def _true_fw_gap() -> float:
    grid = GridSpec()
    fw = true_fw(_sc(CM.laplace(1.0), CM.gaussian(1.0), 0.5, x=CM.gaussian(1.0)), grid)
    return float(np.max(np.abs(fw.values - stats.norm.pdf(grid.x, scale=math.sqrt(1.25)))))


CHECKS: list[tuple[str, Callable[[], float], float, float]] = [
    ("cf Gaussian(1) at 0", lambda: CM.gaussian(1.0).cf(0.0), 1.0, 1e-15),
    ("cf Laplace(1) at 2", lambda: CM.laplace(1.0).cf(2.0), 0.2, 1e-15),
    ("cf ExpPower(1,1) at 3", lambda: CM.exp_power(1.0, 1.0).cf(3.0), math.exp(-3), 1e-15),
    ("Sobolev norm Laplace k=0", lambda: sobolev_norm_sq(CM.laplace(1.0), 0.0), math.pi / 2, 1e-8),
    ("Sobolev norm Gaussian k=0", lambda: sobolev_norm_sq(CM.gaussian(1.0), 0.0),
     math.sqrt(math.pi), 1e-8),
    ("Sobolev norm Laplace k=2 diverges",
     lambda: float(math.isinf(sobolev_norm_sq(CM.laplace(1.0), 2.0))), 1.0, 0.0),
    ("rho^2 Laplace/Gaussian sigma=0.5",
     lambda: rho_squared(_sc(CM.laplace(1.0), CM.gaussian(1.0), 0.5)),
     math.sqrt(math.pi) * (2 + 8 + 0.75 * 32), 1e-6),
    ("classify (a=2,b=0) vs (alpha=3,beta=0) is I",
     lambda: float(classify_case(CM.laplace(1.0).envelope,
                                 CM.symmetric_gamma(1.0, 1.5).envelope) is CaseId.I), 1.0, 0.0),
    ("classify b=1 vs beta=2 is V",
     lambda: float(classify_case(CM.exp_power(1.0, 1.0).envelope,
                                 CM.gaussian(1.0).envelope) is CaseId.V), 1.0, 0.0),
    ("kappa(1,1,1,2)", lambda: kappa(1.0, 1.0, 1.0, 2.0), 0.5, 1e-15),
    ("bias h >= sigma", lambda: bias_bound(_sc(CM.laplace(1.0), CM.laplace(1.0), 0.05), 0.1),
     0.01, 1e-15),
    ("bias h = 0", lambda: bias_bound(_sc(CM.laplace(1.0), CM.laplace(1.0), 0.05), 0.0), 0.0, 0.0),
    ("variance case I sigma=0.1",
     lambda: variance_bound(_sc(CM.laplace(1.0), CM.symmetric_gamma(1.0, 1.5), 0.1), 0.05)[0],
     1e5, 1e-9),
    ("z_h (d=1,b=1,gamma=1,beta=2,sigma=0.5,h=0.1)",
     lambda: phi_profile(_sc(CM.exp_power(1.0, 1.0), CM.gaussian(math.sqrt(2)), 0.5 - 1e-12),
                         0.1).z_h, 0.2, 1e-9),
    ("Laplace approx, boundary branch",
     lambda: laplace_approx(lambda z: 1.0, lambda z: 50 * z, lambda z: 50.0, lambda z: 0.0,
                            (0.0, 1.0))[0] / (math.exp(50) / 50), 1.0, 1e-12),
    ("Laplace approx, interior branch",
     lambda: laplace_approx(lambda z: 1.0, lambda z: -100 * z * z, lambda z: -200 * z,
                            lambda z: -200.0, (-1.0, 1.0))[0], 1 / math.sqrt(200), 1e-9),
    ("mu1 (b=1,d=1,a=0,k=1,n=1e6)", lambda: mu1(1e6, 0.0, 1.0, 1.0, 1.0), 0.23355, 1e-4),
    ("solve e^m = 100", lambda: solve_exp_eq(0.0, 100.0), math.log(100), 1e-10),
    ("solve e^m m = 2e^2", lambda: solve_exp_eq(1.0, 2 * math.e**2), 2.0, 1e-10),
    ("h_opt case I above threshold",
     lambda: optimal_bandwidth(_sc(CM.laplace(1.0), CM.symmetric_gamma(1.0, 1.5), 0.5,
                                   n=10**4)).h_opt, 0.0, 0.0),
    ("h_opt case I below threshold",
     lambda: optimal_bandwidth(_sc(CM.laplace(1.0), CM.symmetric_gamma(1.0, 1.5), 0.1,
                                   n=10**4)).h_opt, 10 ** (-4 / 7), 1e-12),
    ("ecf of [0,0,0] at 5", lambda: abs(ecf([0.0, 0.0, 0.0], 5.0) - 1), 0.0, 1e-15),
    ("ise Gaussian(1) vs Gaussian(2)", _gauss_ise,
     1.5 / (2 * math.sqrt(math.pi)) - 2 / math.sqrt(10 * math.pi), 1e-6),
    ("true f_W Gaussian + Gaussian sigma=0.5 sup gap", _true_fw_gap, 0.0, 1e-6),
]


def run(out: TextIO) -> int:
    """Run every check, printing one line each; returns the number of failures."""
    failures = 0
    for name, fn, expected, tol in CHECKS:
        try:
            got = float(fn())
            ok = abs(got - expected) <= tol * max(1.0, abs(expected))
            detail = f"got {got:.10g}, expected {expected:.10g}"
        except Exception as exc:  # a crash is a failed check, not a crashed selftest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        out.write(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}\n")
    out.write(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed\n")
    return failures
