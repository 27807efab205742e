"""Asymptotically optimal bandwidth and its brute-force cross-check."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import AdmissibilityError, RegimeError
from .risk import CaseId, Exponents, _exp, classify_case, kappa, log_total_bound
from .spectral import Scenario, rho_finiteness


class Branch(str, Enum):
    ABOVE = "AboveThreshold"
    BELOW = "BelowThreshold"


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BandwidthDecision:
    case: CaseId
    h_opt: float
    threshold: float
    branch: Branch
    predicted_delta: float
    trace: str


def _min_admissible_n(c: float) -> float:
    """Smallest n beyond which ln n + c ln ln n stays positive."""
    g = lambda L: L + c * math.log(L)  # noqa: E731
    if c >= -math.e:
        return math.e
    hi = -c
    while g(hi) <= 0:
        hi *= 2
    return math.exp(optimize.brentq(g, -c, hi))


def _mu(n: float, a: float, b: float, d_eff: float, k: float, name: str) -> float:
    if not (b > 0 and d_eff > 0):
        raise ValueError(f"{name} needs b > 0 and a positive exponential scale")
    if not n > math.e:
        raise RegimeError(f"n below asymptotic regime for {name}: need n > e", n=n,
                          min_n=math.e)
    c = (b - 2 * a - 2 * k - 1) / b
    bracket = (math.log(n) + c * math.log(math.log(n))) / (2 * d_eff)
    if bracket <= 0:
        raise RegimeError(f"n below asymptotic regime for {name}", n=n,
                          min_n=_min_admissible_n(c))
    return bracket ** (-1 / b)


def mu1(n: float, a: float, b: float, d: float, k: float) -> float:
    return _mu(n, a, b, d, k, "mu1")


def mu2(n: float, a: float, b: float, d: float, k: float, gamma: float, sigma: float) -> float:
    return _mu(n, a, b, d - gamma * sigma**b, k, "mu2")


def threshold(scenario: Scenario) -> float:
    """sigma-threshold separating the two rows of the case."""
    e, k, n = Exponents.of(scenario), scenario.sobolev.k, scenario.n
    case = classify_case(scenario.xi_env, scenario.g_env)
    if case in (CaseId.I, CaseId.II, CaseId.III, CaseId.IV):
        return n ** (-1 / (2 * k + 2 * e.a + 1))
    return mu1(n, e.a, e.b, e.d, k)


def is_above(case: CaseId, sigma: float, thr: float) -> bool:
    # rows I and II put the tie on the upper branch, the others on the lower one
    if case in (CaseId.I, CaseId.II):
        return sigma >= thr
    return sigma > thr


def optimal_bandwidth(scenario: Scenario, h_grid: Sequence[float] | None = None) -> BandwidthDecision:
    """Tabulated optimal bandwidth and risk order for the scenario.

    Falls back to :func:`grid_search_bandwidth` (with a :class:`RegimeWarning`)
    when the tabulated bandwidth is not below 1, i.e. outside the asymptotic regime.
    """
    e, k, n, sigma = Exponents.of(scenario), scenario.sobolev.k, scenario.n, scenario.sigma
    a, alpha = e.a, e.alpha
    case = classify_case(scenario.xi_env, scenario.g_env)
    thr = threshold(scenario)
    above = is_above(case, sigma, thr)
    ln_n = math.log(n)
    q = 2 * k + 2 * a + 1
    rate_n = n ** (-2 * k / q)
    direct = sigma ** (-(2 * a + 1)) / n

    if case is CaseId.I:
        h, delta, trace = (0.0, direct, "h = 0; Delta = sigma^-(2a+1)/n") if above else \
            (thr, rate_n, "h = n^-1/(2k+2a+1); Delta = n^-2k/(2k+2a+1)")
    elif case is CaseId.II:
        if above:
            h = n ** (-1 / (2 * k + 2 * alpha)) * sigma ** ((2 * alpha - 2 * a - 1) / (2 * alpha + 2 * k))
            delta, trace = direct * ln_n, "h = n^-1/(2k+2alpha) sigma^((2alpha-2a-1)/(2alpha+2k)); Delta = sigma^-(2a+1) ln n / n"
        else:
            h, delta = n ** (-1 / (2 * k + 2 * alpha + 1)), rate_n
            trace = "h = n^-1/(2k+2alpha+1); Delta = n^-2k/(2k+2a+1)"
    elif case is CaseId.III:
        h = thr
        if above:
            delta = sigma ** (-2 * alpha) * n ** (-(2 * alpha + 2 * k) / q)
            trace = "h = n^-1/(2k+2a+1); Delta = sigma^-2alpha n^-(2alpha+2k)/(2k+2a+1)"
        else:
            delta, trace = rate_n, "h = n^-1/(2k+2a+1); Delta = n^-2k/(2k+2a+1)"
    elif case is CaseId.IV:
        h, delta, trace = (0.0, direct, "h = 0; Delta = sigma^-(2a+1)/n") if above else \
            (thr, rate_n, "h = n^-1/(2k+2a+1); Delta = n^-2k/(2k+2a+1)")
    else:
        log_rate = (-2 * k / e.b) * math.log(ln_n)
        low = (_exp(log_rate), "(ln n)^-2k/b")
        if case is CaseId.V:
            if above:
                r = e.beta / (e.beta - e.b)
                log_d = (kappa(e.d, e.b, e.gamma, e.beta) * sigma ** (-e.b * r)
                         + (r * (e.b - 2) / 2 - 2 * alpha) * math.log(sigma) - ln_n)
                h, delta = 0.0, _exp(log_d)
                trace = "h = 0; Delta = exp(kappa sigma^(-beta b/(beta-b))) sigma^(beta(b-2)/(2(beta-b))-2alpha)/n"
            else:
                h, (delta, tr) = thr, low
                trace = f"h = mu1; Delta = {tr}"
        elif case is CaseId.VI:
            if above:
                h = thr
                delta = (sigma ** (-2 * alpha) * ln_n ** (-(2 * alpha + 2 * k) / e.b)
                         * math.exp(-2 * e.gamma * sigma**e.beta * ln_n ** (e.beta / e.b)))
                trace = "h = mu1; Delta = sigma^-2alpha (ln n)^-(2alpha+2k)/b exp(-2 gamma sigma^beta (ln n)^(beta/b))"
            else:
                h = mu2(n, a, e.b, e.d, k, e.gamma, sigma)
                delta, tr = low
                trace = f"h = mu2; Delta = {tr}"
        elif case is CaseId.VII:
            h = thr
            if above:
                delta = ln_n ** (-(2 * alpha + 2 * k) / e.b) * sigma ** (-2 * alpha)
                trace = "h = mu1; Delta = (ln n)^-(2alpha+2k)/b sigma^-2alpha"
            else:
                delta, tr = low
                trace = f"h = mu1; Delta = {tr}"
        else:
            h = thr
            if above:
                delta = sigma ** (-2 * alpha) * ln_n ** ((1 + 2 * a - 2 * alpha) / e.b - 1)
                trace = "h = mu1; Delta = sigma^-2alpha (ln n)^((1+2a-2alpha)/b - 1)"
            else:
                delta, tr = low
                trace = f"h = mu1; Delta = {tr}"

    if h >= 1:
        warnings.warn(f"tabulated bandwidth {h:.4g} >= 1 lies outside the asymptotic regime; "
                      "falling back to grid search", RegimeWarning, stacklevel=2)
        grid = default_h_grid(scenario) if h_grid is None else h_grid
        h_tab = h
        h, _ = grid_search_bandwidth(scenario, grid)
        trace = f"grid-search fallback (tabulated h = {h_tab:.6g}); table: {trace}"
    branch = Branch.ABOVE if above else Branch.BELOW
    return BandwidthDecision(case, float(h), float(thr), branch, float(delta), trace)


def default_h_grid(scenario: Scenario, points: int = 200, lo: float = 1e-4,
                   hi: float = 1.0) -> np.ndarray:
    """Log-spaced bandwidth grid, prefixed by 0 when rho^2 is finite."""
    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    finite, _ = rho_finiteness(scenario.xi_env, scenario.g_env, scenario.sigma)
    return np.concatenate([[0.0], grid]) if finite else grid


def grid_search_bandwidth(scenario: Scenario, h_grid: Sequence[float]) -> tuple[float, float]:
    """Minimise Delta_1(h) + Delta_2(h)/n over ``h_grid``; ties go to the first point."""
    best_h, best_log = None, math.inf
    for h in h_grid:
        try:
            val = log_total_bound(scenario, float(h))
        except AdmissibilityError:
            continue
        if best_h is None or val < best_log:
            best_h, best_log = float(h), val
    if best_h is None:
        raise AdmissibilityError("no admissible bandwidth on the grid",
                                 case=classify_case(scenario.xi_env, scenario.g_env).value)
    return best_h, _exp(best_log)
