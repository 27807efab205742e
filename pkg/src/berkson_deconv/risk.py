"""Order-level risk bounds for the sinc-kernel deconvolution estimator.

All bound evaluators return the bare shape expression (every hidden constant
set to 1); comparisons against quadrature or the Laplace approximation are made
on ratios. Values are assembled in log space because exp(2 d h^-b) overflows a
double long before h reaches interesting sizes; the public functions
exponentiate at the end and may return ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import AdmissibilityError, NumericError
from .spectral import Scenario, SmoothnessEnvelope

GOLDEN = (math.sqrt(5) - 1) / 2


class CaseId(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    VIII = "VIII"


#: cases whose rho^2 is finite, so the full-band (h = 0) estimator exists
ZERO_BANDWIDTH_CASES = frozenset({CaseId.I, CaseId.IV, CaseId.V})


@dataclass(frozen=True)
class Exponents:
    a: float
    b: float
    d: float
    alpha: float
    beta: float
    gamma: float

    @classmethod
    def of(cls, scenario: Scenario) -> "Exponents":
        xi, g = scenario.xi_env, scenario.g_env
        return cls(xi.poly_exp, xi.exp_exp, xi.exp_scale, g.poly_exp, g.exp_exp, g.exp_scale)


@dataclass(frozen=True)
class RiskBound:
    h: float
    delta1: float
    delta2: float
    total: float
    case: CaseId
    branch: str


@dataclass(frozen=True)
class PhiProfile:
    """Exponent phi(z|sigma,h) and prefactor P(z|sigma,h) of the rescaled variance integral."""

    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    d2phi: Callable[[float], float]
    P: Callable[[float], float]
    z_h: float | None


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _log_min_ratio(h: float, sigma: float, alpha: float) -> float:
    # log min{(h/sigma)^(2 alpha), 1}
    return 2 * alpha * min(math.log(h / sigma), 0.0)


def classify_case(xi_env: SmoothnessEnvelope, g_env: SmoothnessEnvelope) -> CaseId:
    """Table row for the (f_xi, g) smoothness pair."""
    a, b = xi_env.poly_exp, xi_env.exp_exp
    alpha, beta = g_env.poly_exp, g_env.exp_exp
    if b == 0 and beta == 0:
        if math.isclose(alpha, a + 0.5, rel_tol=1e-12, abs_tol=1e-12):
            return CaseId.II
        return CaseId.I if alpha > a + 0.5 else CaseId.III
    if b == 0:
        return CaseId.IV
    if beta > b:
        return CaseId.V
    if beta == b:
        return CaseId.VI
    if beta == 0:
        return CaseId.VII
    return CaseId.VIII


def kappa(d: float, b: float, gamma: float, beta: float) -> float:
    """Exponent constant of the case-V interior-maximum branch, as printed."""
    if not beta > b > 0:
        raise ValueError("kappa is defined only for beta > b > 0")
    return (d * b / (gamma * beta)) ** (b / (beta - b)) * (d * (beta - b) / b)


def case_v_split(e: Exponents, sigma: float) -> float:
    """Bandwidth (gamma beta sigma^beta / (d b))^(1/(beta-b)) separating the two case-V branches."""
    return (e.gamma * e.beta * sigma**e.beta / (e.d * e.b)) ** (1 / (e.beta - e.b))


def bias_bound(scenario: Scenario, h: float) -> float:
    """Integrated squared bias bound; 0 at h = 0 where no band is discarded."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    if h == 0:
        return 0.0
    e, sigma, k = Exponents.of(scenario), scenario.sigma, scenario.sobolev.k
    if h >= sigma:
        return h ** (2 * k)
    return (sigma ** (-2 * e.alpha) * h ** (2 * e.alpha + 2 * k)
            * math.exp(-2 * e.gamma * (sigma / h) ** e.beta))


def log_variance_bound(scenario: Scenario, h: float) -> tuple[float, str]:
    """(log Delta_2, branch) for the classified case."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    e, sigma = Exponents.of(scenario), scenario.sigma
    case = classify_case(scenario.xi_env, scenario.g_env)
    p = 2 * e.a + 1
    if h == 0 and case not in ZERO_BANDWIDTH_CASES:
        raise AdmissibilityError(
            f"h = 0 refused in case {case.value}: rho^2(sigma) is infinite",
            case=case.value)
    side = "h = 0" if h == 0 else ("h >= sigma" if h >= sigma else "h < sigma")

    if case in (CaseId.I, CaseId.II, CaseId.III, CaseId.IV):
        # min(h^-(2a+1), sigma^-(2a+1)) = max(h, sigma)^-(2a+1), times the log/poly factor
        log_m = -p * math.log(max(h, sigma))
        if case is CaseId.II:
            log_m += math.log(max(math.log(sigma / h), 1.0))
        elif case is CaseId.III:
            log_m += max(0.0, (2 * e.a - 2 * e.alpha + 1) * math.log(sigma / h))
        return log_m, f"{case.value}: {side}"

    if case is CaseId.V:
        split = case_v_split(e, sigma)
        if h >= split:
            val = ((e.b - p) * math.log(h) + 2 * e.d * h ** (-e.b)
                   + _log_min_ratio(h, sigma, e.alpha))
            return val, f"V: h >= (gamma beta sigma^beta/(d b))^(1/(beta-b)) = {split:.6g}"
        kap = kappa(e.d, e.b, e.gamma, e.beta)
        r = e.beta / (e.beta - e.b)
        val = kap * sigma ** (-e.b * r) + (r * (e.b - 2) / 2 - 2 * e.alpha) * math.log(sigma)
        return val, f"V: h < (gamma beta sigma^beta/(d b))^(1/(beta-b)) = {split:.6g}"

    d_eff = e.d - e.gamma * sigma**e.b if case is CaseId.VI else e.d
    val = (e.b - p) * math.log(h) + 2 * d_eff * h ** (-e.b) + _log_min_ratio(h, sigma, e.alpha)
    return val, f"{case.value}: {side}"


def variance_bound(scenario: Scenario, h: float) -> tuple[float, str]:
    log_val, branch = log_variance_bound(scenario, h)
    return _exp(log_val), branch


def risk_bound(scenario: Scenario, h: float) -> RiskBound:
    d1 = bias_bound(scenario, h)
    d2, branch = variance_bound(scenario, h)
    case = classify_case(scenario.xi_env, scenario.g_env)
    return RiskBound(h, d1, d2, d1 + d2 / scenario.n, case, branch)


def log_total_bound(scenario: Scenario, h: float) -> float:
    """log(Delta_1 + Delta_2 / n) without overflow."""
    log_v = log_variance_bound(scenario, h)[0] - math.log(scenario.n)
    d1 = bias_bound(scenario, h)
    if d1 <= 0:
        return log_v
    log_b = math.log(d1)
    hi, lo = max(log_b, log_v), min(log_b, log_v)
    return hi + math.log1p(math.exp(lo - hi))


# ---------------------------------------------------------------------------
# saddle-point machinery
# ---------------------------------------------------------------------------

def phi_profile(scenario: Scenario, h: float) -> PhiProfile:
    e, sigma = Exponents.of(scenario), scenario.sigma
    if e.b == 0 and e.beta == 0:
        raise ValueError("phi_profile needs b > 0 or beta > 0")
    if h <= 0:
        raise ValueError("phi_profile needs h > 0")
    cb = 2 * e.d * h ** (-e.b)
    cg = 2 * e.gamma * sigma**e.beta * h ** (-e.beta)

    def phi(z):
        return cb * z**e.b - cg * z**e.beta

    def dphi(z):
        return cb * e.b * z ** (e.b - 1) - cg * e.beta * z ** (e.beta - 1)

    def d2phi(z):
        return (cb * e.b * (e.b - 1) * z ** (e.b - 2)
                - cg * e.beta * (e.beta - 1) * z ** (e.beta - 2))

    def P(z):
        return (sigma**2 * z**2 / h**2 + 1) ** (-e.alpha) * (z**2 + h**2) ** e.a

    z_h = None
    if e.b > 0 and e.beta > 0 and e.b != e.beta:
        z_h = (e.d * e.b / (e.gamma * e.beta) * sigma ** (-e.beta)) ** (1 / (e.beta - e.b)) * h
    return PhiProfile(phi, dphi, d2phi, P, z_h)


def _golden_max(Q: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    qc, qd = Q(c), Q(d)
    while b - a > tol:
        if qc >= qd:
            b, d, qd = d, c, qc
            c = b - GOLDEN * (b - a)
            qc = Q(c)
        else:
            a, c, qc = c, d, qd
            d = a + GOLDEN * (b - a)
            qd = Q(d)
    return 0.5 * (a + b)


def log_laplace_approx(P, Q, Q1, Q2, interval: tuple[float, float],
                       tol: float = 1e-10) -> tuple[float, str]:
    """log of the Laplace approximation to int P exp(Q) over ``interval``."""
    lo, hi = interval
    z_in = _golden_max(Q, lo, hi, tol * (hi - lo))
    cands = [(Q(lo), lo), (Q(z_in), z_in), (Q(hi), hi)]
    q0, z0 = max(cands, key=lambda c: c[0])
    p0 = P(z0)
    if p0 == 0:
        return -math.inf, "zero prefactor"
    near_end = min(abs(z0 - lo), abs(z0 - hi)) <= 10 * tol * (hi - lo)
    q1, q2 = Q1(z0), Q2(z0)
    if abs(q1) < 1e-12 and abs(q2) < 1e-12:
        raise NumericError("degenerate maximum: Q' and Q'' both vanish", z0=z0)
    if near_end and abs(q1) >= 1e-12:
        return q0 + math.log(abs(p0)) - math.log(abs(q1)), f"boundary maximum at z0={z0:.6g}"
    return q0 + math.log(abs(p0)) - 0.5 * math.log(abs(q2)), f"interior maximum at z0={z0:.6g}"


def laplace_approx(P, Q, Q1, Q2, interval: tuple[float, float],
                   tol: float = 1e-10) -> tuple[float, str]:
    """Laplace approximation to int P(z) exp(Q(z)) dz.

    Interior maximum: exp(Q(z0)) P(z0) / sqrt|Q''(z0)|. Maximum on the boundary
    with nonzero slope: exp(Q(z0)) P(z0) / |Q'(z0)|.
    """
    log_val, branch = log_laplace_approx(P, Q, Q1, Q2, interval, tol)
    return (_exp(log_val) if log_val > -math.inf else 0.0), branch


def log_laplace_variance(scenario: Scenario, h: float) -> tuple[float, str]:
    """log of h^-(2a+1) times the Laplace approximation of int_0^1 P exp(phi) dz."""
    prof = phi_profile(scenario, h)
    e = Exponents.of(scenario)
    log_i, branch = log_laplace_approx(prof.P, prof.phi, prof.dphi, prof.d2phi, (0.0, 1.0))
    return -(2 * e.a + 1) * math.log(h) + log_i, branch


def log_variance_quadrature(scenario: Scenario, h: float) -> float:
    """log of (2 pi)^-1 int_{|s| < 1/h} |g*(sigma s)/f_xi*(s)|^2 ds by adaptive quadrature."""
    upper = 1.0 / h
    edges = np.concatenate([[0.0], upper * np.geomspace(1e-6, 1.0, 25)])
    probe = np.concatenate([edges, np.linspace(0.0, upper, 2001)])
    peak = float(np.max(2 * scenario.log_ratio(probe)))  # factored out to avoid overflow
    f = lambda s: math.exp(2 * float(scenario.log_ratio(s)) - peak)  # noqa: E731
    total = sum(integrate.quad(f, lo, hi, limit=200, epsrel=1e-10, epsabs=0.0)[0]
                for lo, hi in zip(edges[:-1], edges[1:]))
    return peak + math.log(total / math.pi)


def variance_quadrature(scenario: Scenario, h: float) -> float:
    return _exp(log_variance_quadrature(scenario, h))


# ---------------------------------------------------------------------------
# e^m m^z = n
# ---------------------------------------------------------------------------

def solve_exp_eq(z: float, n: float, tol: float = 1e-14) -> float:
    """Root m >= 1 of e^m m^z = n by bisection on m + z ln m - ln n."""
    if not n > math.e:
        raise ValueError("n must exceed e")
    ln_n = math.log(n)
    f = lambda m: m + z * math.log(m) - ln_n  # noqa: E731
    lo, hi = 1.0, ln_n + abs(z) * math.log(ln_n) + 10.0
    if f(lo) * f(hi) > 0:
        hi = 2 * hi + 10.0 * (1 + abs(z))
        if f(lo) * f(hi) > 0:
            raise NumericError("no sign change for e^m m^z = n on the bracket", z=z, n=n)
    flo = f(lo)
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exp_root_asymptotic(z: float, n: float) -> float:
    ln_n = math.log(n)
    return ln_n - z * math.log(ln_n)
