"""Characteristic-function models, smoothness envelopes and spectral integrals.

Fourier convention: f*(s) = int exp(i s x) f(x) dx, so a density's transform is
its characteristic function and the inverse transform carries 1/(2 pi).

Every shipped family is symmetric, so its characteristic function is real and
strictly positive. Models therefore expose ``log_abs_cf`` and the ratio of two
characteristic functions is formed in log space, which keeps quantities like
exp(d s^b) / exp(d s^b) finite far into the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidScenario

AUDIT_GRID = np.linspace(0.0, 100.0, 4001)
_SCAN_GRID = np.concatenate([[0.0], np.logspace(-4, 15, 3801)])


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    SYMMETRIC_GAMMA = "symmetric_gamma"
    EXP_POWER = "exp_power"
    HYPERBOLIC_SECANT = "hyperbolic_secant"
    IDENTITY = "identity"


@dataclass(frozen=True)
class SmoothnessEnvelope:
    """Two-sided decay envelope of |f*(s)|.

    ``c_lower * shape(s) <= |f*(s)| <= c_upper * shape(s)`` with
    ``shape(s) = (s^2 + 1)^(-poly_exp/2) * exp(-exp_scale * |s|^exp_exp)``.
    """

    c_lower: float
    c_upper: float
    poly_exp: float
    exp_exp: float
    exp_scale: float
    exempt: bool = False

    def __post_init__(self):
        if not (self.c_lower > 0 and self.c_upper > 0):
            raise InvalidScenario("envelope constants must be positive", c_lower=self.c_lower,
                                  c_upper=self.c_upper)
        if self.c_lower > self.c_upper * (1 + 1e-12):
            raise InvalidScenario("c_lower exceeds c_upper", c_lower=self.c_lower,
                                  c_upper=self.c_upper)
        if min(self.poly_exp, self.exp_exp, self.exp_scale) < 0:
            raise InvalidScenario("envelope exponents must be nonnegative")
        if (self.exp_exp == 0) != (self.exp_scale == 0):
            raise InvalidScenario("exp_exp = 0 must hold exactly when exp_scale = 0",
                                  exp_exp=self.exp_exp, exp_scale=self.exp_scale)
        if self.exp_scale == 0 and self.poly_exp <= 0 and not self.exempt:
            raise InvalidScenario("poly_exp must be positive when exp_scale = 0")

    def log_shape(self, s) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=float))
        out = -0.5 * self.poly_exp * np.log1p(s * s)
        if self.exp_scale > 0:
            out = out - self.exp_scale * s**self.exp_exp
        return out

    def shape(self, s) -> np.ndarray:
        return np.exp(self.log_shape(s))


@dataclass(frozen=True)
class CharacteristicModel:
    """A symmetric density family with a closed-form characteristic function.

    ``scale`` is the family's scale parameter; ``shape`` is the gamma order for
    ``symmetric_gamma`` and the exponent (0, 2] for ``exp_power``.
    """

    family: Family
    scale: float = 1.0
    shape: float | None = None
    envelope: SmoothnessEnvelope = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.IDENTITY:
            object.__setattr__(self, "envelope", SmoothnessEnvelope(1.0, 1.0, 0.0, 0.0, 0.0,
                                                                    exempt=True))
            return
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidScenario("scale must be a positive finite number", scale=self.scale)
        if self.family is Family.SYMMETRIC_GAMMA and not (self.shape and self.shape > 0):
            raise InvalidScenario("symmetric_gamma needs a positive order", order=self.shape)
        if self.family is Family.EXP_POWER and not (self.shape and 0 < self.shape <= 2):
            raise InvalidScenario("exp_power exponent must lie in (0, 2]", exponent=self.shape)
        a, b, d = self._exponents()
        probe = SmoothnessEnvelope(1.0, 1.0, a, b, d)
        log_ratio = self.log_abs_cf(AUDIT_GRID) - probe.log_shape(AUDIT_GRID)
        object.__setattr__(self, "envelope", SmoothnessEnvelope(
            float(np.exp(log_ratio.min())), float(np.exp(log_ratio.max())), a, b, d))

    # constructors -----------------------------------------------------------
    @classmethod
    def gaussian(cls, scale: float = 1.0) -> "CharacteristicModel":
        return cls(Family.GAUSSIAN, scale)

    @classmethod
    def laplace(cls, scale: float = 1.0) -> "CharacteristicModel":
        return cls(Family.LAPLACE, scale)

    @classmethod
    def symmetric_gamma(cls, scale: float = 1.0, order: float = 1.0) -> "CharacteristicModel":
        return cls(Family.SYMMETRIC_GAMMA, scale, order)

    @classmethod
    def exp_power(cls, scale: float = 1.0, exponent: float = 1.0) -> "CharacteristicModel":
        return cls(Family.EXP_POWER, scale, exponent)

    @classmethod
    def hyperbolic_secant(cls, scale: float = 1.0) -> "CharacteristicModel":
        return cls(Family.HYPERBOLIC_SECANT, scale)

    @classmethod
    def identity(cls) -> "CharacteristicModel":
        return cls(Family.IDENTITY)

    @classmethod
    def from_params(cls, family: str, params: dict) -> "CharacteristicModel":
        family = Family(family)
        if family is Family.IDENTITY:
            return cls.identity()
        scale = params.get("scale", 1.0)
        if family is Family.SYMMETRIC_GAMMA:
            return cls.symmetric_gamma(scale, params.get("order", 1.0))
        if family is Family.EXP_POWER:
            return cls.exp_power(scale, params.get("exponent", 1.0))
        return cls(family, scale)

    def params(self) -> dict:
        if self.family is Family.IDENTITY:
            return {}
        out = {"scale": self.scale}
        if self.family is Family.SYMMETRIC_GAMMA:
            out["order"] = self.shape
        elif self.family is Family.EXP_POWER:
            out["exponent"] = self.shape
        return out

    def _exponents(self) -> tuple[float, float, float]:
        f = self.family
        if f is Family.GAUSSIAN:
            return 0.0, 2.0, 0.5 * self.scale**2
        if f is Family.LAPLACE:
            return 2.0, 0.0, 0.0
        if f is Family.SYMMETRIC_GAMMA:
            return 2.0 * self.shape, 0.0, 0.0
        if f is Family.EXP_POWER:
            return 0.0, float(self.shape), float(self.scale)
        if f is Family.HYPERBOLIC_SECANT:
            return 0.0, 1.0, float(self.scale)
        return 0.0, 0.0, 0.0

    # spectral side ----------------------------------------------------------
    def log_abs_cf(self, s) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=float))
        f, v = self.family, self.scale
        if f is Family.GAUSSIAN:
            return -0.5 * (v * s) ** 2
        if f is Family.LAPLACE:
            return -np.log1p((v * s) ** 2)
        if f is Family.SYMMETRIC_GAMMA:
            return -self.shape * np.log1p((v * s) ** 2)
        if f is Family.EXP_POWER:
            return -v * s**self.shape
        if f is Family.HYPERBOLIC_SECANT:
            # -log cosh(t) without overflow
            t = v * s
            return math.log(2.0) - t - np.log1p(np.exp(-2 * t))
        return np.zeros_like(s)

    def cf(self, s) -> np.ndarray:
        """Characteristic function; real-valued for every shipped family."""
        return np.exp(self.log_abs_cf(s))

    # sample side ------------------------------------------------------------
    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        f, v = self.family, self.scale
        if f is Family.GAUSSIAN:
            return stats.norm.pdf(x, scale=v)
        if f is Family.LAPLACE:
            return np.exp(-np.abs(x) / v) / (2 * v)
        if f is Family.SYMMETRIC_GAMMA:
            p, ax = self.shape, np.abs(x)
            nu = p - 0.5
            with np.errstate(divide="ignore", invalid="ignore"):
                body = (ax / (2 * v)) ** nu * special.kv(nu, ax / v)
            at_zero = special.gamma(nu) / 2 if nu > 0 else np.inf
            body = np.where(ax == 0, at_zero, body)
            return body / (v * math.sqrt(math.pi) * special.gamma(p))
        if f is Family.EXP_POWER:
            r = self.shape
            if r == 2:
                return stats.norm.pdf(x, scale=math.sqrt(2 * v))
            if r == 1:
                return stats.cauchy.pdf(x, scale=v)
            return stats.levy_stable.pdf(x, r, 0.0, scale=v ** (1 / r))
        if f is Family.HYPERBOLIC_SECANT:
            # (2v)^-1 sech(pi x / 2v), written without overflow
            y = 0.5 * math.pi * np.abs(x) / v
            return np.exp(-y) / (v * (1 + np.exp(-2 * y)))
        raise ValueError("the identity model is a point mass and has no density")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        f, v = self.family, self.scale
        if f is Family.GAUSSIAN:
            return rng.normal(0.0, v, size)
        if f is Family.LAPLACE:
            return rng.laplace(0.0, v, size)
        if f is Family.SYMMETRIC_GAMMA:
            return rng.gamma(self.shape, v, size) - rng.gamma(self.shape, v, size)
        if f is Family.EXP_POWER:
            return v ** (1 / self.shape) * _symmetric_stable(rng, self.shape, size)
        if f is Family.HYPERBOLIC_SECANT:
            # inverse cdf (2/pi) ln tan(pi u / 2)
            u = rng.uniform(0.0, 1.0, size)
            return v * (2 / math.pi) * np.log(np.tan(0.5 * math.pi * u))
        return np.zeros(size)


def _symmetric_stable(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    # Chambers-Mallows-Stuck, symmetric case; cf exp(-|s|^alpha).
    u = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = rng.standard_exponential(size)
    if alpha == 1:
        return np.tan(u)
    return (np.sin(alpha * u) / np.cos(u) ** (1 / alpha)
            * (np.cos(u - alpha * u) / w) ** ((1 - alpha) / alpha))


def cf_eval(model: CharacteristicModel, s) -> complex | np.ndarray:
    out = model.cf(s).astype(complex)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class SobolevSpec:
    k: float
    B: float

    def __post_init__(self):
        if not (self.k > 0 and self.B > 0):
            raise InvalidScenario("Sobolev parameters must be positive", k=self.k, B=self.B)


@dataclass(frozen=True)
class Scenario:
    """One problem instance: Y = X + xi observed, W = X + sigma * eta targeted."""

    n: int
    sigma: float
    x_model: CharacteristicModel
    xi_model: CharacteristicModel
    g_model: CharacteristicModel
    sobolev: SobolevSpec

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidScenario("n must be a positive integer", n=self.n)
        object.__setattr__(self, "n", int(self.n))
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidScenario("sigma must be positive", sigma=self.sigma)
        xi, g = self.xi_model.envelope, self.g_model.envelope
        if xi.exp_scale > 0 and g.exp_scale > 0:
            limit = 0.5 * (xi.exp_scale / g.exp_scale) ** (1 / xi.exp_exp)
            if not self.sigma < limit:
                raise InvalidScenario("sigma violates the small-sigma condition",
                                      sigma=self.sigma, limit=limit)
        norm_sq = sobolev_norm_sq(self.x_model, self.sobolev.k)
        if not norm_sq <= self.sobolev.B**2 * (1 + 1e-6):
            raise InvalidScenario("x_model lies outside the Sobolev ball",
                                  norm_sq=norm_sq, B_sq=self.sobolev.B**2, k=self.sobolev.k)

    @property
    def xi_env(self) -> SmoothnessEnvelope:
        return self.xi_model.envelope

    @property
    def g_env(self) -> SmoothnessEnvelope:
        return self.g_model.envelope

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def log_ratio(self, s) -> np.ndarray:
        """log |g*(sigma s) / f_xi*(s)|, exact."""
        return self.g_model.log_abs_cf(self.sigma * np.asarray(s, float)) - self.xi_model.log_abs_cf(s)

    def ratio_envelope_log(self, s) -> np.ndarray:
        """log of the unit-constant envelope of |g*(sigma s) / f_xi*(s)|."""
        return self.g_env.log_shape(self.sigma * np.asarray(s, float)) - self.xi_env.log_shape(s)


# ---------------------------------------------------------------------------
# spectral integrals
# ---------------------------------------------------------------------------

def decay_cutoff(log_f: Callable[[np.ndarray], np.ndarray], rel: float) -> float:
    """Smallest scanned s beyond which log_f stays below max(log_f) + ln(rel).

    Returns ``inf`` if the function is still above the level at s = 1e15.
    """
    vals = np.asarray(log_f(_SCAN_GRID), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    level = vals.max() + math.log(rel)
    above = np.nonzero(vals >= level)[0]
    last = above[-1]
    if last == len(_SCAN_GRID) - 1:
        return math.inf
    return float(_SCAN_GRID[last + 1])


def _integrate_half_line(f: Callable[[float], float], upper: float) -> float:
    """int_0^upper f, over geometric panels so peaks at any scale are resolved."""
    top = upper if math.isfinite(upper) else 1e6
    edges = np.concatenate([[0.0], top * np.geomspace(1e-8, 1.0, 49)])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, lo, hi, limit=200, epsabs=0.0, epsrel=1e-11)[0]
    if not math.isfinite(upper) and f(top) > 0:
        # s = 1/t maps a polynomial tail onto a smooth integrand near t = 0
        total += integrate.quad(lambda t: f(1 / t) / (t * t), 0.0, 1 / top, limit=200,
                                epsabs=0.0, epsrel=1e-11)[0]
    return total


def rho_finiteness(xi_env: SmoothnessEnvelope, g_env: SmoothnessEnvelope,
                   sigma: float) -> tuple[bool, str]:
    """Decide finiteness of int |g*(sigma w)/f_xi*(w)|^2 dw from the exponents alone."""
    a, b, d = xi_env.poly_exp, xi_env.exp_exp, xi_env.exp_scale
    alpha, beta, gamma = g_env.poly_exp, g_env.exp_exp, g_env.exp_scale
    if beta > b:
        return True, f"exp(-2 gamma sigma^beta |w|^beta) dominates exp(2 d |w|^b) (beta={beta} > b={b})"
    if beta == b == 0:
        if 2 * (alpha - a) > 1:
            return True, f"polynomial tail |w|^{2 * (a - alpha):g} is integrable"
        return False, f"polynomial tail |w|^{2 * (a - alpha):g} is not integrable (2(alpha-a) <= 1)"
    if beta == b:
        if gamma * sigma**b > d:
            return True, "gamma sigma^b > d: exponential decay"
        return False, f"b = beta = {b} with gamma sigma^b <= d: exponential growth"
    return False, f"exp(2 d |w|^b) outgrows the Berkson factor (b={b} > beta={beta})"


def rho_squared(scenario: Scenario) -> float:
    """rho^2(sigma) = int |g*(sigma w)/f_xi*(w)|^2 dw, or ``inf`` when divergent."""
    finite, _ = rho_finiteness(scenario.xi_env, scenario.g_env, scenario.sigma)
    if not finite:
        return math.inf
    log_f = lambda s: 2 * scenario.log_ratio(s)  # noqa: E731
    upper = decay_cutoff(log_f, 1e-12)
    return 2 * _integrate_half_line(lambda s: math.exp(float(log_f(s))), upper)


@lru_cache(maxsize=256)
def sobolev_norm_sq(model: CharacteristicModel, k: float) -> float:
    """int |f*(s)|^2 (s^2+1)^k ds, ``inf`` when the tail exponent diverges."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    env = model.envelope
    if model.family is Family.IDENTITY:
        return math.inf
    if env.exp_scale == 0 and 2 * env.poly_exp - 2 * k <= 1:
        return math.inf
    f = lambda s: math.exp(2 * float(model.log_abs_cf(s)) + k * math.log1p(s * s))  # noqa: E731
    return 2 * _integrate_half_line(f, math.inf)
