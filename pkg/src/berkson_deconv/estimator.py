"""Empirical characteristic function, deconvolution estimators and the target density."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import integrate

from .errors import AdmissibilityError, GridError, NumericError, TruncationError
from .risk import classify_case
from .spectral import CharacteristicModel, Scenario, decay_cutoff, rho_finiteness

H0_ENVELOPE_REL = 1e-10
TRUE_FW_REL = 1e-14
IMAG_TOL = 1e-8
_ECF_CHUNK = 2048


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -12.0
    x_max: float = 12.0
    x_points: int = 1024
    s_max: float = 100.0
    s_points: int = 256

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise GridError("x_min must be below x_max", x_min=self.x_min, x_max=self.x_max)
        if int(self.x_points) != self.x_points or self.x_points < 16:
            raise GridError("x_points must be an integer >= 16", x_points=self.x_points)
        if int(self.s_points) != self.s_points or self.s_points < 64:
            raise GridError("s_points must be an integer >= 64", s_points=self.s_points)
        if not self.s_max > 0:
            raise GridError("s_max must be positive", s_max=self.s_max)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.x_points))

    @property
    def s_step_cap(self) -> float:
        """Largest s-step keeping the e^{-isx} phase change per step below pi/4."""
        return math.pi / (4 * max(abs(self.x_min), abs(self.x_max)))


@dataclass(frozen=True)
class DensityEstimate:
    grid: GridSpec
    values: np.ndarray
    h: float
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.grid.x_points,):
            raise GridError("values do not match the grid", shape=self.values.shape)
        if not np.all(np.isfinite(self.values)):
            raise NumericError("density values are not finite")

    def to_csv(self) -> str:
        lines = ["x,value"]
        lines += [f"{x:.17g},{v:.17g}" for x, v in zip(self.grid.x, self.values)]
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def ecf(samples, s):
    """n^-1 sum_j exp(i s Y_j), for scalar or array s."""
    y = np.asarray(samples, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("ecf needs a nonempty sample")
    s_arr = np.asarray(s, dtype=float)
    out = _ecf_vector(y, s_arr.ravel()).reshape(s_arr.shape)
    return complex(out) if out.ndim == 0 else out


def _ecf_vector(y: np.ndarray, s: np.ndarray) -> np.ndarray:
    # fixed chunking and chunk-ordered accumulation keep the sum order reproducible
    re = np.zeros(s.size)
    im = np.zeros(s.size)
    for start in range(0, y.size, _ECF_CHUNK):
        arg = np.multiply.outer(y[start:start + _ECF_CHUNK], s)
        re += np.cos(arg).sum(axis=0)
        im += np.sin(arg).sum(axis=0)
    return (re + 1j * im) / y.size


# ---------------------------------------------------------------------------
# target density
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _true_fw_values(x_model: CharacteristicModel, g_model: CharacteristicModel,
                    sigma: float, grid: GridSpec) -> np.ndarray:
    def log_phi(s):
        return x_model.log_abs_cf(s) + g_model.log_abs_cf(sigma * np.asarray(s, float))

    def phi(s):
        return float(np.exp(log_phi(s)))

    top = min(decay_cutoff(log_phi, TRUE_FW_REL), 1e8)
    tail = phi(top) * top > 1e-12
    uniq, inverse = np.unique(np.abs(grid.x), return_inverse=True)
    vals = np.empty(uniq.size)
    for i, xi in enumerate(uniq):
        if xi == 0.0:
            v = integrate.quad(phi, 0, top, limit=2000, epsabs=1e-13)[0]
            if tail:
                v += integrate.quad(phi, top, math.inf, limit=500, epsabs=1e-13)[0]
        else:
            # oscillatory-weight quadrature: cos(x s) is integrated exactly per panel
            v = integrate.quad(phi, 0, top, weight="cos", wvar=xi, limit=2000, epsabs=1e-13)[0]
            if tail:
                v += integrate.quad(phi, top, math.inf, weight="cos", wvar=xi, limlst=200,
                                    epsabs=1e-13)[0]
        vals[i] = v / math.pi
    return vals[inverse]


def true_fw(scenario: Scenario, grid: GridSpec) -> DensityEstimate:
    """f_W on the grid, by inverting f_X*(s) g*(sigma s); checks it integrates to 1."""
    values = _true_fw_values(scenario.x_model, scenario.g_model, scenario.sigma, grid).copy()
    mass = float(integrate.trapezoid(values, grid.x))
    if abs(mass - 1) > 1e-3:
        raise GridError("grid too narrow or coarse: target density mass off by more than 1e-3",
                        mass=mass, x_min=grid.x_min, x_max=grid.x_max, x_points=grid.x_points)
    return DensityEstimate(grid, values, 0.0,
                           {"kind": "true_fw", "sigma": scenario.sigma, "mass": mass})


# ---------------------------------------------------------------------------
# deconvolution estimator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InversionPlan:
    """Precomputed frequency nodes and inversion matrix for one (scenario, h, grid)."""

    grid: GridSpec
    h: float
    s_half: np.ndarray      # nodes 0, ds, ..., S
    kernel: np.ndarray      # x_points x (2M+1): weight * ratio(s) * e^{-isx} / (2 pi)
    band: float
    meta: dict[str, Any]

    def apply(self, ecf_half: np.ndarray) -> np.ndarray:
        full = np.concatenate([np.conj(ecf_half[:0:-1]), ecf_half])
        vals = self.kernel @ full
        residue = float(np.max(np.abs(vals.imag)))
        if residue > IMAG_TOL:
            raise NumericError("imaginary residue of the inversion exceeds tolerance",
                               residue=residue, tol=IMAG_TOL)
        return vals.real.copy()


def inversion_band(scenario: Scenario, h: float, grid: GridSpec) -> tuple[float, str]:
    """Upper frequency of the inversion integral and the rule that set it."""
    if h < 0 or not math.isfinite(h):
        raise ValueError("h must be a finite nonnegative number")
    limit = grid.s_max * 1e3
    if h > 0:
        band, rule = 1 / h, "sinc band 1/h"
    else:
        finite, reason = rho_finiteness(scenario.xi_env, scenario.g_env, scenario.sigma)
        if not finite:
            case = classify_case(scenario.xi_env, scenario.g_env)
            raise AdmissibilityError(f"h = 0 refused: rho^2 is infinite ({reason})",
                                     case=case.value)
        band = decay_cutoff(scenario.ratio_envelope_log, H0_ENVELOPE_REL)
        rule = f"envelope of |g*(sigma s)/f_xi*(s)| below {H0_ENVELOPE_REL:g} of its maximum"
    if not band <= limit:
        raise TruncationError("inversion band exceeds s_max * 1e3", band=band, limit=limit, h=h)
    return band, rule


def make_plan(scenario: Scenario, h: float, grid: GridSpec) -> InversionPlan:
    band, rule = inversion_band(scenario, h, grid)
    m = max(math.ceil(grid.s_points / 2), math.ceil(band / grid.s_step_cap))
    ds = band / m
    s_half = ds * np.arange(m + 1)
    s = np.concatenate([-s_half[:0:-1], s_half])
    w = np.full(s.size, ds)
    w[0] = w[-1] = ds / 2
    ratio = (scenario.g_model.cf(scenario.sigma * s) / scenario.xi_model.cf(s)).astype(complex)
    kernel = np.exp(-1j * np.multiply.outer(grid.x, s)) * (w * ratio / (2 * math.pi))
    meta = {"sigma": scenario.sigma, "n": scenario.n, "band": band, "band_rule": rule,
            "s_nodes": int(s.size), "s_step": ds}
    return InversionPlan(grid, float(h), s_half, kernel, band, meta)


def estimate(samples, scenario: Scenario, h: float, grid: GridSpec,
             plan: InversionPlan | None = None, clip: bool = False) -> DensityEstimate:
    """Deconvolution estimate of f_W: sinc kernel of bandwidth h, or direct when h = 0.

    ``clip`` zeroes negative values afterwards; it is off by default since the
    risk theory concerns the raw estimator.
    """
    if plan is None:
        plan = make_plan(scenario, h, grid)
    elif plan.h != h or plan.grid != grid:
        raise ValueError("plan was built for a different h or grid")
    y = np.asarray(samples, dtype=float).ravel()
    values = plan.apply(ecf(y, plan.s_half))
    if clip:
        values = np.maximum(values, 0.0)
    meta = dict(plan.meta, n_samples=int(y.size), clipped=clip)
    return DensityEstimate(grid, values, float(h), meta)


def ise(a: DensityEstimate, b: DensityEstimate) -> float:
    """Trapezoid integral of (a - b)^2 over the common grid."""
    if a.grid != b.grid:
        raise GridError("ise needs identical grids")
    return float(integrate.trapezoid((a.values - b.values) ** 2, a.grid.x))
