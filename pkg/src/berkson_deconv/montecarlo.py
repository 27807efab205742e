"""Seeded sampling from Y = X + xi, replicated MISE and log-log rate fits."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .bandwidth import optimal_bandwidth, threshold
from .errors import DeconvError
from .estimator import GridSpec, estimate, ise, make_plan, true_fw
from .spectral import Family, Scenario

X_STREAM, XI_STREAM = 0, 1
CSV_HEADER = "n,h,mean_ise,std_error,reps,seed"


def _stream(seed: int, rep_index: int, stream: int) -> np.random.Generator:
    # Philox: key = (seed, rep_index); the counter's high word separates the X and xi streams
    key = np.array([seed, rep_index], dtype=np.uint64)
    counter = np.array([0, 0, 0, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def sample_y(scenario: Scenario, seed: int, rep_index: int) -> np.ndarray:
    """n draws of X + xi from counter-based streams keyed by (seed, rep_index)."""
    seed = _check_seed(seed)
    x = scenario.x_model.sample(_stream(seed, rep_index, X_STREAM), scenario.n)
    if scenario.xi_model.family is Family.IDENTITY:
        return x
    return x + scenario.xi_model.sample(_stream(seed, rep_index, XI_STREAM), scenario.n)


@dataclass(frozen=True)
class MiseEstimate:
    mean_ise: float
    std_error: float
    reps: int
    seed: int
    h: float
    n: int = 0
    ise_values: tuple[float, ...] = field(default=(), repr=False)

    def csv_row(self) -> str:
        return (f"{self.n},{self.h:.17g},{self.mean_ise:.17g},{self.std_error:.17g},"
                f"{self.reps},{self.seed}")


def default_threads() -> int:
    return os.cpu_count() or 1


def mc_mise(scenario: Scenario, h: float, grid: GridSpec, reps: int, seed: int,
            threads: int | None = None, rep_indices: Sequence[int] | None = None) -> MiseEstimate:
    """Average ISE of the estimate against f_W over independent replications.

    ``rep_indices`` overrides the default stream indices 0..reps-1.
    Results do not depend on ``threads``: replications are reduced in index order.
    """
    seed = _check_seed(seed)
    indices = list(range(reps)) if rep_indices is None else [int(i) for i in rep_indices]
    if len(indices) < 2:
        raise ValueError("mc_mise needs at least 2 replications")
    target = true_fw(scenario, grid)
    plan = make_plan(scenario, h, grid)

    def one(rep_index: int) -> float:
        est = estimate(sample_y(scenario, seed, rep_index), scenario, h, grid, plan=plan)
        return ise(est, target)

    workers = max(1, threads or default_threads())
    if workers == 1:
        values = [one(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, indices))
    arr = np.array(values)
    mean = math.fsum(values) / arr.size
    std_error = float(np.sqrt(math.fsum((arr - mean) ** 2) / (arr.size - 1) / arr.size))
    return MiseEstimate(mean, std_error, arr.size, seed, float(h), scenario.n, tuple(values))


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "points": [list(p) for p in self.points]}


def fit_rate(points: Sequence[tuple[float, float]]) -> RateFit:
    """Ordinary least squares of the second coordinate on the first."""
    pts = tuple((float(u), float(v)) for u, v in points)
    if len(pts) < 3:
        raise ValueError("a rate fit needs at least 3 points")
    u, v = np.array(pts).T
    if np.ptp(u) == 0:
        raise ValueError("rate fit abscissae must not all coincide")
    res = stats.linregress(u, v)
    r2 = 1.0 if np.ptp(v) == 0 else float(min(max(res.rvalue**2, 0.0), 1.0))
    return RateFit(float(res.slope), float(res.intercept), r2, pts)


class RateStudyError(DeconvError):
    """A Monte Carlo run failed mid-study; ``partial`` holds the finished rows."""

    def __init__(self, cause: DeconvError, partial: list[MiseEstimate]):
        super().__init__(f"rate study aborted: {cause.message}", **cause.context)
        self.exit_code, self.code = cause.exit_code, cause.code
        self.partial = partial


@dataclass(frozen=True)
class RateStudy:
    rows: tuple[MiseEstimate, ...]
    fit: RateFit


def scenario_at(template: Scenario, n: int, sigma_mode: str = "fixed") -> Scenario:
    """The template at sample size n; in "threshold" mode sigma = template.sigma * threshold(n)."""
    sc = template.replace(n=int(n))
    if sigma_mode == "fixed":
        return sc
    if sigma_mode == "threshold":
        return sc.replace(sigma=template.sigma * threshold(sc))
    raise ValueError(f"unknown sigma_mode {sigma_mode!r}")


def resolve_h(scenario: Scenario, h_rule: str | float) -> float:
    if h_rule == "oracle":
        return optimal_bandwidth(scenario).h_opt
    if h_rule == "zero":
        return 0.0
    h = float(h_rule)
    if not (h >= 0 and math.isfinite(h)):
        raise ValueError("fixed bandwidth must be a finite nonnegative number")
    return h


def rate_study(template: Scenario, n_list: Sequence[int], h_rule: str | float, reps: int,
               seed: int, grid: GridSpec | None = None, sigma_mode: str = "fixed",
               threads: int | None = None) -> RateStudy:
    """mc_mise at each n, then the OLS fit of ln MISE on ln n."""
    if len(n_list) < 3:
        raise ValueError("rate_study needs at least 3 sample sizes")
    grid = grid or GridSpec()
    rows: list[MiseEstimate] = []
    for n in n_list:
        try:
            sc = scenario_at(template, n, sigma_mode)
            rows.append(mc_mise(sc, resolve_h(sc, h_rule), grid, reps, seed, threads))
        except DeconvError as exc:
            raise RateStudyError(exc, rows) from exc
    fit = fit_rate([(math.log(r.n), math.log(r.mean_ise)) for r in rows])
    return RateStudy(tuple(rows), fit)


def lag1_autocorrelation(values: Sequence[float]) -> float:
    v = np.asarray(values, float) - np.mean(values)
    denom = float(np.dot(v, v))
    return 0.0 if denom == 0 else float(np.dot(v[:-1], v[1:]) / denom)
