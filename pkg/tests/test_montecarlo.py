import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from berkson_deconv.bandwidth import optimal_bandwidth
from berkson_deconv.config import load_config
from berkson_deconv.errors import GridError, TruncationError
from berkson_deconv.estimator import GridSpec
from berkson_deconv.montecarlo import (CSV_HEADER, RateStudyError, fit_rate, lag1_autocorrelation,
                                       mc_mise, rate_study, resolve_h, sample_y, scenario_at)
from berkson_deconv.scenarios import case_iv_scenario
from berkson_deconv.spectral import CharacteristicModel as CM

from conftest import make_scenario

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
GRID = GridSpec()


def test_samples_are_reproducible_and_keyed():
    sc = case_iv_scenario(1000, 0.3)
    a = sample_y(sc, 42, 7)
    np.testing.assert_array_equal(a, sample_y(sc, 42, 7))
    assert not np.array_equal(a, sample_y(sc, 42, 8))
    assert not np.array_equal(a, sample_y(sc, 43, 7))


def test_samples_frozen_values():
    # pins the stream layout: any change to keys or counters shows up here
    sc = make_scenario(CM.identity(), CM.gaussian(1.0), 0.5, n=3, x=CM.gaussian(1.0))
    x = np.random.Generator(np.random.Philox(counter=[0, 0, 0, 0], key=[5, 2])).normal(0, 1, 3)
    np.testing.assert_array_equal(sample_y(sc, 5, 2), x)


def test_identity_blur_returns_x_draws():
    base = make_scenario(CM.laplace(1.0), CM.gaussian(1.0), 0.5, n=500)
    ident = base.replace(xi_model=CM.identity())
    y_id = sample_y(ident, 3, 0)
    y = sample_y(base, 3, 0)
    # the X stream is shared, so the difference is exactly the xi draw
    xi = y - y_id
    assert np.all(xi != 0)
    assert np.var(xi) == pytest.approx(2.0, rel=0.2)


def test_gaussian_sum_variance():
    sc = make_scenario(CM.gaussian(1.0), CM.gaussian(1.0), 0.3, n=100_000, x=CM.gaussian(1.0))
    y = sample_y(sc, 1, 0)
    # var of the sample variance of N(0, 2) is 2 * 2^2 / (n - 1)
    assert abs(np.var(y, ddof=1) - 2.0) < 3 * math.sqrt(8 / (y.size - 1))


def test_seed_must_be_u64():
    sc = case_iv_scenario(10, 0.3)
    with pytest.raises(ValueError):
        sample_y(sc, -1, 0)
    with pytest.raises(ValueError):
        sample_y(sc, 2**64, 0)


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_scenarios_fit_the_default_grid(path):
    cfg = load_config(path)
    base = cfg.scenario()
    scs = [base] if cfg.n_list is None else [scenario_at(base, n, cfg.sigma_mode)
                                               for n in cfg.n_list]
    for sc in scs:
        c = sc.x_model.scale

        def sf(t):
            return 0.5 * math.exp(-t / c) if t >= 0 else 1 - 0.5 * math.exp(t / c)

        def outside(e):
            return float(sc.g_model.pdf(e)) * (sf(12 - sc.sigma * e) + sf(12 + sc.sigma * e))

        assert integrate.quad(outside, -math.inf, math.inf, limit=400)[0] < 1e-6


# --- mc_mise -----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small():
    return case_iv_scenario(300, 0.3)


def test_mc_mise_thread_independent(small):
    a = mc_mise(small, 0.3, GRID, 8, 11, threads=1)
    b = mc_mise(small, 0.3, GRID, 8, 11, threads=3)
    assert a == b
    assert a.ise_values == b.ise_values
    assert a.csv_row() == b.csv_row()


def test_repeated_index_gives_zero_spread(small):
    m = mc_mise(small, 0.3, GRID, 2, 5, rep_indices=[0, 0])
    assert m.std_error == 0.0
    assert m.ise_values[0] == m.ise_values[1]


def test_reps_at_least_two(small):
    with pytest.raises(ValueError):
        mc_mise(small, 0.3, GRID, 1, 0)


def test_doubling_reps_is_stable(small):
    a = mc_mise(small, 0.3, GRID, 40, 2)
    b = mc_mise(small, 0.3, GRID, 80, 2)
    assert abs(a.mean_ise - b.mean_ise) < 3 * math.hypot(a.std_error, b.std_error)
    assert b.ise_values[:40] == a.ise_values


def test_replications_uncorrelated(small):
    m = mc_mise(small, 0.3, GRID, 64, 9)
    assert abs(lag1_autocorrelation(m.ise_values)) < 4 / math.sqrt(64)


def test_mise_errors_propagate(small):
    with pytest.raises(TruncationError):
        mc_mise(small, 1e-7, GRID, 2, 0)
    with pytest.raises(GridError):
        mc_mise(small, 0.3, GridSpec(x_min=-1.0, x_max=1.0), 2, 0)


@pytest.mark.slow
def test_mise_drops_with_n():
    sig = 0.05
    lo = case_iv_scenario(1000, sig)
    hi = case_iv_scenario(100_000, sig)
    a = mc_mise(lo, optimal_bandwidth(lo).h_opt, GRID, 20, 4)
    b = mc_mise(hi, optimal_bandwidth(hi).h_opt, GRID, 20, 4)
    assert a.mean_ise - b.mean_ise > 2 * math.hypot(a.std_error, b.std_error)


def test_csv_row_layout(small):
    m = mc_mise(small, 0.25, GRID, 2, 3)
    fields = m.csv_row().split(",")
    assert len(fields) == len(CSV_HEADER.split(","))
    assert int(fields[0]) == 300 and float(fields[1]) == 0.25
    assert float(fields[2]) == m.mean_ise


# --- rate fits ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(mag=st.floats(0.01, 3), sign=st.sampled_from([-1, 1]), c=st.floats(-5, 5))
def test_fit_rate_recovers_power_law(mag, sign, c):
    # r^2 is ill-conditioned once the ordinates differ only by rounding, so |slope| >= 0.01
    slope = sign * mag
    pts = [(math.log(n), slope * math.log(n) + c) for n in (2**10, 2**12, 2**14, 2**16)]
    fit = fit_rate(pts)
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(c, abs=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_rate_residual_identity():
    rng = np.random.default_rng(4)
    u = np.log([1e3, 1e4, 1e5, 1e6])
    v = -0.5 * u + rng.normal(0, 0.1, 4)
    fit = fit_rate(zip(u, v))
    resid = v - (fit.intercept + fit.slope * u)
    assert abs(resid.sum()) < 1e-10
    assert abs(np.dot(resid, u)) < 1e-9
    assert fit.r_squared == pytest.approx(1 - resid @ resid / np.sum((v - v.mean()) ** 2))


def test_fit_rate_needs_three_points():
    with pytest.raises(ValueError):
        fit_rate([(1, 1), (2, 2)])


def test_scenario_at_modes():
    t = case_iv_scenario(10, 0.5)
    assert scenario_at(t, 1000).sigma == 0.5
    assert scenario_at(t, 1000, "threshold").sigma == pytest.approx(0.5 * 1000 ** (-1 / 7))
    with pytest.raises(ValueError):
        scenario_at(t, 1000, "sometimes")


def test_resolve_h():
    sc = case_iv_scenario(10**4, 0.5)
    assert resolve_h(sc, "zero") == 0.0
    assert resolve_h(sc, "oracle") == optimal_bandwidth(sc).h_opt
    assert resolve_h(sc, 0.2) == 0.2
    with pytest.raises(ValueError):
        resolve_h(sc, -1.0)


def test_rate_study_small():
    study = rate_study(case_iv_scenario(1, 0.5), [200, 400, 800], 0.3, 4, 1)
    assert [r.n for r in study.rows] == [200, 400, 800]
    assert study.fit.points[0] == (math.log(200), math.log(study.rows[0].mean_ise))


def test_rate_study_partial_results():
    # oracle h = n^(-1/7); the band 1/h passes the limit s_max * 1e3 = 5 only for small n
    t = case_iv_scenario(1, 0.01)
    with pytest.raises(RateStudyError) as info:
        rate_study(t, [100, 1000, 10**6], "oracle", 2, 1, grid=GridSpec(s_max=0.005))
    assert info.value.exit_code == 3
    assert [r.n for r in info.value.partial] == [100, 1000]


@pytest.mark.slow
def test_zero_loses_to_oracle_below_threshold():
    t = case_iv_scenario(1, 0.5)
    n_list = [2**10, 2**12, 2**14]
    zero = rate_study(t, n_list, "zero", 20, 7, sigma_mode="threshold")
    oracle = rate_study(t, n_list, "oracle", 20, 7, sigma_mode="threshold")
    assert zero.rows[-1].mean_ise > oracle.rows[-1].mean_ise
