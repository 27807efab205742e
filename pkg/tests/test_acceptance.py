"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a single PASS/FAIL line (printed immediately and repeated in
the terminal summary), then asserts. Run just this file with

    pytest tests/test_acceptance.py -v -s
"""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from berkson_deconv.bandwidth import default_h_grid, grid_search_bandwidth, optimal_bandwidth
from berkson_deconv.estimator import DensityEstimate, GridSpec, estimate, ise, true_fw
from berkson_deconv.laplace_check import laplace_ratio
from berkson_deconv.montecarlo import fit_rate, mc_mise, rate_study, sample_y
from berkson_deconv.risk import (CaseId, bias_bound, exp_root_asymptotic, log_variance_bound,
                                 solve_exp_eq)
from berkson_deconv.scenarios import case_iv_scenario, case_scenario, scenario_matrix
from berkson_deconv.spectral import CharacteristicModel as CM

from conftest import ACCEPTANCE_LINES, make_scenario

ROOT = Path(__file__).parent.parent
N_LIST = [2**10, 2**12, 2**14, 2**16]
SEED = 20241018
GRID = GridSpec()

pytestmark = pytest.mark.slow


def report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def test_criterion_1_rate_below_threshold():
    study = rate_study(case_iv_scenario(1, 0.5), N_LIST, "oracle", 100, SEED,
                       sigma_mode="threshold")
    target = -2 / 7
    ok = abs(study.fit.slope - target) <= 0.15 and study.fit.r_squared >= 0.9
    report(1, ok, f"case IV below threshold, oracle h: slope {study.fit.slope:.4f} "
                  f"(target {target:.4f} +- 0.15), r^2 {study.fit.r_squared:.4f} (>= 0.9)")


def test_criterion_2_parametric_branch():
    study = rate_study(case_iv_scenario(1, 0.5), N_LIST, "zero", 100, SEED)
    ok = abs(study.fit.slope + 1) <= 0.2
    report(2, ok, f"case IV sigma = 0.5, h = 0: slope {study.fit.slope:.4f} (target -1 +- 0.2)")


def test_criterion_3_sigma_scaling():
    sigmas = [0.8, 0.4, 0.2, 0.1]
    rows = [mc_mise(case_iv_scenario(2**14, s), 0.0, GRID, 200, SEED) for s in sigmas]
    fit = fit_rate([(math.log(s), math.log(r.mean_ise)) for s, r in zip(sigmas, rows)])
    ok = abs(fit.slope + 5) <= 1.0
    report(3, ok, f"h = 0, n = 2^14: slope of ln MISE on ln sigma {fit.slope:.4f} "
                  f"(target -5 +- 1)")


def _paired(sigma: float, n: int):
    sc = case_iv_scenario(n, sigma)
    zero = mc_mise(sc, 0.0, GRID, 100, SEED)
    banded = mc_mise(sc, 2 * n ** (-1 / 7), GRID, 100, SEED)
    return zero, banded, math.hypot(zero.std_error, banded.std_error)


def test_criterion_4_threshold_phenomenon():
    n = N_LIST[-1]
    z_hi, b_hi, se_hi = _paired(0.5, n)
    z_lo, b_lo, se_lo = _paired(0.5 * n ** (-1 / 7), n)
    above_ok = b_hi.mean_ise - z_hi.mean_ise > 2 * se_hi
    below_ok = z_lo.mean_ise - b_lo.mean_ise > 2 * se_lo
    report(4, above_ok and below_ok,
           f"n = 2^16; above (sigma 0.5): h=0 {z_hi.mean_ise:.3e} vs banded {b_hi.mean_ise:.3e} "
           f"(2 se {2 * se_hi:.1e}); below (sigma {0.5 * n ** (-1 / 7):.4f}): h=0 "
           f"{z_lo.mean_ise:.3e} vs banded {b_lo.mean_ise:.3e} (2 se {2 * se_lo:.1e})")


def test_criterion_5_oracle_vs_search():
    worst, bad = 1.0, []
    for case, regime, sc in scenario_matrix():
        dec = optimal_bandwidth(sc)
        h_star, _ = grid_search_bandwidth(sc, default_h_grid(sc))
        if (dec.h_opt == 0.0) != (h_star == 0.0):
            bad.append(f"{case.value}/{regime}: zero mismatch")
        elif h_star > 0:
            r = max(h_star / dec.h_opt, dec.h_opt / h_star)
            worst = max(worst, r)
            if r > 3:
                bad.append(f"{case.value}/{regime}: factor {r:.2f}")
    report(5, not bad, f"24 scenarios, worst bandwidth factor {worst:.3f} (<= 3)"
                       + (f"; failures: {', '.join(bad)}" if bad else ""))


def test_criterion_6_bound_shapes():
    hs = np.concatenate([[0.0], np.geomspace(1e-4, 1.0, 200)])
    shape_bad = []
    for case, regime, sc in scenario_matrix():
        bias = [bias_bound(sc, h) for h in hs]
        logv = []
        for h in hs:
            try:
                logv.append(log_variance_bound(sc, h)[0])
            except Exception:
                continue
        if np.any(np.diff(bias) < 0):
            shape_bad.append(f"{case.value}/{regime} bias")
        if np.any(np.diff(logv) > 1e-12):
            shape_bad.append(f"{case.value}/{regime} variance")
    sweep_bad = {}
    sweep_range = {}
    for case in (CaseId.V, CaseId.VI, CaseId.VII, CaseId.VIII):
        ratios = []
        for sigma in np.geomspace(0.02, 0.3, 8):
            sc = case_scenario(case, sigma)
            for h in np.geomspace(0.01, 0.8, 8):
                ratios.append(math.exp(laplace_ratio(sc, h)["log_ratio"]))
        ratios = np.array(ratios)
        sweep_range[case.value] = (ratios.min(), ratios.max())
        n_out = int(np.sum((ratios < 0.1) | (ratios > 10)))
        if n_out:
            sweep_bad[case.value] = n_out
    ranges = "; ".join(f"{c} [{lo:.2g}, {hi:.2g}]" for c, (lo, hi) in sweep_range.items())
    detail = (f"monotonicity violations: {shape_bad or 'none'}; "
              f"table/saddle-point ratio ranges: {ranges}; "
              f"outside [0.1, 10]: {sweep_bad or 'none'}")
    report(6, not shape_bad and not sweep_bad, detail)


def test_criterion_7_exponential_equation():
    worst = 0.0
    monotone = True
    for z in (0.0, 1.0, 2.0, 3.5):
        errs = []
        for n in (1e4, 1e6, 1e8, 1e12):
            m = solve_exp_eq(z, n)
            worst = max(worst, abs(math.exp(m) * m**z - n) / n)
            errs.append(abs(exp_root_asymptotic(z, n) - m) / m)
        # z = 0: the asymptotic root is exact, so the error sequence is identically zero
        if z > 0:
            monotone &= all(b < a for a, b in zip(errs, errs[1:]))
    report(7, worst < 1e-9 and monotone,
           f"max relative residual {worst:.2e} (< 1e-9); asymptotic error strictly "
           f"decreasing in n: {monotone}")


def test_criterion_8_estimator_correctness():
    sc = make_scenario(CM.identity(), CM.gaussian(1.0), 0.5, n=500)
    y = sample_y(sc, SEED, 0)
    est = estimate(y, sc, 0.0, GRID)
    ref = np.mean([stats.norm.pdf(GRID.x, loc=yj, scale=0.5) for yj in y], axis=0)
    reduction = float(np.max(np.abs(est.values - ref)))
    gg = make_scenario(CM.laplace(1.0), CM.gaussian(1.0), 0.5, x=CM.gaussian(1.0))
    target = float(np.max(np.abs(true_fw(gg, GRID).values
                                 - stats.norm.pdf(GRID.x, scale=math.sqrt(1.25)))))
    dist = ise(DensityEstimate(GRID, stats.norm.pdf(GRID.x), 0.0),
               DensityEstimate(GRID, stats.norm.pdf(GRID.x, scale=2.0), 0.0))
    ok = reduction < 1e-6 and target < 1e-6 and abs(dist - 0.06631) < 1e-4
    report(8, ok, f"identity-blur reduction sup error {reduction:.2e}; Gaussian target sup "
                  f"error {target:.2e}; Gaussian L2 distance {dist:.6f} (0.06631 +- 1e-4)")


def test_criterion_9_thread_determinism(tmp_path):
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"rates_t{threads}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "berkson_deconv.cli", "rates", "--config",
             str(ROOT / "configs" / "rates_case_iv_below.json"), "--threads", str(threads),
             "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    same = outs[0] == outs[1]
    report(9, same, f"rates CSV with --threads 1 and --threads 4 byte-identical: {same} "
                    f"({len(outs[0])} bytes)")
