"""Tabulated variance bound against its own saddle-point derivation (supersmooth rows)."""

from __future__ import annotations

import math
from typing import Iterable

from .errors import InvalidScenario
from .risk import CaseId, classify_case, log_laplace_variance, log_variance_bound
from .spectral import Scenario

SUPERSMOOTH_CASES = frozenset({CaseId.V, CaseId.VI, CaseId.VII, CaseId.VIII})


def laplace_ratio(scenario: Scenario, h: float) -> dict:
    """h^-(2a+1) * Laplace(int_0^1 P e^phi) divided by the tabulated expression."""
    log_tab, branch = log_variance_bound(scenario, h)
    log_lap, lap_branch = log_laplace_variance(scenario, h)
    log_ratio = log_lap - log_tab
    return {"h": float(h), "log_table": log_tab, "log_laplace": log_lap,
            "table": _safe_exp(log_tab), "laplace": _safe_exp(log_lap),
            "ratio": _safe_exp(log_ratio), "branch": f"{branch}; {lap_branch}",
            "log_ratio": log_ratio}


def _safe_exp(x: float) -> float | None:
    """exp(x), or None where it overflows a double."""
    return math.exp(x) if x < 709 else None


def laplace_sweep(scenario: Scenario, hs: Iterable[float]) -> list[dict]:
    case = classify_case(scenario.xi_env, scenario.g_env)
    if case not in SUPERSMOOTH_CASES:
        raise InvalidScenario("the saddle-point check applies to cases V-VIII only",
                              case=case.value)
    return [laplace_ratio(scenario, float(h)) for h in hs]
