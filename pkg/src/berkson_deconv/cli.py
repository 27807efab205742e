"""Command-line front end: `berkson-deconv <subcommand> --config scenario.json ...`."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import selftest as _selftest
from .bandwidth import default_h_grid, optimal_bandwidth
from .config import (BandwidthResult, ClassifyResult, LaplaceCheckResult, RateFitResult,
                     ScenarioConfig, load_config)
from .errors import AdmissibilityError, ConfigError, DeconvError
from .estimator import estimate
from .laplace_check import laplace_sweep
from .montecarlo import (CSV_HEADER, RateStudyError, default_threads, mc_mise, rate_study,
                         resolve_h, sample_y)
from .risk import classify_case, risk_bound
from .spectral import rho_finiteness

SEED_ENV = "DECONV_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the JSON error channel
        raise ConfigError(f"usage: {message}")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _finite(obj):
    # strict JSON: overflowed bounds become null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_finite(obj), allow_nan=False)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _seed(args, cfg: ScenarioConfig) -> int:
    if args.seed is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} is not an integer", value=env) from None
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{SEED_ENV} must be an unsigned 64-bit integer", value=env)
    return seed


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _h_arg(text: str) -> str | float:
    if text in ("oracle", "zero"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("h must be a nonnegative number, 'oracle' or 'zero'")
    if not (value >= 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError("h must be a nonnegative number, 'oracle' or 'zero'")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_classify(args, cfg: ScenarioConfig) -> int:
    sc = cfg.scenario()
    finite, reason = rho_finiteness(sc.xi_env, sc.g_env, sc.sigma)
    res = ClassifyResult(case=classify_case(sc.xi_env, sc.g_env).value,
                         rho_finite=finite, reason=reason)
    _emit(res.model_dump_json() + "\n", args.out)
    return 0


def cmd_bandwidth(args, cfg: ScenarioConfig) -> int:
    dec = optimal_bandwidth(cfg.scenario())
    res = BandwidthResult(case=dec.case.value, branch=dec.branch.value, threshold=dec.threshold,
                          h_opt=dec.h_opt, predicted_delta=dec.predicted_delta, trace=dec.trace)
    _emit(_dumps(res.model_dump()) + "\n", args.out)
    return 0


def cmd_risk_bound(args, cfg: ScenarioConfig) -> int:
    sc = cfg.scenario()
    hs = [resolve_h(sc, args.h)] if args.h is not None else list(default_h_grid(sc))
    rows = []
    for h in hs:
        try:
            rows.append(risk_bound(sc, float(h)))
        except AdmissibilityError:
            if args.h is not None:
                raise
    if args.format == "json":
        text = _dumps([{"h": r.h, "delta1": r.delta1, "delta2": r.delta2, "total": r.total,
                        "case": r.case.value, "branch": r.branch} for r in rows]) + "\n"
    else:
        lines = ["h,delta1,delta2,total,case,branch"]
        lines += [f"{_fmt(r.h)},{_fmt(r.delta1)},{_fmt(r.delta2)},{_fmt(r.total)},"
                  f"{r.case.value},\"{r.branch}\"" for r in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_estimate(args, cfg: ScenarioConfig) -> int:
    sc, grid = cfg.scenario(), cfg.grid_spec()
    h = resolve_h(sc, args.h or "oracle")
    est = estimate(sample_y(sc, _seed(args, cfg), args.rep), sc, h, grid)
    if args.format == "json":
        text = _dumps({"h": est.h, "x": est.grid.x.tolist(), "value": est.values.tolist(),
                       "meta": est.meta}) + "\n"
    else:
        text = est.to_csv()
    _emit(text, args.out)
    return 0


def _rows_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in rows]) + "\n"


def cmd_mise(args, cfg: ScenarioConfig) -> int:
    sc = cfg.scenario()
    h = resolve_h(sc, args.h or "oracle")
    m = mc_mise(sc, h, cfg.grid_spec(), args.reps or cfg.reps, _seed(args, cfg), args.threads)
    if args.format == "json":
        text = _dumps({"n": m.n, "h": m.h, "mean_ise": m.mean_ise, "std_error": m.std_error,
                       "reps": m.reps, "seed": m.seed}) + "\n"
    else:
        text = _rows_csv([m])
    _emit(text, args.out)
    return 0


def cmd_rates(args, cfg: ScenarioConfig) -> int:
    if cfg.n_list is None:
        raise ConfigError("n_list: rates needs an n_list of at least 3 sample sizes")
    try:
        study = rate_study(cfg.scenario(), cfg.n_list, args.h or "oracle", args.reps or cfg.reps,
                           _seed(args, cfg), cfg.grid_spec(), cfg.sigma_mode, args.threads)
    except RateStudyError as exc:
        if args.out:
            Path(args.out).write_text(_rows_csv(exc.partial))
        exc.context["partial_rows"] = len(exc.partial)
        raise
    fit = RateFitResult(**study.fit.to_dict())
    if args.format == "json":
        rows = [{"n": r.n, "h": r.h, "mean_ise": r.mean_ise, "std_error": r.std_error,
                 "reps": r.reps, "seed": r.seed} for r in study.rows]
        _emit(_dumps({"rows": rows, "fit": fit.model_dump()}) + "\n", args.out)
    else:
        _emit(_rows_csv(study.rows), args.out)
        if args.fit_out:
            Path(args.fit_out).write_text(_dumps(fit.model_dump()) + "\n")
        elif args.out:
            sys.stdout.write(_dumps(fit.model_dump()) + "\n")
    return 0


def cmd_laplace_check(args, cfg: ScenarioConfig) -> int:
    sc = cfg.scenario()
    rows = laplace_sweep(sc, np.geomspace(args.h_min, args.h_max, args.h_points))
    res = LaplaceCheckResult(case=classify_case(sc.xi_env, sc.g_env).value, sigma=sc.sigma,
                             rows=rows)
    _emit(_dumps(res.model_dump()) + "\n", args.out)
    return 0


def cmd_selftest(args, cfg) -> int:
    failures = _selftest.run(sys.stdout)
    return 1 if failures else 0


COMMANDS = {
    "classify": cmd_classify, "bandwidth": cmd_bandwidth, "risk-bound": cmd_risk_bound,
    "estimate": cmd_estimate, "mise": cmd_mise, "rates": cmd_rates,
    "laplace-check": cmd_laplace_check, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="berkson-deconv",
                description="Density deconvolution with Berkson error: risk bounds, "
                            "bandwidth oracle and Monte Carlo checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "selftest":
            continue
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", help="write the result here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"),
                        default="json" if name in ("classify", "bandwidth", "laplace-check")
                        else "csv")
        if name in ("risk-bound", "estimate", "mise", "rates"):
            sp.add_argument("--h", type=_h_arg, default=None,
                            help="bandwidth: a number, 'oracle' (default) or 'zero'")
        if name in ("estimate", "mise", "rates"):
            sp.add_argument("--seed", type=_u64, default=None,
                            help=f"u64 seed; defaults to config seed, then ${SEED_ENV}, then 0")
        if name == "estimate":
            sp.add_argument("--rep", type=int, default=0, help="replication index of the draw")
        if name in ("mise", "rates"):
            sp.add_argument("--reps", type=int, default=None)
            sp.add_argument("--threads", type=int, default=default_threads())
        if name == "rates":
            sp.add_argument("--fit-out", help="write the RateFit JSON here")
        if name == "laplace-check":
            sp.add_argument("--h-min", type=float, default=0.01)
            sp.add_argument("--h-max", type=float, default=0.8)
            sp.add_argument("--h-points", type=int, default=8)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = None if args.command == "selftest" else load_config(args.config)
        if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be at least 1")
        return COMMANDS[args.command](args, cfg)
    except DeconvError as exc:
        sys.stderr.write(json.dumps({"code": exc.code, "message": exc.message,
                                     "context": exc.context}, default=str) + "\n")
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        sys.stderr.write(json.dumps({"code": "numeric", "message": str(exc), "context": {}}) + "\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
