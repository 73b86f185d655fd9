"""Command-line front end.

Exit codes: 0 success, 1 error (bad input, invalid parameters), 2 for
``detect`` when the null is rejected, so shell pipelines can branch on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .covariance import build_cov
from .detectors import ChangeWindow, cusum, glrt, glrt_general, plugin_glrt, threshold_glrt
from .errors import ConditioningError, EstimationError, ParameterError, UnsupportedOperation
from .estimation import FixedRho, GridMLE, Oracle
from .kernels import Domain, Family, KernelSpec, long_run_variance
from .sim import (
    DetectorChoice,
    TrialConfig,
    auc_curve,
    auc_rows,
    cached_cov,
    rate_curve,
    rate_rows,
    rep_generators,
    write_auc_csv,
    write_csv_atomic,
    write_rate_csv,
)

EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2

# defaults mirror the reference simulation protocol
DEFAULTS = {
    "kernel": "matern",
    "sigma": 1.0,
    "rho": 0.5,
    "shape": None,
    "domain": None,
    "detector": "glrt",
    "estimator": "grid",
    "alpha": 0.1,
    "delta": 0.05,
    "b_grid": None,
    "n_grid": None,
    "n": 500,
    "seed": 0,
    "t1": 500,
    "t2": 50,
    "trials": 2000,
    "delta_grid": None,
    "target_auc": 0.9,
    "bracket": [0.01, 10.0],
    "rho_fixed": None,
    "workers": None,
    "out": ".",
    "input": None,
    "kernels": None,
}
_KERNEL_KEYS = ("kernel", "sigma", "rho", "shape", "domain")

_DEFAULT_SHAPE = {Family.MATERN: 0.5, Family.POWERED_EXPONENTIAL: 1.0, Family.POLY_TOEPLITZ: 0.5}
_DEFAULT_B_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


class UsageError(Exception):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(",", " ").split()]


def read_series(path):
    """Newline-separated decimal reals; blank lines are skipped."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e
    vals = []
    for i, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            continue
        try:
            v = float(s)
        except ValueError:
            raise UsageError(f"{path}:{i}: not a number: {s!r}") from None
        if not math.isfinite(v):
            raise UsageError(f"{path}:{i}: non-finite value {s!r}")
        vals.append(v)
    if len(vals) < 10:
        raise UsageError(f"{path}: need at least 10 values, got {len(vals)}")
    return np.asarray(vals)


def build_parser():
    p = argparse.ArgumentParser(
        prog="gpshift",
        description="Detect a single mean shift in Gaussian process data.",
        epilog="Exit codes: 0 success, 1 error, 2 detect rejected the null (change found).",
    )
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="JSON file of defaults; command-line flags take precedence")
    a("--kernel", choices=[f.value for f in Family])
    a("--sigma", type=float)
    a("--rho", type=float)
    a("--shape", type=float, help="nu (matern), beta (powexp) or lambda (poly-toeplitz)")
    a("--domain", choices=[d.value for d in Domain])
    a("--detector", choices=[d.value for d in DetectorChoice])
    a("--estimator", choices=["grid", "fixed-rho", "oracle"])
    a("--rho-fixed", type=float, help="range for --estimator fixed-rho")
    a("--alpha", type=float)
    a("--delta", type=float)
    a("--seed", type=int)
    a("--out", help="output directory (calibrate, auc, rate)")
    a("--workers", type=int)

    d = sub.add_parser("detect", parents=[common], help="run a detector on a series")
    d.add_argument("--input", help="file of newline-separated reals")

    c = sub.add_parser("calibrate", parents=[common], help="empirical false-alarm rate vs delta")
    c.add_argument("--n", type=int)
    c.add_argument("--trials", type=int)
    c.add_argument("--delta-grid")

    au = sub.add_parser("auc", parents=[common], help="mean AUC across a grid of shift sizes")
    au.add_argument("--n", type=int)
    au.add_argument("--b-grid")
    au.add_argument("--t1", type=int)
    au.add_argument("--t2", type=int)

    r = sub.add_parser("rate", parents=[common], help="smallest shift reaching a target AUC per n")
    r.add_argument("--n-grid")
    r.add_argument("--target-auc", type=float)
    r.add_argument("--bracket")
    r.add_argument("--t1", type=int)
    r.add_argument("--t2", type=int)
    return p


def resolve(args) -> dict:
    """Merge defaults < JSON config < explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot load config {args.config}: {e}") from e
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        for k, v in loaded.items():
            key = k.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {k!r}")
            cfg[key] = v
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        cfg[k] = v
    return cfg


def kernel_from(cfg) -> KernelSpec:
    fam = Family(cfg["kernel"])
    shape = cfg["shape"]
    if shape is None:
        shape = _DEFAULT_SHAPE.get(fam)
    domain = cfg["domain"]
    if domain is None:
        domain = Domain.INCREASING if fam in (Family.EXP_TOEPLITZ, Family.POLY_TOEPLITZ) else Domain.FIXED
    return KernelSpec(fam, float(cfg["sigma"]), float(cfg["rho"]), None if shape is None else float(shape), Domain(domain))


def kernels_from(cfg):
    """One spec, or several when the config lists ``kernels`` (each a partial override)."""
    if not cfg.get("kernels"):
        return [kernel_from(cfg)]
    out = []
    for entry in cfg["kernels"]:
        if not isinstance(entry, dict) or set(entry) - set(_KERNEL_KEYS):
            raise UsageError(f"kernels entries take only {', '.join(_KERNEL_KEYS)}")
        base = {k: cfg[k] for k in _KERNEL_KEYS} | {"shape": None, "domain": None}
        out.append(kernel_from(base | entry))
    return out


def estimator_from(cfg, spec):
    name = cfg["estimator"]
    if name == "grid":
        return GridMLE.default()
    if name == "fixed-rho":
        rho = cfg["rho_fixed"] if cfg["rho_fixed"] is not None else spec.rho
        return FixedRho(float(rho))
    if name == "oracle":
        return Oracle(spec.sigma, spec.rho)
    raise UsageError(f"unknown estimator {name!r}")


def _f0(spec):
    if spec.domain is Domain.INCREASING:
        return long_run_variance(spec)
    return None


def run_detector(x, spec, detector, alpha, delta, estimator=None):
    n = x.size
    spec = spec.with_n(n)
    window = ChangeWindow(n, alpha)
    detector = DetectorChoice(detector)
    if detector is DetectorChoice.GLRT:
        return glrt(x, build_cov(spec), window, delta)
    if detector is DetectorChoice.GLRT_GENERAL:
        return glrt_general(x, build_cov(spec), window, delta)
    if detector is DetectorChoice.PLUGIN_GLRT:
        return plugin_glrt(x, spec, window, delta, estimator)[0]
    return cusum(x, window, delta, spec.domain, _f0(spec))


def cmd_detect(cfg, out=None):
    out = sys.stdout if out is None else out
    if not cfg["input"]:
        raise UsageError("detect requires --input")
    x = read_series(cfg["input"])
    spec = kernel_from(cfg)
    res = run_detector(x, spec, cfg["detector"], cfg["alpha"], cfg["delta"], estimator_from(cfg, spec))
    payload = res.to_dict() | {"detector": DetectorChoice(cfg["detector"]).value, "n": int(x.size)}
    json.dump(payload, out)
    out.write("\n")
    return EXIT_REJECT if res.reject else EXIT_OK


def _statistics_h0(spec, detector, n, alpha, trials, seed, estimator):
    """Raw statistics of ``trials`` null draws."""
    from .sim import _Scorer

    cfg = TrialConfig(spec, n, alpha, 0.0, t1=max(trials, 2), t2=1, seed=seed)
    rng = rep_generators(seed, 1)[0]
    z = rng.standard_normal((trials, n))
    x = z @ cached_cov(cfg.sized_spec).chol.T
    return _Scorer(cfg, DetectorChoice(detector), estimator)(x)


def calibration_rates(spec, detector, n, alpha, deltas, trials, seed=0, estimator=None):
    """Empirical H0 rejection rate for each delta, from one shared set of draws."""
    if trials < 1:
        raise UsageError("trials must be at least 1")
    stats = _statistics_h0(spec, detector, n, alpha, trials, seed, estimator)
    detector = DetectorChoice(detector)
    rates = []
    for delta in deltas:
        thr = threshold_glrt(n, alpha, delta)
        if detector is DetectorChoice.CUSUM and spec.domain is Domain.INCREASING:
            thr *= 1.1 * long_run_variance(spec)
        rates.append(float(np.mean(stats >= thr)))
    return rates


def cmd_calibrate(cfg, out=None):
    out = sys.stdout if out is None else out
    trials = int(cfg["trials"])
    if trials < 1:
        raise UsageError("--trials must be at least 1")
    spec = kernel_from(cfg)
    deltas = _floats(cfg["delta_grid"]) if cfg["delta_grid"] is not None else [cfg["delta"]]
    rates = calibration_rates(
        spec, cfg["detector"], int(cfg["n"]), cfg["alpha"], deltas, trials, int(cfg["seed"]), estimator_from(cfg, spec)
    )
    path = os.path.join(cfg["out"], "calibrate.csv")
    write_csv_atomic(path, ["delta", "empirical_rate", "trials"], [(float(d), r, trials) for d, r in zip(deltas, rates)])
    for d, r in zip(deltas, rates):
        out.write(f"delta={d:<8g} rate={r:.4f}\n")
    out.write(f"wrote {path}\n")
    return EXIT_OK


def _sim_config(cfg, spec):
    return TrialConfig(spec, int(cfg["n"]), float(cfg["alpha"]), 0.0, int(cfg["t1"]), int(cfg["t2"]), int(cfg["seed"]))


def _detectors(cfg):
    d = cfg["detector"]
    return [d] if isinstance(d, str) else list(d)


def cmd_auc(cfg, out=None):
    out = sys.stdout if out is None else out
    b_grid = _floats(cfg["b_grid"]) if cfg["b_grid"] is not None else list(_DEFAULT_B_GRID)
    rows = []
    for spec in kernels_from(cfg):
        tc = _sim_config(cfg, spec)
        for det in _detectors(cfg):
            summ = auc_curve(tc, det, b_grid, estimator_from(cfg, spec), cfg["workers"])
            rows += auc_rows(det, tc, b_grid, summ)
            for b, s in zip(b_grid, summ):
                out.write(f"{spec.family.value:<13} {det:<13} b={b:<10.4g} auc={s.mean_auc:.4f} se={s.stderr:.4f}\n")
    path = os.path.join(cfg["out"], "auc.csv")
    write_auc_csv(path, rows)
    out.write(f"wrote {path}\n")
    return EXIT_OK


def cmd_rate(cfg, out=None):
    out = sys.stdout if out is None else out
    n_grid = _ints(cfg["n_grid"]) if cfg["n_grid"] is not None else [100, 200, 400]
    bracket = _floats(cfg["bracket"])
    if len(bracket) != 2:
        raise UsageError("--bracket takes two numbers")
    rows = []
    for spec in kernels_from(cfg):
        tc = _sim_config(cfg, spec)
        for det in _detectors(cfg):
            pts = rate_curve(
                tc, det, n_grid, float(cfg["target_auc"]), tuple(bracket),
                estimator=estimator_from(cfg, spec), workers=cfg["workers"],
            )
            rows += rate_rows(det, spec, pts)
            for p in pts:
                flag = " (saturated)" if p.saturated else ""
                out.write(f"{spec.family.value:<13} {det:<13} n={p.n:<6d} b_min={p.b_min:.4g}{flag}\n")
    path = os.path.join(cfg["out"], "rate.csv")
    write_rate_csv(path, rows)
    out.write(f"wrote {path}\n")
    return EXIT_OK


COMMANDS = {"detect": cmd_detect, "calibrate": cmd_calibrate, "auc": cmd_auc, "rate": cmd_rate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ParameterError, UnsupportedOperation, ConditioningError, EstimationError, ValueError) as e:
        print(f"gpshift {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
