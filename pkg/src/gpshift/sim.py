"""Monte Carlo harness: labelled H0/H1 trials, ROC/AUC summaries and rate curves.

Each repetition k draws from its own generator, spawned from ``SeedSequence(seed)``,
so results do not depend on scheduling. The same streams are reused for every b
and every detector, which makes comparisons across them paired (common random
numbers) and keeps AUC curves smooth in b.
"""

from __future__ import annotations

import csv
import enum
import math
import os
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .covariance import CovOperator, build_cov
from .detectors import ChangeWindow, GlrtScan, burn_in_length, cusum_max_scores
from .errors import ParameterError
from .estimation import GridMLE, estimate_batch
from .kernels import KernelSpec


class DetectorChoice(str, enum.Enum):
    GLRT = "glrt"
    GLRT_GENERAL = "glrt-general"
    PLUGIN_GLRT = "plugin-glrt"
    CUSUM = "cusum"


@dataclass(frozen=True)
class TrialConfig:
    spec: KernelSpec
    n: int = 500
    alpha: float = 0.1
    b: float = 0.0
    t1: int = 500
    t2: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.t1 < 2:
            raise ParameterError(f"t1 must be at least 2, got {self.t1}")
        if self.t2 < 1:
            raise ParameterError(f"t2 must be at least 1, got {self.t2}")
        if not (math.isfinite(self.b) and self.b >= 0):
            raise ParameterError(f"b must be finite and nonnegative, got {self.b}")
        if self.n < 2:
            raise ParameterError(f"n must be at least 2, got {self.n}")
        ChangeWindow(self.n, self.alpha)  # validates alpha against n

    @property
    def window(self) -> ChangeWindow:
        return ChangeWindow(self.n, self.alpha)

    @property
    def sized_spec(self) -> KernelSpec:
        return self.spec.with_n(self.n)

    def with_b(self, b) -> TrialConfig:
        return TrialConfig(self.spec, self.n, self.alpha, float(b), self.t1, self.t2, self.seed)

    def with_n(self, n) -> TrialConfig:
        return TrialConfig(self.spec, int(n), self.alpha, self.b, self.t1, self.t2, self.seed)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass(frozen=True)
class AucSummary:
    mean_auc: float
    stderr: float
    per_rep: np.ndarray
    curves: list = field(default_factory=list, repr=False)


_cov_lock = threading.Lock()
_cov_cache: dict = {}


def cached_cov(spec: KernelSpec) -> CovOperator:
    """build_cov memoised on the (hashable) spec; covariance operators are immutable."""
    with _cov_lock:
        cov = _cov_cache.get(spec)
        if cov is None:
            if len(_cov_cache) > 256:
                _cov_cache.clear()
            cov = _cov_cache[spec] = build_cov(spec)
        return cov


def rep_generators(seed: int, t2: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(t2)]


def gen_batch(cfg: TrialConfig, rng: np.random.Generator, cov: CovOperator | None = None):
    """t1 labelled trials: (labels, X of shape (t1, n), t_true with 0 for H0 rows).

    The draw order is fixed (labels, change times, noise) so that configurations
    differing only in b see the same random numbers.
    """
    cov = cached_cov(cfg.sized_spec) if cov is None else cov
    w = cfg.window
    labels = rng.integers(0, 2, cfg.t1)
    if labels.min() == labels.max():
        labels[-1] = 1 - labels[-1]
    ts = rng.integers(w.t_min, w.t_max + 1, cfg.t1)
    z = rng.standard_normal((cfg.t1, cfg.n))
    x = z @ cov.chol.T
    t_true = np.where(labels == 1, ts, 0)
    if cfg.b != 0:
        k = np.arange(1, cfg.n + 1)
        zeta = np.where(k[None, :] <= ts[:, None], -1.0, 1.0)
        x += (labels[:, None] * (cfg.b / 2.0)) * zeta
    return labels, x, t_true


def gen_trial(cfg: TrialConfig, rng: np.random.Generator):
    """One labelled draw: (label in {0, 1}, X, t_true or None)."""
    cov = cached_cov(cfg.sized_spec)
    w = cfg.window
    label = int(rng.integers(0, 2))
    x = cov.sample(rng.standard_normal(cfg.n))
    if label == 0:
        return 0, x, None
    t = int(rng.integers(w.t_min, w.t_max + 1))
    z = np.ones(cfg.n)
    z[:t] = -1.0
    return 1, x + (cfg.b / 2.0) * z, t


def roc_auc(scores_h0, scores_h1) -> RocCurve:
    """Empirical ROC by sweeping a threshold over the pooled scores.

    Equal scores form a single sweep point, so ties contribute a diagonal
    segment and the trapezoidal area equals P(S1 > S0) + P(S1 = S0) / 2.
    """
    s0 = np.asarray(scores_h0, dtype=float).reshape(-1)
    s1 = np.asarray(scores_h1, dtype=float).reshape(-1)
    if s0.size == 0 or s1.size == 0:
        raise ParameterError("both score lists must be nonempty")
    if np.isnan(s0).any() or np.isnan(s1).any():
        raise ParameterError("scores contain NaN")
    thr = np.unique(np.concatenate([s0, s1]))[::-1]
    s0s, s1s = np.sort(s0), np.sort(s1)
    # fraction of scores >= threshold, for thresholds in descending order
    fpr = (s0.size - np.searchsorted(s0s, thr, side="left")) / s0.size
    tpr = (s1.size - np.searchsorted(s1s, thr, side="left")) / s1.size
    fpr = np.concatenate([[0.0], fpr])
    tpr = np.concatenate([[0.0], tpr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(fpr, tpr, auc)


class _Scorer:
    """Maps a (t1, n) batch to raw max statistics for one detector and design."""

    def __init__(self, cfg: TrialConfig, detector: DetectorChoice, estimator=None):
        self.detector = DetectorChoice(detector)
        self.window = cfg.window
        self.spec = cfg.sized_spec
        if self.detector is DetectorChoice.PLUGIN_GLRT:
            self.estimator = GridMLE.default() if estimator is None else estimator
            self.m = burn_in_length(self.window)
            if self.m < 10:
                raise ParameterError(f"burn-in has {self.m} samples, at least 10 are needed")
            self._plans = {}
            self._lock = threading.Lock()
        elif self.detector in (DetectorChoice.GLRT, DetectorChoice.GLRT_GENERAL):
            general = self.detector is DetectorChoice.GLRT_GENERAL
            self.scan = GlrtScan(cached_cov(self.spec), self.window, general=general)

    def _plan(self, rho):
        # Sigma = sigma^2 C(rho) scales the score by 1 / sigma^2, so plans are keyed on rho alone
        with self._lock:
            scan = self._plans.get(rho)
        if scan is None:
            cov = build_cov(self.spec.with_params(sigma=1.0, rho=rho))
            scan = GlrtScan(cov, self.window)
            with self._lock:
                self._plans[rho] = scan
        return scan

    def __call__(self, x):
        d = self.detector
        if d is DetectorChoice.CUSUM:
            return cusum_max_scores(x.T, self.window, self.spec.domain)[0]
        if d is not DetectorChoice.PLUGIN_GLRT:
            return self.scan.max_scores(x.T)[0]
        sigma_hat, rho_hat = estimate_batch(x[:, : self.m], self.spec, self.estimator)
        out = np.empty(x.shape[0])
        for r in np.unique(rho_hat):
            rows = np.flatnonzero(rho_hat == r)
            out[rows] = self._plan(float(r)).max_scores(x[rows].T)[0] / sigma_hat[rows] ** 2
        return out


def _summarise(aucs, curves):
    aucs = np.asarray(aucs, dtype=float)
    se = float(np.std(aucs, ddof=1) / math.sqrt(aucs.size)) if aucs.size > 1 else 0.0
    return AucSummary(float(np.mean(aucs)), se, aucs, curves)


def run_auc_experiment(
    cfg: TrialConfig,
    detector: DetectorChoice,
    estimator=None,
    workers: int | None = None,
    keep_curves: bool = False,
    _scorer: _Scorer | None = None,
) -> AucSummary:
    """Mean AUC over cfg.t2 repetitions of cfg.t1 labelled trials.

    Scores are the raw max statistics, not thresholded decisions. ``estimator``
    is only used by the plug-in GLRT (default: the standard grid MLE).
    """
    scorer = _Scorer(cfg, detector, estimator) if _scorer is None else _scorer
    cov = cached_cov(cfg.sized_spec)
    gens = rep_generators(cfg.seed, cfg.t2)

    def one(rng):
        labels, x, _ = gen_batch(cfg, rng, cov)
        s = scorer(x)
        return roc_auc(s[labels == 0], s[labels == 1])

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            curves = list(ex.map(one, gens))
    else:
        curves = [one(g) for g in gens]
    return _summarise([c.auc for c in curves], curves if keep_curves else [])


def auc_curve(cfg: TrialConfig, detector: DetectorChoice, b_grid, estimator=None, workers=None):
    """run_auc_experiment across a b grid, sharing the detector setup."""
    scorer = _Scorer(cfg, detector, estimator)
    return [
        run_auc_experiment(cfg.with_b(b), detector, estimator, workers, _scorer=scorer)
        for b in b_grid
    ]


@dataclass(frozen=True)
class RatePoint:
    n: int
    b_min: float
    saturated: bool


def rate_curve(
    cfg: TrialConfig,
    detector: DetectorChoice,
    n_list,
    target_auc: float = 0.9,
    bracket=(0.01, 10.0),
    iterations: int = 8,
    estimator=None,
    workers=None,
) -> list[RatePoint]:
    """Smallest b reaching ``target_auc`` for each n, by bisection on log b.

    The mean AUC uses common random numbers across b, so it is close to
    monotone in b. If the bracket does not straddle the target the nearer
    edge is returned with ``saturated=True``.
    """
    if not 0.5 < target_auc < 1:
        raise ParameterError(f"target_auc must lie in (0.5, 1), got {target_auc}")
    n_list = [int(n) for n in n_list]
    if not n_list or any(a >= b for a, b in zip(n_list, n_list[1:])):
        raise ParameterError("n_list must be nonempty and strictly ascending")
    lo0, hi0 = float(bracket[0]), float(bracket[1])
    if not 0 < lo0 < hi0:
        raise ParameterError(f"invalid bracket {bracket}")
    out = []
    for n in n_list:
        c = cfg.with_n(n)
        scorer = _Scorer(c, detector, estimator)

        def auc(b, c=c, scorer=scorer):
            return run_auc_experiment(c.with_b(b), detector, estimator, workers, _scorer=scorer).mean_auc

        if auc(hi0) < target_auc:
            out.append(RatePoint(n, hi0, True))
            continue
        if auc(lo0) >= target_auc:
            out.append(RatePoint(n, lo0, True))
            continue
        lo, hi = math.log(lo0), math.log(hi0)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if auc(math.exp(mid)) >= target_auc:
                hi = mid
            else:
                lo = mid
        out.append(RatePoint(n, math.exp(0.5 * (lo + hi)), False))
    return out


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


AUC_HEADER = ["detector", "family", "nu_or_beta", "sigma", "rho", "n", "alpha", "b", "mean_auc", "stderr"]
RATE_HEADER = ["detector", "family", "shape", "n", "b_min", "saturated"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, enum.Enum):
        return v.value
    return str(v)


def write_csv_atomic(path, header, rows):
    """Write rows to ``path`` through a temporary file and an atomic rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def auc_rows(detector, cfg: TrialConfig, b_grid, summaries):
    s = cfg.spec
    return [
        (DetectorChoice(detector), s.family, s.shape, s.sigma, s.rho, cfg.n, cfg.alpha, float(b), r.mean_auc, r.stderr)
        for b, r in zip(b_grid, summaries)
    ]


def rate_rows(detector, spec: KernelSpec, points):
    return [(DetectorChoice(detector), spec.family, spec.shape, p.n, p.b_min, p.saturated) for p in points]


def write_auc_csv(path, rows):
    write_csv_atomic(path, AUC_HEADER, rows)


def write_rate_csv(path, rows):
    write_csv_atomic(path, RATE_HEADER, rows)
