"""Mean-shift detectors: GLRT (known and unknown mean), plug-in GLRT and CUSUM."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import CovOperator, build_cov
from .errors import ParameterError
from .kernels import Domain, KernelSpec


@dataclass(frozen=True)
class ChangeWindow:
    """Admissible change times t_min..t_max (inclusive, 1-based).

    A change at t means samples 1..t are pre-change and t+1..n post-change.
    """

    n: int
    alpha: float
    t_min: int = field(init=False)
    t_max: int = field(init=False)

    def __post_init__(self):
        if not 0 < self.alpha < 0.5:
            raise ParameterError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        if self.n < 2:
            raise ParameterError(f"n must be at least 2, got {self.n}")
        # guard against alpha*n landing a hair above an integer
        lo = math.ceil(self.alpha * self.n - 1e-9)
        hi = math.floor((1 - self.alpha) * self.n + 1e-9)
        lo = max(lo, 1)
        hi = min(hi, self.n - 1)
        if lo > hi:
            raise ParameterError(f"empty change window for n={self.n}, alpha={self.alpha}")
        object.__setattr__(self, "t_min", lo)
        object.__setattr__(self, "t_max", hi)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t_min, self.t_max + 1)

    def __len__(self):
        return self.t_max - self.t_min + 1


def sign_vector(n: int, t: int) -> np.ndarray:
    """zeta_t: -1 on samples 1..t, +1 on t+1..n."""
    z = np.ones(n)
    z[:t] = -1.0
    return z


@dataclass
class DetectionResult:
    statistic: float
    t_hat: int
    threshold: float
    reject: bool
    b_hat: float
    per_t_scores: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("per_t_scores")
        d["statistic"] = float(self.statistic)
        d["threshold"] = float(self.threshold)
        d["b_hat"] = float(self.b_hat)
        d["t_hat"] = int(self.t_hat)
        d["reject"] = bool(self.reject)
        return d


def _check_prob(alpha, delta):
    if not 0 < alpha < 0.5:
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")


def threshold_glrt(n: int, alpha: float, delta: float) -> float:
    """R = 1 + 2 [log(2n(1-2a)/delta) + sqrt(log(2n(1-2a)/delta))].

    Union bound of a chi-square(1) tail over the n(1-2a) window positions, so
    that the false-alarm probability stays below delta/2.
    """
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    _check_prob(alpha, delta)
    ell = math.log(2 * n * (1 - 2 * alpha) / delta)
    if ell < 0:
        raise ParameterError("2n(1-2 alpha)/delta must be at least 1")
    return 1.0 + 2.0 * (ell + math.sqrt(ell))


def threshold_cusum(
    n: int,
    alpha: float,
    delta: float,
    domain: Domain = Domain.FIXED,
    f0_hint: float | None = None,
    vartheta: float = 0.1,
    normalized: bool = True,
) -> float:
    """CUSUM critical value in the squared-normalised convention.

    With ``normalized=False`` (fixed domain only) the unnormalised bound on
    max |U_t|, sqrt(n R*), is returned instead. In the increasing domain the
    normalised value is inflated by (1 + vartheta) f(0) when ``f0_hint`` is
    given, f(0) being the long-run variance of the series.
    """
    r_star = threshold_glrt(n, alpha, delta)
    domain = Domain(domain)
    if not normalized:
        if domain is not Domain.FIXED:
            raise ParameterError("the unnormalised CUSUM threshold is a fixed-domain quantity")
        return math.sqrt(n * r_star)
    if domain is Domain.INCREASING and f0_hint is not None:
        if f0_hint <= 0:
            raise ParameterError(f"f0_hint must be positive, got {f0_hint}")
        return r_star * (1.0 + vartheta) * f0_hint
    return r_star


class GlrtScan:
    """Precomputed GLRT scan over a change window for one covariance.

    The per-t denominators zeta_t^T Sigma^{-1} zeta_t do not depend on the
    data and are computed once from a single triangular solve against all
    window sign vectors. Data enter only through Y = Sigma^{-1} X, and the
    numerators follow the recurrence s_{t+1} = s_t - 2 Y_{t+1}.

    With ``general=True`` the mean is treated as unknown: the sign vector is
    projected off the constant direction in the Sigma^{-1} inner product.
    """

    def __init__(self, cov: CovOperator, window: ChangeWindow, general: bool = False):
        if window.n != cov.n:
            raise ParameterError(f"window is for n={window.n}, covariance has n={cov.n}")
        self.cov = cov
        self.window = window
        self.general = general
        v = cov.zeta_half_solves(window.t_min, window.t_max)
        self.q = np.sum(v * v, axis=0)
        if general:
            u = cov.half_solve(np.ones(cov.n))
            self.one_q = float(u @ u)
            self.zeta_one = v.T @ u
            self.b1 = self.zeta_one / self.one_q
            self.b2 = self.q - self.zeta_one**2 / self.one_q
            if np.any(self.b2 <= 1e-12 * self.q):
                raise ParameterError("degenerate window: B2(t) vanishes")
            self.denom = self.b2
        else:
            self.denom = self.q

    def numerators(self, x):
        """Per-t scores' numerators (before squaring), shape (window, ...) ."""
        y = self.cov.solve(x)
        csum = np.cumsum(y, axis=0)
        total = csum[-1]
        w = self.window
        s = total - 2.0 * csum[w.t_min - 1 : w.t_max]
        if self.general:
            s = s - np.multiply.outer(self.b1, total) if s.ndim > 1 else s - self.b1 * total
        return s

    def scores(self, x):
        s = self.numerators(x)
        d = self.denom if s.ndim == 1 else self.denom[:, None]
        return s * s / d

    def max_scores(self, x):
        """Column-wise (statistic, t_hat, b_hat) for an n x m data matrix."""
        s = self.numerators(x)
        d = self.denom[:, None]
        sc = s * s / d
        k = np.argmax(sc, axis=0)  # first maximum: smallest t wins ties
        cols = np.arange(sc.shape[1])
        stat = sc[k, cols]
        b_hat = 2.0 * s[k, cols] / self.denom[k]
        return stat, self.window.t_min + k, b_hat

    def detect(self, x, threshold, keep_scores=False) -> DetectionResult:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cov.n,):
            raise ParameterError(f"expected a length-{self.cov.n} vector, got shape {x.shape}")
        s = self.numerators(x)
        sc = s * s / self.denom
        k = int(np.argmax(sc))
        stat = float(sc[k])
        return DetectionResult(
            statistic=stat,
            t_hat=self.window.t_min + k,
            threshold=threshold,
            reject=stat >= threshold,
            b_hat=float(2.0 * s[k] / self.denom[k]),
            per_t_scores=sc if keep_scores else None,
        )


def glrt(x, cov: CovOperator, window: ChangeWindow, delta: float, keep_scores=False):
    """GLRT for a shift in a known (zero) mean under covariance ``cov``."""
    scan = GlrtScan(cov, window)
    return scan.detect(x, threshold_glrt(window.n, window.alpha, delta), keep_scores)


def glrt_general(x, cov: CovOperator, window: ChangeWindow, delta: float, keep_scores=False):
    """GLRT for a mean shift when the baseline mean is unknown."""
    scan = GlrtScan(cov, window, general=True)
    return scan.detect(x, threshold_glrt(window.n, window.alpha, delta), keep_scores)


def burn_in_length(window: ChangeWindow) -> int:
    return int(math.floor(window.alpha * window.n + 1e-9))


def plugin_glrt(x, spec: KernelSpec, window: ChangeWindow, delta: float, estimator):
    """Plug-in GLRT: fit (sigma, rho) on the burn-in prefix, then run the GLRT.

    ``spec`` supplies the family, shape and domain; its sigma and rho are
    ignored except by the Oracle estimator. Returns (DetectionResult, FitResult).
    """
    from .estimation import estimate

    x = np.asarray(x, dtype=float)
    if x.shape != (window.n,):
        raise ParameterError(f"expected a length-{window.n} vector, got shape {x.shape}")
    m = burn_in_length(window)
    if m < 10:
        raise ParameterError(f"burn-in has {m} samples, at least 10 are needed")
    spec = spec.with_n(window.n)
    fit = estimate(x[:m], spec, estimator)
    cov = build_cov(spec.with_params(fit.sigma_hat, fit.rho_hat))
    return glrt(x, cov, window, delta), fit


def cusum_numerators(x, window: ChangeWindow):
    """U_t for t in the window; x may be a vector or an n x m matrix."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n != window.n:
        raise ParameterError(f"expected {window.n} samples, got {n}")
    csum = np.cumsum(x, axis=0)
    total = csum[-1]
    t = window.times.astype(float)
    pre = csum[window.t_min - 1 : window.t_max]
    if x.ndim > 1:
        t = t[:, None]
    diff = (total - pre) / (n - t) - pre / t
    return np.sqrt(t * (n - t) / n) * diff, diff


def cusum(
    x,
    window: ChangeWindow,
    delta: float,
    domain: Domain = Domain.FIXED,
    f0_hint: float | None = None,
    vartheta: float = 0.1,
    keep_scores=False,
) -> DetectionResult:
    """CUSUM test on the segment-mean contrast U_t.

    Fixed domain: statistic max_t (U_t / sqrt(n))^2. Increasing domain:
    statistic max_t U_t^2. Both are compared with the GLRT critical value
    (optionally inflated by the long-run variance in the increasing domain).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ParameterError("cusum expects a single series")
    u, diff = cusum_numerators(x, window)
    sc = u * u
    if Domain(domain) is Domain.FIXED:
        sc = sc / window.n
    k = int(np.argmax(sc))
    thr = threshold_cusum(window.n, window.alpha, delta, domain, f0_hint, vartheta)
    stat = float(sc[k])
    return DetectionResult(
        statistic=stat,
        t_hat=window.t_min + k,
        threshold=thr,
        reject=stat >= thr,
        b_hat=float(diff[k]),
        per_t_scores=sc if keep_scores else None,
    )


def cusum_max_scores(x, window: ChangeWindow, domain: Domain = Domain.FIXED):
    """Column-wise max CUSUM statistic and arg-max for an n x m matrix."""
    u, _ = cusum_numerators(x, window)
    sc = u * u
    if Domain(domain) is Domain.FIXED:
        sc = sc / window.n
    k = np.argmax(sc, axis=0)
    return sc[k, np.arange(sc.shape[1])], window.t_min + k


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def gbeta(omega, beta):
    """Spectral weight of the normalised CUSUM variance for a change at fraction beta.

    G(w) = [(1-b) s1 - b s2]^2 + 4 b (1-b) s1 s2 sin^2(w/2),
    s1 = sinc(b w / 2), s2 = sinc((1-b) w / 2). It equals (1-2b)^2 at w = 0,
    [sinc(w/4) sin(w/2)]^2 at b = 1/2, and never exceeds 1.
    """
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    w = np.asarray(omega, dtype=float)
    s1 = _sinc(beta * w / 2)
    s2 = _sinc((1 - beta) * w / 2)
    out = ((1 - beta) * s1 - beta * s2) ** 2 + 4 * beta * (1 - beta) * s1 * s2 * np.sin(w / 2) ** 2
    return out[()] if out.ndim == 0 else out
