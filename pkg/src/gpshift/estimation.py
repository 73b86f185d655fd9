"""Burn-in estimation of (sigma, rho) for the plug-in GLRT.

All estimators work on the first m samples of a series whose sampling grid is
that of ``spec.n``: a fixed-domain burn-in keeps its original locations k/n.
Data may be a single burn-in vector or a (trials, m) matrix; the batch helpers
evaluate every trial against one factorisation per range value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import CovOperator, cov_first_row
from .errors import ConditioningError, EstimationError, ParameterError
from .kernels import Family, KernelSpec

LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class GridMLE:
    """Brute-force Gaussian MLE over a finite set of (sigma, rho) pairs."""

    points: tuple

    def __post_init__(self):
        pts = tuple(sorted((float(s), float(r)) for s, r in self.points))
        if not pts:
            raise ParameterError("estimation grid is empty")
        if any(s <= 0 or r <= 0 for s, r in pts):
            raise ParameterError("grid points must be positive")
        object.__setattr__(self, "points", pts)

    @classmethod
    def product(cls, sigmas, rhos):
        return cls(tuple((s, r) for s in sigmas for r in rhos))

    @classmethod
    def default(cls):
        """sigma in {0.2, 0.4, ..., 2}, rho in {1/4, 1/3.9, ..., 1/0.1}."""
        sigmas = [round(0.2 * k, 10) for k in range(1, 11)]
        rhos = [1.0 / round(0.1 * k, 10) for k in range(40, 0, -1)]
        return cls.product(sigmas, rhos)


@dataclass(frozen=True)
class FixedRho:
    """Profile MLE of sigma with rho held at ``rho_fixed``."""

    rho_fixed: float

    def __post_init__(self):
        if not self.rho_fixed > 0:
            raise ParameterError(f"rho_fixed must be positive, got {self.rho_fixed}")


@dataclass(frozen=True)
class Oracle:
    """Returns the given parameters (the truth, or a deliberate perturbation)."""

    sigma: float
    rho: float


@dataclass(frozen=True)
class FitResult:
    sigma_hat: float
    rho_hat: float
    loglik: float
    microergodic: float | None

    def to_dict(self):
        return {
            "sigma_hat": self.sigma_hat,
            "rho_hat": self.rho_hat,
            "loglik": self.loglik,
            "microergodic": self.microergodic,
        }


def microergodic(spec: KernelSpec, sigma, rho):
    """sigma * rho^(-nu) for Matern kernels, None otherwise."""
    if spec.family is Family.MATERN:
        return sigma * rho ** (-spec.shape)
    return None


def _burn_in(x):
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] < 2:
        raise ParameterError("burn-in needs at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ParameterError("burn-in contains non-finite values")
    return x


def _sized(spec, m):
    # without a design size the burn-in is taken to be the whole series
    spec = spec if spec.n is not None else spec.with_n(m)
    if spec.n < m:
        raise ParameterError(f"burn-in of {m} samples exceeds spec.n={spec.n}")
    return spec


def _corr_operator(spec, rho, m):
    return CovOperator(cov_first_row(_sized(spec, m).with_params(sigma=1.0, rho=rho), m))


def gaussian_loglik(x_burn, spec: KernelSpec) -> float:
    """Zero-mean Gaussian log-likelihood of the burn-in under ``spec``."""
    x = _burn_in(x_burn)
    if x.ndim != 1:
        raise ParameterError("gaussian_loglik takes a single burn-in vector")
    m = x.size
    cov = CovOperator(cov_first_row(_sized(spec, m), m))
    return -0.5 * (m * LOG_2PI + cov.log_det + float(cov.quad_form(x)))


def _loglik_table(xb, spec, points):
    """(trials, len(points)) log-likelihoods; -inf where factorisation fails."""
    m = xb.shape[1]
    table = np.full((xb.shape[0], len(points)), -np.inf)
    by_rho = {}
    for j, (s, r) in enumerate(points):
        by_rho.setdefault(r, []).append((j, s))
    for r, members in by_rho.items():
        try:
            c = _corr_operator(spec, r, m)
        except ConditioningError:
            continue
        qc = c.quad_form(xb.T)
        for j, s in members:
            table[:, j] = -0.5 * (m * LOG_2PI + 2 * m * math.log(s) + c.log_det + qc / s**2)
    return table


def fit_grid_mle_batch(xb, spec: KernelSpec, grid: GridMLE):
    """Grid MLE for each row of ``xb``; returns (sigma_hat, rho_hat, loglik) arrays."""
    xb = np.atleast_2d(_burn_in(xb))
    table = _loglik_table(xb, spec, grid.points)
    best = np.argmax(table, axis=1)  # points are sorted by (sigma, rho): first max breaks ties
    ll = table[np.arange(len(best)), best]
    if np.any(~np.isfinite(ll)):
        raise EstimationError("no grid point admits a positive definite covariance")
    pts = np.asarray(grid.points)
    return pts[best, 0], pts[best, 1], ll


def fit_grid_mle(x_burn, spec: KernelSpec, grid: GridMLE) -> FitResult:
    x = _burn_in(x_burn)
    if x.ndim != 1:
        raise ParameterError("fit_grid_mle takes a single burn-in vector")
    s, r, ll = fit_grid_mle_batch(x[None, :], spec, grid)
    s, r = float(s[0]), float(r[0])
    return FitResult(s, r, float(ll[0]), microergodic(spec, s, r))


def fit_fixed_rho_batch(xb, spec: KernelSpec, rho_fixed: float):
    xb = np.atleast_2d(_burn_in(xb))
    m = xb.shape[1]
    c = _corr_operator(spec, rho_fixed, m)
    s2 = c.quad_form(xb.T) / m
    if np.any(s2 <= 0):
        raise EstimationError("zero profile variance: plug-in covariance would be singular")
    ll = -0.5 * (m * LOG_2PI + m * np.log(s2) + c.log_det + m)
    return np.sqrt(s2), np.full(len(s2), float(rho_fixed)), ll


def fit_fixed_rho(x_burn, spec: KernelSpec, rho_fixed: float) -> FitResult:
    """Closed-form profile MLE sigma^2 = x^T C(rho)^{-1} x / m at fixed rho."""
    if not rho_fixed > 0:
        raise ParameterError(f"rho_fixed must be positive, got {rho_fixed}")
    x = _burn_in(x_burn)
    if x.ndim != 1:
        raise ParameterError("fit_fixed_rho takes a single burn-in vector")
    s, r, ll = fit_fixed_rho_batch(x[None, :], spec, rho_fixed)
    s = float(s[0])
    return FitResult(s, float(rho_fixed), float(ll[0]), microergodic(spec, s, rho_fixed))


def estimate(x_burn, spec: KernelSpec, estimator) -> FitResult:
    """Dispatch on the estimator choice."""
    if isinstance(estimator, GridMLE):
        return fit_grid_mle(x_burn, spec, estimator)
    if isinstance(estimator, FixedRho):
        return fit_fixed_rho(x_burn, spec, estimator.rho_fixed)
    if isinstance(estimator, Oracle):
        truth = spec.with_params(estimator.sigma, estimator.rho)
        ll = gaussian_loglik(x_burn, truth)
        return FitResult(estimator.sigma, estimator.rho, ll, microergodic(spec, estimator.sigma, estimator.rho))
    raise ParameterError(f"unknown estimator {estimator!r}")


def estimate_batch(xb, spec: KernelSpec, estimator):
    """(sigma_hat, rho_hat) arrays for each burn-in row."""
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    if isinstance(estimator, GridMLE):
        s, r, _ = fit_grid_mle_batch(xb, spec, estimator)
        return s, r
    if isinstance(estimator, FixedRho):
        s, r, _ = fit_fixed_rho_batch(xb, spec, estimator.rho_fixed)
        return s, r
    if isinstance(estimator, Oracle):
        k = xb.shape[0]
        return np.full(k, float(estimator.sigma)), np.full(k, float(estimator.rho))
    raise ParameterError(f"unknown estimator {estimator!r}")
