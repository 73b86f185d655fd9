"""Stationary covariance kernels and their spectral densities.

Every kernel is parameterised by a standard deviation ``sigma``, a range
``rho`` and (for some families) a shape parameter, and satisfies
``K(0) = sigma**2``. Spectral densities use the convention

    K_hat(w) = integral K(r) exp(-i w r) dr,   K(r) = (1 / 2 pi) integral K_hat(w) exp(i w r) dw.

Fixed-domain kernels are evaluated at physical lags; the 1/n grid spacing is
applied by :mod:`gpshift.covariance`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special

from .besselk import kv
from .errors import ParameterError, UnsupportedOperation


class Family(str, enum.Enum):
    MATERN = "matern"
    POWERED_EXPONENTIAL = "powexp"
    SQUARED_EXPONENTIAL = "sqexp"
    TRIANGULAR = "triangular"
    EXP_TOEPLITZ = "exp-toeplitz"
    POLY_TOEPLITZ = "poly-toeplitz"
    WHITE_NOISE = "white"


class Domain(str, enum.Enum):
    FIXED = "fixed"  # n samples on [0, 1] at k/n
    INCREASING = "increasing"  # n samples at unit spacing


FIXED_FAMILIES = frozenset(
    {Family.MATERN, Family.POWERED_EXPONENTIAL, Family.SQUARED_EXPONENTIAL, Family.TRIANGULAR}
)
TOEPLITZ_FAMILIES = frozenset({Family.EXP_TOEPLITZ, Family.POLY_TOEPLITZ})
_SHAPED = frozenset({Family.MATERN, Family.POWERED_EXPONENTIAL, Family.POLY_TOEPLITZ})


@dataclass(frozen=True)
class KernelSpec:
    """Covariance family, parameters and sampling design.

    ``shape`` is nu for Matern, beta for the powered exponential and lambda
    for the polynomial Toeplitz family; it is ignored by the other families.
    """

    family: Family
    sigma: float = 1.0
    rho: float = 1.0
    shape: float | None = None
    domain: Domain = Domain.FIXED
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "domain", Domain(self.domain))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError(f"sigma must be positive and finite, got {self.sigma}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ParameterError(f"rho must be positive and finite, got {self.rho}")
        fam = self.family
        if fam in _SHAPED:
            if self.shape is None:
                raise ParameterError(f"{fam.value} requires a shape parameter")
            s = self.shape
            if fam is Family.POWERED_EXPONENTIAL and not 0 < s < 2:
                raise ParameterError(f"powered exponential needs beta in (0, 2), got {s}")
            if fam is not Family.POWERED_EXPONENTIAL and not (math.isfinite(s) and s > 0):
                raise ParameterError(f"{fam.value} needs a positive shape, got {s}")
        if fam in TOEPLITZ_FAMILIES and self.domain is not Domain.INCREASING:
            raise ParameterError(f"{fam.value} is only defined in the increasing domain")
        if self.n is not None and self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")

    @property
    def variance(self) -> float:
        return self.sigma**2

    def with_params(self, sigma=None, rho=None) -> KernelSpec:
        return replace(
            self,
            sigma=self.sigma if sigma is None else sigma,
            rho=self.rho if rho is None else rho,
        )

    def with_n(self, n: int) -> KernelSpec:
        return replace(self, n=n)


def _matern_corr(nu, x):
    """Unit-variance Matern correlation at scaled lags x = |r| / rho >= 0."""
    x = np.abs(np.asarray(x, dtype=float))
    if nu == 0.5:
        return np.exp(-x)
    if nu == 1.5:
        return (1.0 + x) * np.exp(-x)
    if nu == 2.5:
        return (1.0 + x + x * x / 3.0) * np.exp(-x)
    out = np.ones_like(x)
    pos = x > 0
    if np.any(pos):
        xp = x[pos]
        # 2^(1-nu)/Gamma(nu) * x^nu * K_nu(x), evaluated in log space for the prefactor
        logpre = (1.0 - nu) * math.log(2.0) - math.lgamma(nu) + nu * np.log(xp)
        out[pos] = np.exp(logpre) * kv(nu, xp)
    return out


def eval_cov(spec: KernelSpec, lag):
    """Covariance K(lag) at physical lag (scalar or array)."""
    r = np.abs(np.asarray(lag, dtype=float))
    if not np.all(np.isfinite(r)):
        raise ParameterError("lag must be finite")
    s2, rho, fam = spec.variance, spec.rho, spec.family
    if fam is Family.MATERN:
        out = s2 * _matern_corr(spec.shape, r / rho)
    elif fam is Family.POWERED_EXPONENTIAL:
        out = s2 * np.exp(-((r / rho) ** spec.shape))
    elif fam is Family.SQUARED_EXPONENTIAL:
        out = s2 * np.exp(-0.5 * (r / rho) ** 2)
    elif fam is Family.TRIANGULAR:
        out = s2 * np.clip(1.0 - r / rho, 0.0, None)
    elif fam is Family.EXP_TOEPLITZ:
        out = s2 * np.exp(-r / rho)
    elif fam is Family.POLY_TOEPLITZ:
        out = s2 * (1.0 + r / rho) ** (-(1.0 + spec.shape))
    elif fam is Family.WHITE_NOISE:
        out = np.where(r == 0, s2, 0.0)
    else:  # pragma: no cover
        raise UnsupportedOperation(fam)
    return out[()] if out.ndim == 0 else out


def _sinc(x):
    # unnormalised sin(x)/x
    return np.sinc(np.asarray(x) / np.pi)


def _powexp_spectral(spec, w):
    beta, rho = spec.shape, spec.rho
    w = abs(float(w))
    if w == 0.0:
        return 2.0 * spec.variance * rho * math.gamma(1.0 + 1.0 / beta)

    def corr(r):
        return math.exp(-((abs(r) / rho) ** beta))

    # Fourier integral over [0, inf) with the cosine weight (QUADPACK QAWF).
    val, _ = integrate.quad(corr, 0.0, np.inf, weight="cos", wvar=w, limlst=200, limit=400)
    return 2.0 * spec.variance * val


def eval_spectral(spec: KernelSpec, omega):
    """Spectral density K_hat(omega) of a fixed-domain kernel."""
    fam = spec.family
    if fam not in FIXED_FAMILIES:
        raise UnsupportedOperation(
            f"{fam.value} has no spectral density on R; use toeplitz_generator_at"
        )
    w = np.asarray(omega, dtype=float)
    s2, rho = spec.variance, spec.rho
    if fam is Family.MATERN:
        nu = spec.shape
        const = math.sqrt(4 * math.pi) * math.exp(math.lgamma(nu + 0.5) - math.lgamma(nu))
        out = const * s2 * rho ** (-2 * nu) * (rho ** -2 + w * w) ** (-(nu + 0.5))
    elif fam is Family.SQUARED_EXPONENTIAL:
        out = rho * s2 * math.sqrt(2 * math.pi) * np.exp(-0.5 * (rho * w) ** 2)
    elif fam is Family.TRIANGULAR:
        out = rho * s2 * _sinc(rho * w / 2.0) ** 2
    else:
        out = np.vectorize(lambda x: _powexp_spectral(spec, x), otypes=[float])(w)
    return out[()] if np.ndim(out) == 0 else out


def toeplitz_cov_seq(spec: KernelSpec, n: int):
    """Autocovariances f_0, ..., f_{n-1} at unit lags (increasing domain)."""
    if spec.domain is not Domain.INCREASING:
        raise UnsupportedOperation("toeplitz_cov_seq requires an increasing-domain spec")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return np.asarray(eval_cov(spec, np.arange(n, dtype=float)), dtype=float).reshape(n)


_GEN_TERMS = 200_000


def toeplitz_generator_at(spec: KernelSpec, omega):
    """Generator f(omega) = sum_k f_k exp(-i k omega) of an increasing-domain kernel."""
    if spec.domain is not Domain.INCREASING:
        raise UnsupportedOperation("the Toeplitz generator is defined in the increasing domain")
    w = np.asarray(omega, dtype=float)
    s2, rho, fam = spec.variance, spec.rho, spec.family
    if fam is Family.WHITE_NOISE:
        out = np.full_like(w, s2)
    elif fam is Family.EXP_TOEPLITZ:
        a = math.exp(-1.0 / rho)
        out = s2 * (1 - a * a) / (1 - 2 * a * np.cos(w) + a * a)
    else:
        k = np.arange(1, _GEN_TERMS, dtype=float)
        fk = np.asarray(eval_cov(spec, k))
        out = np.array([s2 + 2.0 * np.dot(fk, np.cos(k * wi)) for wi in w.reshape(-1)])
        out = out.reshape(w.shape)
        if fam is Family.POLY_TOEPLITZ:
            # exact long-run variance via the Hurwitz zeta function
            s = 1.0 + spec.shape
            f0 = s2 * (1.0 + 2.0 * rho**s * special.zeta(s, rho + 1.0))
            out = np.where(w == 0, f0, out)
    return out[()] if out.ndim == 0 else out


def long_run_variance(spec: KernelSpec) -> float:
    """f(0) = sum over all integer lags of the autocovariance."""
    return float(toeplitz_generator_at(spec, 0.0))
