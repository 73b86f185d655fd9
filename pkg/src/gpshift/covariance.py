"""Toeplitz covariance matrices built from kernels, with Cholesky-based algebra."""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import ConditioningError, ParameterError
from .kernels import Domain, KernelSpec, eval_cov, toeplitz_cov_seq

JITTER = 1e-10


def cov_first_row(spec: KernelSpec, m: int | None = None) -> np.ndarray:
    """First row of the covariance of the first ``m`` samples of ``spec``.

    Lags are measured on the grid of ``spec.n`` samples, so for a fixed-domain
    spec the result is the leading block of Sigma_n even when m < n.
    """
    n = spec.n
    if n is None:
        raise ParameterError("spec.n must be set to build a covariance")
    m = n if m is None else m
    if spec.domain is Domain.FIXED:
        return np.asarray(eval_cov(spec, np.arange(m) / n), dtype=float).reshape(m)
    return toeplitz_cov_seq(spec, m)


def _toeplitz(first_row):
    n = len(first_row)
    idx = np.arange(n)
    return first_row[np.abs(idx[:, None] - idx[None, :])]


def _cholesky(a):
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise ConditioningError(
            f"covariance not positive definite (leading minor {info} failed)", pivot=int(info)
        )
    if info < 0:  # pragma: no cover
        raise ValueError(f"dpotrf illegal argument {-info}")
    return c


class CovOperator:
    """Factored symmetric Toeplitz covariance.

    Holds the autocovariance ``first_row``, the lower Cholesky factor ``chol``
    and the cached ``log_det``. ``jittered`` records whether a diagonal jitter
    of 1e-10 * first_row[0] had to be added for the factorisation to succeed.
    Instances are treated as immutable.
    """

    def __init__(self, first_row, allow_jitter=True):
        first_row = np.array(first_row, dtype=float).reshape(-1)
        n = first_row.size
        if n < 2:
            raise ParameterError(f"covariance order must be at least 2, got {n}")
        if not np.all(np.isfinite(first_row)):
            raise ParameterError("non-finite autocovariance")
        dense = _toeplitz(first_row)
        self.jittered = False
        try:
            chol = _cholesky(dense)
        except ConditioningError:
            if not allow_jitter:
                raise
            dense[np.diag_indices(n)] += JITTER * first_row[0]
            chol = _cholesky(dense)
            self.jittered = True
        self.n = n
        self.first_row = first_row
        self.chol = chol
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        self.first_row.setflags(write=False)
        self.chol.setflags(write=False)
        self._zeta_cache = {}

    def __repr__(self):
        return f"CovOperator(n={self.n}, f0={self.first_row[0]:.4g}, jittered={self.jittered})"

    def dense(self):
        return _toeplitz(self.first_row)

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise ParameterError(f"length mismatch: expected {self.n}, got {v.shape[0]}")
        return v

    def half_solve(self, rhs):
        """L^{-1} rhs (rhs may be a vector or an n x k matrix)."""
        return solve_triangular(self.chol, self._check(rhs), lower=True, check_finite=False)

    def solve(self, rhs):
        """Sigma^{-1} rhs through two triangular solves."""
        w = self.half_solve(rhs)
        return solve_triangular(self.chol, w, lower=True, trans="T", check_finite=False)

    def quad_form(self, v):
        """v^T Sigma^{-1} v (column-wise for a matrix argument)."""
        w = self.half_solve(v)
        return np.sum(w * w, axis=0)

    def sample(self, z):
        """L z: maps standard normal draws to draws with covariance Sigma."""
        z = self._check(z)
        return self.chol @ z

    def zeta_half_solves(self, t_min, t_max):
        """Columns L^{-1} zeta_t for t = t_min..t_max, cached per window.

        zeta_t is -1 on the first t samples and +1 after.
        """
        key = (t_min, t_max)
        if key not in self._zeta_cache:
            ts = np.arange(t_min, t_max + 1)
            z = np.where(np.arange(1, self.n + 1)[:, None] <= ts[None, :], -1.0, 1.0)
            self._zeta_cache[key] = self.half_solve(z)
        return self._zeta_cache[key]


def build_cov(spec: KernelSpec, allow_jitter=True) -> CovOperator:
    """Covariance of n samples from ``spec`` (grid k/n or unit lags by domain)."""
    if spec.n is None or spec.n < 2:
        raise ParameterError(f"build_cov needs n >= 2, got {spec.n}")
    return CovOperator(cov_first_row(spec), allow_jitter=allow_jitter)


def solve(cov: CovOperator, rhs):
    return cov.solve(rhs)


def quad_form(cov: CovOperator, v) -> float:
    return float(cov.quad_form(np.asarray(v, dtype=float).reshape(-1)))


def sample_chol(cov: CovOperator, z):
    return cov.sample(z)


def _indicator(n, idx):
    idx = np.asarray(sorted(set(int(i) for i in idx)), dtype=int)
    if idx.size == 0:
        raise ParameterError("index set must be nonempty")
    if idx[0] < 1 or idx[-1] > n:
        raise ParameterError(f"indices must lie in 1..{n}")
    v = np.zeros(n)
    v[idx - 1] = 1.0
    return v, idx.size


def tau(cov: CovOperator, use_inverse: bool, s, s_prime=None) -> float:
    """Normalised bilinear form 1_S^T L 1_S' / sqrt(|S| |S'|), L = Sigma or Sigma^{-1}.

    Index sets are 1-based.
    """
    s_prime = s if s_prime is None else s_prime
    a, na = _indicator(cov.n, s)
    b, nb = _indicator(cov.n, s_prime)
    if use_inverse:
        val = cov.half_solve(a) @ cov.half_solve(b)
    else:
        val = a @ (cov.dense() @ b)
    return float(val / np.sqrt(na * nb))
