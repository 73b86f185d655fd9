"""Modified Bessel function of the second kind, K_nu(x), for real nu >= 0 and x > 0.

The order is split as nu = mu + k with |mu| <= 1/2. K_mu and K_{mu+1} are
obtained from Temme's series when x <= 2 and from Steed's continued fraction
(CF2) otherwise; forward recurrence in the order then reaches K_nu, which is
stable for K.
"""

import math

import numpy as np

_EPS = 1e-16
_MAXIT = 10_000
_X_SPLIT = 2.0

# Taylor coefficients of 1/Gamma(z) = sum c_k z^k (Abramowitz & Stegun 6.1.34).
_RGAMMA_C = (
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
)


def _gamma_pair(mu):
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
    gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
    """
    gampl = 1.0 / math.gamma(1.0 + mu)
    gammi = 1.0 / math.gamma(1.0 - mu)
    if abs(mu) > 1e-2:
        gam1 = (gammi - gampl) / (2.0 * mu)
    else:
        # 1/Gamma(1+z) = sum_j c_{j+1} z^j; only odd j survive in gam1.
        c = _RGAMMA_C
        m2 = mu * mu
        gam1 = -(c[1] + m2 * (c[3] + m2 * (c[5] + m2 * c[7])))
    gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def _temme(x, mu):
    """K_mu(x), K_{mu+1}(x) by Temme's series, valid for small x."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _gamma_pair(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    mu2 = mu * mu
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Temme series failed to converge")
    return total, total1 * 2.0 / x


def _steed(x, mu):
    """K_mu(x), K_{mu+1}(x) by Steed's continued fraction, valid for x >= 2."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("continued fraction failed to converge")
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    kmu1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, kmu1


def kv_scalar(nu, x):
    """K_nu(x) for a single nu >= 0 and x > 0."""
    if x <= 0.0:
        raise ValueError(f"x must be positive, got {x}")
    nu = abs(nu)  # K_{-nu} = K_nu
    nl = int(nu + 0.5)
    mu = nu - nl
    if x > 745.0:
        return 0.0
    kmu, kmu1 = _temme(x, mu) if x <= _X_SPLIT else _steed(x, mu)
    for i in range(1, nl + 1):
        kmu, kmu1 = kmu1, (mu + i) * (2.0 / x) * kmu1 + kmu
    return kmu


def kv(nu, x):
    """Vectorised K_nu(x) over an array of positive x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    flat = out.reshape(-1)
    for i, xi in enumerate(x.reshape(-1)):
        flat[i] = kv_scalar(nu, float(xi))
    return out
