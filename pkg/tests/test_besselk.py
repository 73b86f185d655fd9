import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from gpshift.besselk import kv, kv_scalar


@pytest.mark.parametrize("nu", [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.7, 4.9])
@pytest.mark.parametrize("x", [1e-4, 0.01, 0.5, 1.99, 2.0, 2.01, 7.5, 40.0, 300.0])
def test_matches_scipy(nu, x):
    assert kv_scalar(nu, x) == pytest.approx(special.kv(nu, x), rel=1e-12)


@pytest.mark.parametrize("nu,x", [(0.3, 0.7), (1.0, 2.5), (2.2, 5.0)])
def test_integral_representation(nu, x):
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; the tail past t = 30 underflows
    val, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t), 0, 30.0, limit=200)
    assert kv_scalar(nu, x) == pytest.approx(val, rel=1e-10)


def test_half_integer_closed_form():
    x = np.linspace(0.1, 20, 50)
    assert np.allclose(kv(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-13)


def test_underflow_and_negative_order():
    assert kv_scalar(1.0, 800.0) == 0.0
    assert kv_scalar(-1.3, 2.0) == pytest.approx(kv_scalar(1.3, 2.0), rel=1e-14)


@given(st.floats(0.0, 5.0), st.floats(1e-3, 50.0))
def test_recurrence(nu, x):
    # K_{nu+1}(x) = K_{nu-1}(x) + (2 nu / x) K_nu(x)
    lhs = kv_scalar(nu + 1, x)
    rhs = kv_scalar(abs(nu - 1), x) + 2 * nu / x * kv_scalar(nu, x)
    assert lhs == pytest.approx(rhs, rel=1e-10)
