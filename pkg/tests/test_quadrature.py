import math

import numpy as np
import pytest

from qdamp.errors import QuadratureNonConvergence
from qdamp.quadrature import half_period_breakpoints, integrate


def test_polynomial_is_exact():
    val, err = integrate(lambda x: 3 * x**2 + 1, [0.0, 2.0])
    assert val == pytest.approx(10.0, rel=1e-14)
    assert err < 1e-10


def test_sine_half_period():
    val, _ = integrate(np.sin, [0.0, math.pi], epsrel=1e-13, epsabs=0)
    assert val == pytest.approx(2.0, rel=1e-13)


def test_fast_oscillation_with_half_period_breaks():
    t = 500.0
    pts = half_period_breakpoints(0.0, 10.0, t)
    val, _ = integrate(lambda x: np.cos(t * x), pts, epsabs=1e-12, epsrel=1e-12)
    assert val == pytest.approx(math.sin(10 * t) / t, abs=1e-11)


def test_narrow_lorentzian():
    g = 1e-4
    val, _ = integrate(lambda x: g / ((x - 1) ** 2 + g**2), [0.0, 1.0 - 10 * g, 1.0, 1.0 + 10 * g, 2.0],
                       epsabs=0, epsrel=1e-11)
    exact = 2 * math.atan(1 / g)
    assert val == pytest.approx(exact, rel=1e-10)


def test_complex_integrand():
    val, _ = integrate(lambda x: np.exp(1j * x), [0.0, math.pi / 2], epsabs=1e-14)
    assert val == pytest.approx(1 + 1j, abs=1e-13)


def test_non_convergence_raises():
    with pytest.raises(QuadratureNonConvergence):
        integrate(lambda x: 1 / np.abs(x - 0.3), [0.0, 1.0], epsabs=1e-12, epsrel=1e-12, limit=64)


def test_non_finite_raises():
    with pytest.raises(QuadratureNonConvergence):
        integrate(lambda x: np.full_like(x, np.nan), [0.0, 1.0])


def test_breakpoint_validation():
    with pytest.raises(ValueError):
        integrate(np.sin, [1.0])
    with pytest.raises(ValueError):
        integrate(np.sin, [1.0, 0.0])
    assert integrate(np.sin, [1.0, 1.0]) == (0.0, 0.0)


def test_half_period_breakpoints_spacing():
    pts = half_period_breakpoints(0.0, 10.0, 2.0, extra=(0.25,))
    assert pts[0] == 0.0 and pts[-1] == 10.0
    assert 0.25 in pts
    steps = np.diff(pts[pts != 0.25])
    assert np.allclose(steps[:-1], math.pi / 2)
    assert list(half_period_breakpoints(0.0, 1.0, 0.0)) == [0.0, 1.0]
