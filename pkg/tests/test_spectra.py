import io
import math

import numpy as np
import pytest
from scipy import integrate as spi

from qdamp.coupling import CouplingSpec, bose
from qdamp.errors import OverdampedRegime
from qdamp.spectra import (
    EnergyForm,
    asymptotic_bath_energy,
    emission_lineshape,
    residual_oscillator_energy,
    response_integrals,
    thermal_asymptotic_energy,
    write_sweep_csv,
)


@pytest.mark.parametrize("omega,m,beta", [(1.0, 1.0, 0.1), (2.5, 0.7, 0.01), (0.3, 3.0, 1.0)])
def test_response_integrals_closed_forms(omega, m, beta):
    r = response_integrals(omega, m, beta)
    assert r.I1 == pytest.approx(r.I1_closed, rel=1e-9)
    assert r.I2 == pytest.approx(r.I2_closed, rel=1e-9)
    assert r.I1_closed == pytest.approx(math.pi / (2 * (beta / m) * omega**2))


def test_response_integrals_against_scipy():
    omega, g = 1.0, 0.5
    den = lambda x: (omega**2 - x**2) ** 2 + g**2 * x**2
    i1 = spi.quad(lambda x: 1 / den(x), 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    i2 = spi.quad(lambda x: x**2 / den(x), 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    r = response_integrals(omega, 1.0, g)
    assert r.I1 == pytest.approx(i1, rel=1e-9)
    assert r.I2 == pytest.approx(i2, rel=1e-9)


def test_response_integrals_reference_value():
    r = response_integrals(1.0, 1.0, 0.1)
    assert r.I1 == pytest.approx(5 * math.pi, rel=1e-10)
    assert r.I2 == pytest.approx(5 * math.pi, rel=1e-10)


@pytest.mark.parametrize("n,omega,expected", [(0, 1.0, 0.5), (2, 2.0, 5.0)])
def test_asymptotic_bath_energy_values(n, omega, expected):
    for method in ("quadrature", "closed_form"):
        assert asymptotic_bath_energy(n, omega, 1.0, 0.1, method=method) == pytest.approx(expected, rel=1e-9)


def test_asymptotic_bath_energy_rejects_bad_input():
    with pytest.raises(OverdampedRegime):
        asymptotic_bath_energy(0, 1.0, 1.0, 2.5)
    with pytest.raises(ValueError):
        asymptotic_bath_energy(-1, 1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        asymptotic_bath_energy(0, 1.0, 1.0, 0.1, method="bogus")


def test_residual_oscillator_energy():
    assert residual_oscillator_energy(1, 1.0, 1.0, 0.05) == pytest.approx(0.05**2 * 1.5 / 2)
    assert residual_oscillator_energy(3, 2.0, 0.5, 0.1, EnergyForm.KINETIC) == 0.0
    assert residual_oscillator_energy(3, 2.0, 0.5, 0.0) == 0.0


def test_thermal_terms_against_scipy():
    omega, m, beta, T = 1.3, 0.8, 0.1, 0.9
    g = beta / m
    den = lambda x: (omega**2 - x**2) ** 2 + g**2 * x**2
    a = spi.quad(lambda x: x / den(x) / math.expm1(x / T), 0, 60, points=[omega], limit=500,
                 epsabs=0, epsrel=1e-12)[0]
    b = spi.quad(lambda x: x**3 / den(x) / math.expm1(x / T), 0, 60, points=[omega], limit=500,
                 epsabs=0, epsrel=1e-12)[0]
    pref = 2 * beta / (math.pi * m**2)
    th = thermal_asymptotic_energy(T, omega, m, beta)
    assert th.first_term == pytest.approx(pref * a, rel=1e-7)
    assert th.second_term == pytest.approx(pref * b, rel=1e-7)
    assert th.weak_damping_reference == pytest.approx(omega * float(bose(omega, T)))
    assert th.total == th.first_term + th.second_term


def test_thermal_weak_damping_limits():
    # as beta -> 0 the two terms tend to n/(m w) and n w / m
    omega, T = 2.0, 1.5
    n = float(bose(omega, T))
    th = thermal_asymptotic_energy(T, omega, 1.0, 1e-4)
    assert th.first_term == pytest.approx(n / omega, rel=1e-3)
    assert th.second_term == pytest.approx(n * omega, rel=1e-3)


def test_thermal_zero_temperature():
    th = thermal_asymptotic_energy(0.0, 1.0, 1.0, 0.1)
    assert th.total == 0.0


def test_emission_lineshape_integrates_to_golden_rule():
    spec = CouplingSpec.ohmic(0.01, 50.0)
    t = 200.0
    pts = np.concatenate([np.linspace(1e-6, 0.9, 50), np.linspace(0.9, 1.1, 400), np.linspace(1.1, 50, 400)])
    pts = np.unique(pts)
    total = sum(spi.quad(lambda w: emission_lineshape(1, 1.0, 1.0, spec, t, w), a, b, limit=200)[0]
                for a, b in zip(pts[:-1], pts[1:]))
    assert total / t == pytest.approx(0.01, rel=0.02)
    assert emission_lineshape(1, 1.0, 1.0, spec, t, 1.0) == pytest.approx(
        0.5 * 4 * math.pi * 0.01 / (4 * math.pi**2) * t**2)


def test_sweep_csv_header():
    buf = io.StringIO()
    write_sweep_csv(buf, [("n", 1, 1.5, 1.5)])
    assert buf.getvalue().splitlines() == ["param,value,energy_quadrature,energy_closed_form", "n,1,1.5,1.5"]
