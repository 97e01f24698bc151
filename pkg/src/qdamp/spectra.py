"""Long-time energy partition between the oscillator and the reservoir.

The building blocks are the two response integrals

    I1 = int_0^inf dx / ((w^2 - x^2)^2 + g^2 x^2)      = pi / (2 g w^2)
    I2 = int_0^inf x^2 dx / ((w^2 - x^2)^2 + g^2 x^2)  = pi / (2 g)

with ``g = beta / m``.  Both closed forms are exact for every ``g > 0``; the
quadrature route is kept as an independent check.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingSpec, bose
from .dynamics import OscillatorParams, omega1
from .quadrature import integrate

EPSREL = 1e-11


class EnergyForm(enum.Enum):
    CANONICAL = "canonical"   # p^2 / 2m + m w^2 q^2 / 2
    KINETIC = "kinetic"       # m qdot^2 / 2 + m w^2 q^2 / 2


@dataclass(frozen=True)
class ResponseIntegrals:
    I1: float
    I2: float
    gamma: float
    I1_closed: float
    I2_closed: float


def _check(omega, m, beta):
    if not (omega > 0 and m > 0 and beta > 0):
        raise ValueError(f"need omega, m, beta > 0 (got {omega}, {m}, {beta})")


def _resonance_breaks(omega, gamma):
    """Breakpoints on [0, omega] and in the mapped tail variable u = omega / x."""
    widths = gamma * np.array([0.5, 2.0, 8.0, 32.0])
    low = [0.0, omega] + [omega - w for w in widths if w < omega]
    tail = [0.0, 1.0] + [omega / (omega + w) for w in widths]
    return np.unique(low), np.unique(tail)


def _semi_infinite(fn_low, fn_tail, omega, gamma, epsrel=EPSREL):
    low, tail = _resonance_breaks(omega, gamma)
    a, _ = integrate(fn_low, low, epsabs=0.0, epsrel=epsrel)
    b, _ = integrate(fn_tail, tail, epsabs=0.0, epsrel=epsrel)
    return float(a + b)


def response_integrals(omega: float, m: float, beta: float) -> ResponseIntegrals:
    """Evaluate I1 and I2 by quadrature, returned next to their closed forms.

    ``[0, omega]`` is integrated directly; ``[omega, inf)`` is mapped with
    ``x = omega / u`` onto ``(0, 1]`` where both integrands stay bounded.
    """
    _check(omega, m, beta)
    g = beta / m
    w2 = omega**2

    def den(x):
        return (w2 - x**2) ** 2 + g**2 * x**2

    def den_u(u):
        # den(omega/u) * u^4 / omega^2
        return w2 * (u**2 - 1) ** 2 + g**2 * u**2

    i1 = _semi_infinite(lambda x: 1.0 / den(x), lambda u: u**2 / (omega * den_u(u)), omega, g)
    i2 = _semi_infinite(lambda x: x**2 / den(x), lambda u: omega / den_u(u), omega, g)
    return ResponseIntegrals(i1, i2, g, math.pi / (2 * g * w2), math.pi / (2 * g))


def _require_underdamped(omega, m, beta):
    omega1(OscillatorParams(m, omega, beta))


def _check_n(n):
    if int(n) != n or n < 0:
        raise ValueError(f"quantum number must be a non-negative integer, got {n}")


def asymptotic_bath_energy(n: int, omega: float, m: float, beta: float,
                           *, method: str = "quadrature") -> float:
    """Normal-ordered reservoir energy after the oscillator has relaxed.

    ``(beta w^3 / pi m)(n + 1/2) I1 + (beta w / pi m)(n + 1/2) I2``, which the
    closed forms reduce to ``(n + 1/2) omega`` for any friction.
    ``method`` selects ``"quadrature"`` or ``"closed_form"`` integrals.
    """
    _check_n(n)
    _check(omega, m, beta)
    _require_underdamped(omega, m, beta)
    if method == "quadrature":
        r = response_integrals(omega, m, beta)
        i1, i2 = r.I1, r.I2
    elif method == "closed_form":
        g = beta / m
        i1, i2 = math.pi / (2 * g * omega**2), math.pi / (2 * g)
    else:
        raise ValueError(f"unknown method {method!r}")
    pref = beta * (n + 0.5) / (math.pi * m)
    return pref * omega**3 * i1 + pref * omega * i2


def residual_oscillator_energy(n: int, omega: float, m: float, beta: float,
                               form: EnergyForm = EnergyForm.CANONICAL) -> float:
    """Normal-ordered oscillator energy left at ``t -> inf``.

    Canonical form: ``beta^2 (n + 1/2) / (2 m^2 omega)``, coming from the
    canonical momentum settling at ``-beta q(0)``.  Kinetic form: zero.
    """
    _check_n(n)
    if not (omega > 0 and m > 0 and beta >= 0):
        raise ValueError("need omega, m > 0 and beta >= 0")
    if beta > 0:
        _require_underdamped(omega, m, beta)
    if form is EnergyForm.KINETIC:
        return 0.0
    return beta**2 * (n + 0.5) / (2 * m**2 * omega)


@dataclass(frozen=True)
class ThermalAsymptoticEnergy:
    first_term: float
    second_term: float
    weak_damping_reference: float

    @property
    def total(self) -> float:
        return self.first_term + self.second_term


def thermal_asymptotic_energy(temperature: float, omega: float, m: float,
                              beta: float) -> ThermalAsymptoticEnergy:
    """Long-time kinetic-form oscillator energy in a thermal reservoir, as printed.

    Evaluates both Bose-weighted terms

        (2 beta / pi m^2) int x   / (D(x) (e^{x/T} - 1)) dx
        (2 beta / pi m^2) int x^3 / (D(x) (e^{x/T} - 1)) dx

    with ``D(x) = (w^2 - x^2)^2 + (beta/m)^2 x^2``, and the weak-damping
    reference ``n(omega) * omega``.  The two printed terms carry different
    powers of frequency, so the total is not dimensionally homogeneous; it is
    reported as printed and compared against the exact oracle elsewhere.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    _check(omega, m, beta)
    _require_underdamped(omega, m, beta)
    if temperature == 0:
        return ThermalAsymptoticEnergy(0.0, 0.0, 0.0)
    g = beta / m
    w2 = omega**2
    T = temperature

    def xbose(x):
        # x * n(x), finite as x -> 0
        y = x / T
        with np.errstate(over="ignore", invalid="ignore"):
            out = x / np.expm1(y)
        return np.where(y < 1e-12, T, out)

    def den(x):
        return (w2 - x**2) ** 2 + g**2 * x**2

    def den_u(u):
        return w2 * (u**2 - 1) ** 2 + g**2 * u**2

    def first_tail(u):
        x = omega / u
        # (x n(x) / D(x)) * omega / u^2
        return xbose(x) * u**2 / (omega * den_u(u))

    def second_tail(u):
        x = omega / u
        # (x^3 n(x) / D(x)) * omega / u^2, with D(omega/u) = omega^2 den_u(u) / u^4
        return xbose(x) * omega / den_u(u)

    with np.errstate(over="ignore"):
        a = _semi_infinite(lambda x: xbose(x) / den(x), first_tail, omega, g)
        b = _semi_infinite(lambda x: xbose(x) * x**2 / den(x), second_tail, omega, g)
    pref = 2 * beta / (math.pi * m**2)
    return ThermalAsymptoticEnergy(pref * a, pref * b, float(bose(omega, T) * omega))


def emission_lineshape(n: int, omega: float, m: float, coupling: CouplingSpec,
                       t: float, omega_k):
    """Per-frequency density of the decay probability ``|n> -> |n-1>`` at time ``t``.

    ``(n w / 2m) |f(w_k)|^2 4 pi w_k^2 sin^2((w_k - w) t / 2) / ((w_k - w)/2)^2``.
    Integrated over ``w_k`` it tends to ``Gamma * t`` for large ``t``.
    """
    _check_n(n)
    if not t > 0:
        raise ValueError("t must be > 0")
    wk = np.asarray(omega_k, dtype=float)
    detune = wk - omega
    # sin^2(d t/2) / (d/2)^2 == t^2 sinc^2(d t / 2 pi) with numpy's normalised sinc
    weight = t**2 * np.sinc(detune * t / (2 * np.pi)) ** 2
    out = (n * omega / (2 * m)) * coupling.power(wk, 2) * 4 * np.pi * weight
    return out if out.ndim else float(out)


def write_sweep_csv(stream, rows) -> None:
    """Rows of ``(param, value, energy_quadrature, energy_closed_form)``."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["param", "value", "energy_quadrature", "energy_closed_form"])
    for name, value, eq, ec in rows:
        w.writerow([name, f"{value:.17g}", f"{eq:.17g}", f"{ec:.17g}"])
