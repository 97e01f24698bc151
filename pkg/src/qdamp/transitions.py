"""First-order transition probabilities of the oscillator in rotating-wave form.

The interaction ``-i sqrt(w/2m) sum_k [f a^dag b_k e^{i(w - w_k)t} - h.c.]``
(the ``R^2/2m`` term and the counter-rotating terms are dropped) gives, at
first order, transition probabilities weighted by

    sin^2((w_k - w) t / 2) / ((w_k - w) / 2)^2 -> 2 pi t delta(w_k - w).

Rates are probabilities per unit time.  The long-time replacement above is
flagged as valid once ``omega * t >= 50``.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bath_oracle import ModeGrid
from .coupling import CouplingKind, CouplingSpec, evaluate_coupling
from .errors import AboveCutoff, NonPositiveTemperature, PerturbationBreakdown

LONG_TIME = 50.0
WARN_PROBABILITY = 0.1


class Regime(enum.Enum):
    VACUUM = "vacuum"
    FOCK_BATH = "fock-bath"
    THERMAL = "thermal"


@dataclass(frozen=True)
class RateReport:
    gamma_down: float
    gamma_up: float
    regime: Regime
    temperature: float = 0.0
    validity: bool = True

    def __post_init__(self):
        if self.gamma_down < 0 or self.gamma_up < 0:
            raise ValueError("rates must be non-negative")


def _check_n(n):
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")


def _check_positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be > 0, got {v}")


def decay_rate_vacuum(n: int, omega: float, m: float, coupling: CouplingSpec) -> RateReport:
    """``gamma_down = 4 pi^2 w^3 n |f(w)|^2 / m``; ``n beta / m`` for the Ohmic coupling."""
    _check_n(n)
    _check_positive(omega=omega, m=m)
    f = evaluate_coupling(coupling, omega)
    if coupling.kind is CouplingKind.OHMIC:
        down = n * coupling.beta / m
    else:
        down = 4 * math.pi**2 * omega**3 * n * f**2 / m
    return RateReport(float(down), 0.0, Regime.VACUUM)


def rates_thermal(n: int, omega: float, m: float, beta: float, temperature: float) -> RateReport:
    """Ohmic rates in a thermal reservoir.

    ``gamma_down = (n beta / m) e^{w/T} / (e^{w/T} - 1)`` and
    ``gamma_up = ((n + 1) beta / m) / (e^{w/T} - 1)``, written with ``expm1``
    so that ``T -> 0`` reproduces the vacuum rates without overflow.
    """
    _check_n(n)
    _check_positive(omega=omega, m=m, beta=beta)
    if not temperature > 0:
        raise NonPositiveTemperature(
            f"temperature must be > 0, got {temperature}; use decay_rate_vacuum for T = 0"
        )
    x = omega / temperature
    down = (n * beta / m) / -math.expm1(-x)
    with np.errstate(over="ignore"):
        em1 = float(np.expm1(x))
    up = ((n + 1) * beta / m) / em1
    return RateReport(down, up, Regime.THERMAL, temperature)


def rates_fock_bath(n: int, quanta_frequencies: Sequence[float], omega: float, m: float,
                    beta: float, t: float) -> RateReport:
    """Ohmic rates when the reservoir holds single quanta at ``quanta_frequencies``.

    ``gamma_down`` is the vacuum rate ``n beta / m``.  Each quantum at ``w_l``
    adds ``((n + 1) w / 2m) |f(w_l)|^2 t sinc^2((w_l - w) t / 2)`` to
    ``gamma_up``; at resonance the probability is ``(n + 1) beta t^2 / (8 pi^2 m w^2)``.
    """
    _check_n(n)
    _check_positive(omega=omega, m=m, beta=beta, t=t)
    wl = np.asarray(quanta_frequencies, dtype=float)
    if np.any(wl <= 0):
        raise ValueError("quanta frequencies must be > 0")
    f2 = beta / (4 * math.pi**2 * wl**3)
    weight = t * np.sinc((wl - omega) * t / (2 * math.pi)) ** 2
    up = float(np.sum((n + 1) * omega / (2 * m) * f2 * weight))
    return RateReport(n * beta / m, up, Regime.FOCK_BATH, 0.0, omega * t >= LONG_TIME)


def finite_time_decay_probability(n: int, omega: float, m: float, coupling: CouplingSpec,
                                  t: float, grid: ModeGrid) -> float:
    """Probability of ``|n> -> |n-1>`` after time ``t`` with the reservoir in vacuum.

    ``(n w / 2m) sum_j 4 pi w_j^2 dw_j |f(w_j)|^2 sin^2((w_j - w) t/2) / ((w_j - w)/2)^2``
    over the mode grid.  Tends to ``gamma_down * t`` once ``w t >> 1`` and the
    grid resolves the ``1/t`` line width.  Warns above 0.1, where first order
    is no longer reliable.
    """
    _check_n(n)
    _check_positive(omega=omega, m=m, t=t)
    if omega > coupling.cutoff:
        raise AboveCutoff(f"frequency {omega} exceeds cutoff {coupling.cutoff}")
    if n == 0:
        return 0.0
    w, dw = grid.frequencies, grid.weights
    shell = 4 * np.pi * coupling.power(w, 2) * dw
    line = t**2 * np.sinc((w - omega) * t / (2 * np.pi)) ** 2
    prob = float(n * omega / (2 * m) * (shell @ line))
    if prob > 1:
        raise PerturbationBreakdown(f"first-order probability {prob:.3g} exceeds 1")
    if prob > WARN_PROBABILITY:
        warnings.warn(f"first-order probability {prob:.3g} > {WARN_PROBABILITY}; "
                      "perturbation theory is marginal", RuntimeWarning, stacklevel=2)
    return prob


def write_rates_csv(stream, rows) -> None:
    """Rows of ``(n, omega, m, beta, T, RateReport)``."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["n", "omega", "m", "beta", "T", "gamma_down", "gamma_up"])
    for n, omega, m, beta, temp, rep in rows:
        w.writerow([str(int(n))] + [f"{x:.17g}" for x in
                                    (omega, m, beta, temp, rep.gamma_down, rep.gamma_up)])
