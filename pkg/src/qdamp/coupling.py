"""Coupling functions f(omega) and the friction kernel / noise they induce.

Units: hbar = c = k_B = 1.  The reservoir is isotropic, so every momentum-space
integral is reduced to ``4 pi omega^2 d omega`` before it is evaluated.  All
frequency integrals stop at the explicit hard cutoff ``spec.cutoff``.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AboveCutoff,
    GridMismatch,
    NonPositiveFrequency,
    TabulatedOutOfRange,
)
from .quadrature import half_period_breakpoints, integrate

EPSABS = 1e-10
EPSREL = 1e-8


class CouplingKind(enum.Enum):
    OHMIC = "ohmic"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class CouplingSpec:
    """A coupling function on ``(0, cutoff]``.

    Use :meth:`ohmic` or :meth:`tabulated` rather than the constructor.
    Tabulated couplings are linearly interpolated and vanish outside the
    sampled range.
    """

    kind: CouplingKind
    cutoff: float
    beta: float = 0.0
    frequencies: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ValueError(f"cutoff must be positive and finite, got {self.cutoff}")
        if self.kind is CouplingKind.OHMIC:
            if not self.beta > 0:
                raise ValueError(f"Ohmic friction beta must be > 0, got {self.beta}")
        else:
            w = np.asarray(self.frequencies, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if w.size == 0 or w.shape != v.shape:
                raise ValueError("tabulated coupling needs matching, non-empty samples")
            if np.any(np.diff(w) <= 0):
                raise ValueError("tabulated frequencies must be strictly increasing")
            if not np.all(np.isfinite(v)) or not np.all(np.isfinite(w)):
                raise ValueError("tabulated samples must be finite")

    @classmethod
    def ohmic(cls, beta: float, cutoff: float) -> "CouplingSpec":
        return cls(CouplingKind.OHMIC, float(cutoff), beta=float(beta))

    @classmethod
    def tabulated(cls, samples: Sequence[tuple[float, float]], cutoff: float) -> "CouplingSpec":
        w, v = zip(*samples) if len(samples) else ((), ())
        return cls(CouplingKind.TABULATED, float(cutoff),
                   frequencies=tuple(map(float, w)), values=tuple(map(float, v)))

    @property
    def is_zero(self) -> bool:
        return self.kind is CouplingKind.TABULATED and not any(self.values)

    def f(self, omega):
        """Vectorised ``f(omega)`` without range checks (interior use)."""
        omega = np.asarray(omega, dtype=float)
        if self.kind is CouplingKind.OHMIC:
            return np.sqrt(self.beta / (4 * np.pi**2)) * omega**-1.5
        return np.interp(omega, self.frequencies, self.values, left=0.0, right=0.0)

    def power(self, omega, k: int):
        """``|f(omega)|^2 * omega**k``, evaluated without cancelling singularities."""
        omega = np.asarray(omega, dtype=float)
        if self.kind is CouplingKind.OHMIC:
            return self.beta / (4 * np.pi**2) * omega ** (k - 3.0)
        return self.f(omega) ** 2 * omega**k

    def amplitude(self, omega, k: float):
        """``f(omega) * omega**k``."""
        omega = np.asarray(omega, dtype=float)
        if self.kind is CouplingKind.OHMIC:
            return np.sqrt(self.beta / (4 * np.pi**2)) * omega ** (k - 1.5)
        return self.f(omega) * omega**k

    def kinks(self) -> list[float]:
        if self.kind is CouplingKind.OHMIC:
            return []
        return [w for w in self.frequencies if 0 < w < self.cutoff]


def evaluate_coupling(spec: CouplingSpec, omega: float) -> float:
    """Return ``f(omega)``.

    >>> evaluate_coupling(CouplingSpec.ohmic(4 * math.pi**2, 10.0), 4.0)
    0.125
    """
    if not omega > 0:
        raise NonPositiveFrequency(f"frequency must be > 0, got {omega}")
    if omega > spec.cutoff:
        raise AboveCutoff(f"frequency {omega} exceeds cutoff {spec.cutoff}")
    if spec.kind is CouplingKind.TABULATED:
        if not spec.frequencies[0] <= omega <= spec.frequencies[-1]:
            raise TabulatedOutOfRange(
                f"frequency {omega} outside tabulated range "
                f"[{spec.frequencies[0]}, {spec.frequencies[-1]}]"
            )
    return float(spec.f(omega))


def kernel_spectral_density(spec: CouplingSpec, omega):
    """Cosine-transform density of the memory kernel, ``8 pi |f|^2 omega^3``."""
    return 8 * np.pi * spec.power(omega, 3)


def bose(omega, temperature: float):
    """Bose occupation; identically zero at ``temperature == 0``."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(omega / temperature)


def noise_spectral_density(spec: CouplingSpec, omega, temperature: float = 0.0):
    """Cosine-transform density of ``Re <xi(t) xi(0)>``: ``4 pi omega^4 |f|^2 (2 n + 1)``."""
    return 4 * np.pi * spec.power(omega, 4) * (2 * bose(omega, temperature) + 1)


def memory_kernel(spec: CouplingSpec, t: float, *, epsabs=EPSABS, epsrel=EPSREL) -> float:
    """Friction kernel ``gamma(t) = 8 pi int_0^cutoff |f|^2 w^3 cos(w t) dw``.

    For the Ohmic coupling this is ``(2 beta / pi) sin(cutoff t) / t``.
    Negative ``t`` is accepted; the kernel is even.
    """
    if spec.is_zero:
        return 0.0
    pts = half_period_breakpoints(0.0, spec.cutoff, t, spec.kinks())
    val, _ = integrate(
        lambda w: kernel_spectral_density(spec, w) * np.cos(w * t),
        pts, epsabs=epsabs, epsrel=epsrel,
    )
    return float(val)


def kernel_integral(spec: CouplingSpec, t_max: float, *, epsabs=EPSABS, epsrel=EPSREL) -> float:
    """``int_0^t_max gamma(t) dt``; tends to beta for the Ohmic coupling.

    The time integral is done analytically under the frequency integral,
    leaving ``8 pi int |f|^2 w^3 sin(w t_max) / w dw``.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if t_max * spec.cutoff < 100:
        warnings.warn(
            f"t_max * cutoff = {t_max * spec.cutoff:.3g} is not >> 1; "
            "the sum rule has not converged",
            RuntimeWarning, stacklevel=2,
        )
    if spec.is_zero or t_max == 0:
        return 0.0
    pts = half_period_breakpoints(0.0, spec.cutoff, t_max, spec.kinks())
    val, _ = integrate(
        lambda w: kernel_spectral_density(spec, w) * t_max * np.sinc(w * t_max / np.pi),
        pts, epsabs=epsabs, epsrel=epsrel,
    )
    return float(val)


def noise_correlation(spec: CouplingSpec, temperature: float, t: float,
                      *, epsabs=EPSABS, epsrel=EPSREL) -> complex:
    """Reservoir-noise autocorrelation ``<xi(t) xi(0)>``.

    ``4 pi int w^4 |f|^2 [(n+1) e^{-iwt} + n e^{iwt}] dw`` with Bose occupation
    ``n`` at ``temperature``.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if spec.is_zero:
        return 0j
    pts = half_period_breakpoints(0.0, spec.cutoff, t, spec.kinks())

    def integrand(w):
        n = bose(w, temperature)
        weight = 4 * np.pi * spec.power(w, 4)
        return weight * ((2 * n + 1) * np.cos(w * t) - 1j * np.sin(w * t))

    val, _ = integrate(integrand, pts, epsabs=epsabs, epsrel=epsrel)
    return complex(val)


@dataclass(frozen=True)
class MemoryKernelTable:
    """Samples of gamma(t) on the uniform grid ``t_k = k * dt``."""

    dt: float
    values: np.ndarray = field(repr=False)
    cutoff_used: float

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def __len__(self):
        return len(self.values)

    @classmethod
    def delta(cls, beta: float, dt: float, n: int) -> "MemoryKernelTable":
        """Memoryless limit ``gamma = 2 beta delta(t)`` folded into the first sample.

        With the half weight that the trapezoid rule puts on the ``t' = t``
        endpoint, the convolution then returns exactly ``beta * v(t)``.
        """
        values = np.zeros(n)
        values[0] = 2 * beta / dt
        return cls(dt, values, math.inf)

    def to_csv(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t", "gamma"])
        for t, g in zip(self.times, self.values):
            w.writerow([f"{t:.17g}", f"{g:.17g}"])

    def check_grid(self, times: np.ndarray) -> None:
        if len(times) > len(self.values):
            raise GridMismatch(
                f"kernel covers {len(self.values)} samples, time grid has {len(times)}"
            )
        if len(times) > 1:
            dt = np.diff(times)
            if not np.allclose(dt, self.dt, rtol=1e-9, atol=0):
                raise GridMismatch(
                    f"time grid must be uniform with step {self.dt}, "
                    f"got steps in [{dt.min()}, {dt.max()}]"
                )


def kernel_table(spec: CouplingSpec, t_max: float, dt: float) -> MemoryKernelTable:
    """Tabulate :func:`memory_kernel` on ``0, dt, ..., t_max``."""
    n = int(round(t_max / dt)) + 1
    values = np.array([memory_kernel(spec, k * dt) for k in range(n)])
    return MemoryKernelTable(dt, values, spec.cutoff)
