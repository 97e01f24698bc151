"""The reservoir viewed as a massless Klein-Gordon field with a source.

For an isotropic coupling every profile depends on ``r = |x|`` only, and the
angular integral of ``exp(-i k.x)`` gives ``4 pi sinc(k r)``.  With
``sinc(u) = sin(u) / u``:

    P(r) = 4 pi / sqrt(2 (2 pi)^3) int_0^L w^{5/2} Re f(w) sinc(w r) dw
    Q(r) = 4 pi / sqrt(2 (2 pi)^3) int_0^L w^{3/2} Im f(w) sinc(w r) dw

The field obeys ``Y'' - lap Y = 2 q'' Q + 2 q' P``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .bath_oracle import CovarianceState, ModeGrid
from .coupling import CouplingSpec
from .dynamics import Trajectory
from .errors import OutOfRange
from .quadrature import half_period_breakpoints, integrate

PREFACTOR = 4 * math.pi / math.sqrt(2 * (2 * math.pi) ** 3)
WINDOW = 12.0


@dataclass(frozen=True)
class FieldSource:
    r: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    cutoff: float

    def to_csv(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["r", "P", "Q"])
        for row in zip(self.r, self.P, self.Q):
            w.writerow([f"{x:.17g}" for x in row])

    def at(self, r: float) -> tuple[float, float]:
        if not self.r[0] <= r <= self.r[-1]:
            raise OutOfRange(f"r = {r} outside profile range [{self.r[0]}, {self.r[-1]}]")
        return float(np.interp(r, self.r, self.P)), float(np.interp(r, self.r, self.Q))


def _profile(spec: CouplingSpec, r: float, power: float, epsrel: float) -> float:
    pts = half_period_breakpoints(0.0, spec.cutoff, r, spec.kinks())
    probe = np.linspace(spec.cutoff / 64, spec.cutoff, 64)
    scale = spec.cutoff * float(np.max(np.abs(spec.amplitude(probe, power))))
    val, _ = integrate(
        lambda w: spec.amplitude(w, power) * np.sinc(w * r / np.pi),
        pts, epsabs=1e-15 * scale + np.finfo(float).tiny, epsrel=epsrel,
    )
    return PREFACTOR * float(val)


def source_profiles(spec: CouplingSpec, r_grid, *, epsrel: float = 1e-12) -> FieldSource:
    """Sample ``P`` and ``Q`` on ``r_grid``.

    The couplings handled here are real, so ``Q`` vanishes identically and is
    returned as exact zeros.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("r_grid must be a non-empty 1-D sequence")
    if np.any(r < 0):
        raise ValueError("r_grid values must be >= 0")
    p = np.array([_profile(spec, x, 2.5, epsrel) for x in r])
    return FieldSource(r, p, np.zeros_like(p), spec.cutoff)


def ohmic_profile_closed_form(beta: float, cutoff: float, r):
    """``P(r)`` for the Ohmic coupling: prefactor ``* (1 - cos(L r)) / r^2``, ``L^2/2`` at 0."""
    r = np.asarray(r, dtype=float)
    lr = cutoff * r
    with np.errstate(invalid="ignore", divide="ignore"):
        # 1 - cos(x) = 2 sin^2(x/2) avoids cancellation
        body = np.where(lr > 0, 2 * np.sin(0.5 * lr) ** 2 / np.where(r > 0, r, 1.0) ** 2,
                        0.5 * cutoff**2)
    out = math.sqrt(beta / (4 * math.pi**2)) * PREFACTOR * body
    return out if out.ndim else float(out)


def _distance(x, x_prime):
    d = np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)
    if d.ndim and d.shape[-1] == 3:
        return np.linalg.norm(d, axis=-1)
    return np.abs(d)


def commutator_kernel(modes: Union[ModeGrid, float], x, x_prime):
    """``[Y(x), Pi_Y(x')] / i`` with the mode sum restricted to the given modes.

    ``modes`` is a :class:`ModeGrid` (discrete shells) or a cutoff ``L``; for
    the latter the regularised delta is
    ``(sin(L d) - L d cos(L d)) / (2 pi^2 d^3)``, peaking at ``L^3 / (6 pi^2)``.
    Positions are scalars (radial distance) or 3-vectors along the last axis.
    """
    d = _distance(x, x_prime)
    if isinstance(modes, ModeGrid):
        w = modes.frequencies
        shell = 4 * np.pi * w**2 * modes.weights / (2 * np.pi) ** 3
        out = np.sinc(np.multiply.outer(d, w) / np.pi) @ shell
    else:
        lam = float(modes)
        if not lam > 0:
            raise ValueError("cutoff must be > 0")
        u = lam * np.asarray(d, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            far = (np.sin(u) - u * np.cos(u)) / (2 * np.pi**2 * np.where(u > 0, d, 1.0) ** 3)
        near = lam**3 / (6 * np.pi**2) * (1 - u**2 / 10 + u**4 / 280)
        out = np.where(u < 1e-2, near, far)
    return out if np.ndim(out) else float(out)


def commutator_normalization(modes: Union[ModeGrid, float], *, window: float = WINDOW,
                             epsrel: float = 1e-12) -> float:
    """Whole-space integral of :func:`commutator_kernel`.

    The bare integral is only conditionally convergent (the kernel decays as
    ``cos(L d) / d^2``), so it is taken against ``exp(-(d / a)^2)`` with
    ``a = window / L``.  The window changes the result by about
    ``exp(-(window / 2)^2)``.
    """
    lam = modes.cutoff if isinstance(modes, ModeGrid) else float(modes)
    a = window / lam
    rmax = 7 * a
    pts = half_period_breakpoints(0.0, rmax, lam)

    def integrand(r):
        return 4 * np.pi * r**2 * commutator_kernel(modes, r, 0.0) * np.exp(-(r / a) ** 2)

    val, _ = integrate(integrand, pts, epsabs=1e-14, epsrel=epsrel)
    return float(val)


@dataclass(frozen=True)
class EnergyIdentity:
    lhs: float
    rhs: float
    residual: float


def bath_energy_identity(grid: ModeGrid, state: CovarianceState) -> EnergyIdentity:
    """Compare ``sum w_j <b_j^dag b_j>`` with the field energy ``<Pi^2/2 + |grad Y|^2/2>``.

    Each shell is one real field mode with ``Y_j = x_j / sqrt(w_j)``,
    ``Pi_j = sqrt(w_j) p_j`` and gradient factor ``|k_j| = w_j``.  Both sides
    are normal ordered with respect to the instantaneous reservoir operators.
    """
    mom = np.diagonal(state.cov)[2:] + state.mean[2:] ** 2
    xx, pp = mom[0::2], mom[1::2]
    w = grid.frequencies
    lhs = float(w @ (0.5 * (xx + pp) - 0.5))
    yy = xx / w
    pipi = pp * w
    rhs = float(np.sum(0.5 * pipi + 0.5 * w**2 * yy) - 0.5 * np.sum(w))
    return EnergyIdentity(lhs, rhs, abs(lhs - rhs))


def kg_source_term(traj: Trajectory, source: FieldSource, r: float, t: float) -> float:
    """``2 q''(t) Q(r) + 2 q'(t) P(r)`` from a sampled trajectory.

    ``q'`` is taken from the stored velocities when present, otherwise from
    second-order finite differences; ``q''`` is the finite-difference
    derivative of ``q'``.  Both are interpolated linearly in ``t``.
    """
    times = np.asarray(traj.times)
    if not times[0] <= t <= times[-1]:
        raise OutOfRange(f"t = {t} outside trajectory range [{times[0]}, {times[-1]}]")
    if len(times) < 3:
        raise ValueError("trajectory needs at least three samples")
    qd = traj.v_mean if traj.v_mean is not None else np.gradient(traj.q_mean, times, edge_order=2)
    qdd = np.gradient(qd, times, edge_order=2)
    p, q = source.at(r)
    return 2 * float(np.interp(t, times, qdd)) * q + 2 * float(np.interp(t, times, qd)) * p
