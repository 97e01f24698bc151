"""Mean dynamics of the damped particle.

Two routes are provided: the closed-form underdamped harmonic solution with a
memoryless (Ohmic) reservoir in its vacuum, and a Volterra integro-differential
solver for an arbitrary tabulated memory kernel and potential.

Momenta reported here are *canonical*.  Because ``dp/dt = -v'(q)`` exactly,
the canonical momentum differs from ``m dq/dt`` by the reservoir mean
``<R(t)>``, which is ``beta (q(t) - q0)`` in the memoryless limit.  The
kinetic momentum is stored separately as ``v_mean`` (a velocity).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .coupling import MemoryKernelTable
from .errors import OverdampedRegime, StepTooLarge


class Potential(enum.Enum):
    HARMONIC = "harmonic"
    FREE = "free"
    CUSTOM = "custom"


@dataclass(frozen=True)
class OscillatorParams:
    mass: float
    omega: float
    beta: float = 0.0
    potential: Potential = Potential.HARMONIC
    force_derivative: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")
        if self.potential is not Potential.FREE and not self.omega > 0:
            raise ValueError(f"frequency must be > 0, got {self.omega}")
        if not self.beta >= 0:
            raise ValueError(f"friction must be >= 0, got {self.beta}")
        if self.potential is Potential.CUSTOM and self.force_derivative is None:
            raise ValueError("a custom potential needs force_derivative = v'(q)")

    def dv(self, q):
        """Potential gradient ``v'(q)``."""
        if self.potential is Potential.HARMONIC:
            return self.mass * self.omega**2 * q
        if self.potential is Potential.FREE:
            return 0.0 * q
        return self.force_derivative(q)

    def v(self, q):
        if self.potential is Potential.HARMONIC:
            return 0.5 * self.mass * self.omega**2 * q**2
        if self.potential is Potential.FREE:
            return 0.0 * q
        raise NotImplementedError("potential energy is not available for custom potentials")


class Method(enum.Enum):
    CLOSED_FORM = "closed-form"
    VOLTERRA = "volterra"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    q_mean: np.ndarray
    p_mean: np.ndarray
    method: Method
    v_mean: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        n = len(self.times)
        if len(self.q_mean) != n or len(self.p_mean) != n:
            raise ValueError("times, q_mean and p_mean must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def to_csv(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t", "q", "p"])
        for row in zip(self.times, self.q_mean, self.p_mean):
            w.writerow([f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, stream, method: Method = Method.CLOSED_FORM) -> "Trajectory":
        rows = list(csv.reader(stream))
        if not rows or rows[0] != ["t", "q", "p"]:
            raise ValueError("trajectory CSV must start with header t,q,p")
        data = np.array(rows[1:], dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2], method)


def omega1(params: OscillatorParams) -> float:
    """Damped frequency ``sqrt(omega^2 - beta^2 / 4 m^2)``."""
    m, w, b = params.mass, params.omega, params.beta
    if b >= 2 * m * w:
        raise OverdampedRegime(
            f"beta = {b} >= 2 m omega = {2 * m * w}; only the underdamped case is supported"
        )
    return math.sqrt(w**2 - b**2 / (4 * m**2))


def mean_trajectory_ho(params: OscillatorParams, q0: float, p0: float, times) -> Trajectory:
    """Closed-form mean path of the underdamped oscillator, reservoir in vacuum."""
    if params.potential is not Potential.HARMONIC:
        raise ValueError("closed form needs the harmonic potential")
    w1 = omega1(params)
    m, b = params.mass, params.beta
    t = np.asarray(times, dtype=float)
    a = b / (2 * m)
    c = p0 / m + a * q0
    env = np.exp(-a * t)
    cos, sin = np.cos(w1 * t), np.sin(w1 * t)
    q = env * (q0 * cos + c * sin / w1)
    v = env * ((p0 / m) * cos - (q0 * w1 + a * c / w1) * sin)
    p = m * v + b * (q - q0)
    return Trajectory(t, q, p, Method.CLOSED_FORM, v_mean=v, label="closed form")


def cutoff_renormalized(params: OscillatorParams, cutoff: float) -> OscillatorParams:
    """Oscillator seen through a hard-cutoff Ohmic reservoir.

    At finite cutoff the kernel ``(2 beta / pi) sin(L t) / t`` acts as the
    memoryless friction plus a mass shift ``-2 beta / (pi L)``; the spring
    constant is unchanged.
    """
    k = params.mass * params.omega**2
    m = params.mass - 2 * params.beta / (math.pi * cutoff)
    if not m > 0:
        raise ValueError("cutoff too low: renormalised mass is not positive")
    return OscillatorParams(m, math.sqrt(k / m), params.beta, params.potential)


def envelope_bound(params: OscillatorParams, q0: float, p0: float, times) -> np.ndarray:
    m, b = params.mass, params.beta
    w1 = omega1(params)
    amp = abs(q0) + (abs(p0) / m + b * abs(q0) / (2 * m)) / w1
    return np.exp(-b * np.asarray(times) / (2 * m)) * amp


def solve_mean_path(params: OscillatorParams, kernel: MemoryKernelTable,
                    q0: float, p0: float, times) -> Trajectory:
    """Integrate ``m q'' + int_0^t gamma(t - s) q'(s) ds = -v'(q)`` for the mean.

    Time stepping is the implicit trapezoid rule on ``(q, q')``; the memory
    integral uses trapezoid weights with the half weight on ``s = t``, so a
    kernel from :meth:`MemoryKernelTable.delta` reproduces ``beta q'`` exactly.
    Nonlinear potentials use the semiclassical replacement
    ``<v'(q)> -> v'(<q>)``.  The canonical momentum follows from
    ``dp/dt = -v'(q)`` with the same trapezoid rule.
    """
    t = np.asarray(times, dtype=float)
    kernel.check_grid(t)
    n = len(t)
    dt = kernel.dt
    m = params.mass
    g = np.asarray(kernel.values, dtype=float)
    q = np.empty(n)
    v = np.empty(n)
    p = np.empty(n)
    q[0], v[0], p[0] = q0, p0 / m, p0
    horizon = t[-1] - t[0] if n > 1 else 0.0
    scale = max(abs(q0), abs(p0) / m * max(horizon, dt), np.finfo(float).tiny)
    c = 0.5 * dt * g[0]
    dv_prev = params.dv(q0)
    force_prev = -dv_prev - c * v[0]
    for k in range(n - 1):
        # memory integral at t[k+1] without the implicit s = t[k+1] term
        hist = dt * (0.5 * g[k + 1] * v[0] + g[k:0:-1] @ v[1:k + 1])
        qk, vk = q[k], v[k]

        def residual(vn):
            qn = qk + 0.5 * dt * (vk + vn)
            return m * (vn - vk) - 0.5 * dt * (force_prev - params.dv(qn) - hist - c * vn)

        guess = vk + dt * force_prev / m
        vscale = abs(guess) + scale / max(horizon, dt)
        try:
            vn = optimize.newton(residual, guess, x1=guess + 1e-4 * vscale,
                                 tol=1e-15 * vscale, rtol=1e-14, maxiter=100)
        except RuntimeError as exc:
            raise StepTooLarge(f"implicit step at t = {t[k + 1]:.6g} did not converge ({exc}); "
                               "reduce dt") from exc
        qn = qk + 0.5 * dt * (vk + vn)
        if not (math.isfinite(qn) and abs(qn) <= 1e6 * scale):
            raise StepTooLarge(
                f"|q| = {abs(qn):.3g} exceeds 1e6 x initial scale {scale:.3g} at t = {t[k + 1]:.6g}; "
                "reduce dt"
            )
        dv_new = params.dv(qn)
        q[k + 1], v[k + 1] = qn, vn
        p[k + 1] = p[k] - 0.5 * dt * (dv_prev + dv_new)
        dv_prev = dv_new
        force_prev = -dv_new - hist - c * vn
    return Trajectory(t, q, p, Method.VOLTERRA, v_mean=v, label="semiclassical mean path")


def mechanical_energy(params: OscillatorParams, traj: Trajectory) -> np.ndarray:
    """``m v^2 / 2 + v(q)`` along a trajectory that carries velocities."""
    if traj.v_mean is None:
        raise ValueError("trajectory has no velocities")
    return 0.5 * params.mass * traj.v_mean**2 + params.v(traj.q_mean)
