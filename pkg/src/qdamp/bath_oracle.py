"""Exact moment evolution for the harmonic oscillator on a discretised reservoir.

The reservoir continuum is cut into ``N`` frequency shells.  Shell ``j`` is
represented by one bosonic mode ``b_j = (x_j + i p_j) / sqrt(2)`` with
effective coupling ``g_j = |f(w_j)| w_j sqrt(4 pi dw_j)``, so that
``R = sqrt(2) sum_j g_j x_j`` and the discrete memory kernel is
``2 sum_j g_j^2 w_j cos(w_j t)``.

The total Hamiltonian is quadratic,

    H = (p - R)^2 / 2m + m w^2 q^2 / 2 + sum_j w_j (x_j^2 + p_j^2 - 1) / 2,

so first and second moments of ``z = (q, p, x_1, p_1, ..., x_N, p_N)`` evolve
in closed form under ``S(t) = exp(t A)`` with ``A = J H_sym``.  Every
observable used here is quadratic, so Fock initial states (which are not
Gaussian) are handled exactly through their moments as well.

Normal ordering follows the convention of expressing all operators through the
*initial* reservoir ladder operators: the propagated image of the initial
reservoir vacuum fluctuations is carried along in
:attr:`CovarianceState.vacuum` and subtracted on request.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cholesky, eigh, expm, solve_triangular

from .coupling import CouplingSpec, bose
from .dynamics import Method, OscillatorParams, Potential, Trajectory
from .errors import ExponentialNonConvergence, NonHarmonicPotential
from .spectra import EnergyForm


class GridStrategy(enum.Enum):
    UNIFORM = "uniform"
    GAUSS_LEGENDRE = "gauss-legendre"


@dataclass(frozen=True)
class ModeGrid:
    frequencies: np.ndarray
    couplings: np.ndarray
    weights: np.ndarray
    cutoff: float

    def __len__(self):
        return len(self.frequencies)

    @property
    def recurrence_time(self) -> float:
        """``2 pi / max(dw)``: beyond it the finite bath returns energy."""
        return 2 * math.pi / float(np.max(self.weights))

    def kernel(self, t):
        """Memory kernel reconstructed from the discrete modes."""
        t = np.asarray(t, dtype=float)
        w, g = self.frequencies, self.couplings
        out = np.cos(np.multiply.outer(t, w)) @ (2 * g**2 * w)
        return out if out.ndim else float(out)

    def to_csv(self, stream) -> None:
        wr = csv.writer(stream, lineterminator="\n")
        wr.writerow(["omega", "g", "weight"])
        for row in zip(self.frequencies, self.couplings, self.weights):
            wr.writerow([f"{x:.17g}" for x in row])


def build_mode_grid(spec: CouplingSpec, n_modes: int,
                    strategy: GridStrategy = GridStrategy.UNIFORM) -> ModeGrid:
    """Discretise ``(0, cutoff]`` into ``n_modes`` shells.

    ``UNIFORM`` uses midpoints of equal cells; ``GAUSS_LEGENDRE`` uses the
    Gauss-Legendre nodes and weights mapped onto the interval.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    lam = spec.cutoff
    if strategy is GridStrategy.UNIFORM:
        dw = np.full(n_modes, lam / n_modes)
        w = (np.arange(n_modes) + 0.5) * (lam / n_modes)
    else:
        x, wt = np.polynomial.legendre.leggauss(n_modes)
        w = 0.5 * lam * (x + 1)
        dw = 0.5 * lam * wt
    g = np.abs(spec.amplitude(w, 1.0)) * np.sqrt(4 * np.pi * dw)
    return ModeGrid(w, g, dw, lam)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal ``J`` with blocks ``[[0, 1], [-1, 0]]`` for ``n_modes + 1`` pairs."""
    return np.kron(np.eye(n_modes + 1), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _apply_j(M: np.ndarray) -> np.ndarray:
    """``M @ J`` without forming ``J``."""
    out = np.empty_like(M)
    out[:, 0::2] = -M[:, 1::2]
    out[:, 1::2] = M[:, 0::2]
    return out


@dataclass(frozen=True)
class LinearSystem:
    """Heisenberg generator ``dz/dt = A z`` of the full quadratic Hamiltonian."""

    params: OscillatorParams
    grid: ModeGrid
    hamiltonian: np.ndarray = field(repr=False)   # symmetric H_sym, H = z.H_sym.z / 2 + const
    generator: np.ndarray = field(repr=False)     # A = J H_sym
    velocity: np.ndarray = field(repr=False)      # c with m dq/dt = c.z  (c.z = p - R)

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    @property
    def symplectic_form(self) -> np.ndarray:
        return symplectic_form(len(self.grid))


def build_generator(params: OscillatorParams, grid: ModeGrid) -> LinearSystem:
    """Assemble ``A`` reproducing ``dq/dt = (p - R)/m``, ``dp/dt = -m w^2 q`` and
    ``db_j/dt = -i w_j b_j + i g_j dq/dt``.

    ``p - R`` couples ``p`` to every ``x_j``, so ``A`` has one dense row and
    column; everything else is 2x2 blocks.
    """
    if params.potential is not Potential.HARMONIC:
        raise NonHarmonicPotential("the exact oracle needs the harmonic potential")
    n = len(grid)
    dim = 2 * (n + 1)
    c = np.zeros(dim)
    c[1] = 1.0
    c[2::2] = -math.sqrt(2) * grid.couplings
    diag = np.empty(dim)
    diag[0] = params.mass * params.omega**2
    diag[1] = 0.0
    diag[2::2] = grid.frequencies
    diag[3::2] = grid.frequencies
    h = np.outer(c, c) / params.mass + np.diag(diag)
    a = np.empty_like(h)
    # J @ h: row 2k <- row 2k+1, row 2k+1 <- -row 2k
    a[0::2] = h[1::2]
    a[1::2] = -h[0::2]
    return LinearSystem(params, grid, h, a, c)


class BathKind(enum.Enum):
    VACUUM = "vacuum"
    QUANTA = "quanta"
    THERMAL = "thermal"


@dataclass(frozen=True)
class BathInitState:
    kind: BathKind = BathKind.VACUUM
    quanta: tuple[int, ...] = ()
    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if any(int(i) != i or i < 0 for i in self.quanta):
            raise ValueError("quanta must be non-negative mode indices")

    @classmethod
    def vacuum(cls) -> "BathInitState":
        return cls()

    @classmethod
    def with_quanta(cls, indices: Sequence[int]) -> "BathInitState":
        return cls(BathKind.QUANTA, tuple(int(i) for i in indices))

    @classmethod
    def thermal(cls, temperature: float) -> "BathInitState":
        return cls(BathKind.THERMAL, temperature=float(temperature))

    def occupations(self, grid: ModeGrid) -> np.ndarray:
        occ = np.zeros(len(grid))
        if self.kind is BathKind.QUANTA:
            for i in self.quanta:
                if i >= len(grid):
                    raise IndexError(f"mode index {i} out of range for {len(grid)} modes")
                occ[i] += 1
        elif self.kind is BathKind.THERMAL:
            occ = bose(grid.frequencies, self.temperature)
        return occ


@dataclass(frozen=True)
class CovarianceState:
    """Means and symmetrised central second moments of ``z``.

    ``vacuum`` is the part of ``cov`` that stems from the initial reservoir
    vacuum; ``cov - vacuum`` holds the moments normal-ordered with respect to
    the initial reservoir operators.
    """

    mean: np.ndarray
    cov: np.ndarray
    vacuum: np.ndarray
    time: float = 0.0

    @property
    def normal_cov(self) -> np.ndarray:
        return self.cov - self.vacuum

    def second_moments(self, normal_order: bool = False) -> np.ndarray:
        c = self.normal_cov if normal_order else self.cov
        return c + np.outer(self.mean, self.mean)


def init_state(params: OscillatorParams, grid: ModeGrid, n: int,
               bath: BathInitState = BathInitState()) -> CovarianceState:
    """Oscillator Fock level ``n`` times the requested reservoir state; all means zero."""
    if int(n) != n or n < 0:
        raise ValueError("oscillator level must be a non-negative integer")
    m, w = params.mass, params.omega
    occ = bath.occupations(grid)
    d = np.empty(2 * (len(grid) + 1))
    d[0] = (2 * n + 1) / (2 * m * w)
    d[1] = (2 * n + 1) * m * w / 2
    d[2::2] = occ + 0.5
    d[3::2] = occ + 0.5
    vac = np.zeros_like(d)
    vac[2:] = 0.5
    return CovarianceState(np.zeros_like(d), np.diag(d), np.diag(vac), 0.0)


@dataclass(frozen=True)
class SpectralPropagator:
    """Closed-form ``exp(t A)`` from one symmetric eigendecomposition.

    With ``H_sym = U^T U`` (Cholesky; ``H_sym`` is positive definite for the
    harmonic potential) the generator is similar to the antisymmetric
    ``K = U J U^T``, and

        exp(t A) = U^{-1} [cos(W t) + K W^{-1} sin(W t)] U,   W = sqrt(-K^2).

    ``W`` follows from ``eigh(K K^T) = V W^2 V^T``.  Unlike a Pade
    approximant, cost and accuracy do not degrade with ``t``; each ``S(t)``
    is one dense product.
    """

    left_cos: np.ndarray = field(repr=False)   # U^{-1} V
    left_sin: np.ndarray = field(repr=False)   # U^{-1} K V
    right: np.ndarray = field(repr=False)      # V^T U
    frequencies: np.ndarray = field(repr=False)

    def _weights(self, t):
        w = self.frequencies
        cos = np.cos(w * t)
        with np.errstate(invalid="ignore", divide="ignore"):
            sin = np.where(w > 0, np.sin(w * t) / np.where(w > 0, w, 1.0), t)
        return cos, sin

    def __call__(self, t: float) -> np.ndarray:
        cos, sin = self._weights(t)
        return (self.left_cos * cos + self.left_sin * sin) @ self.right

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        """``exp(t A) @ x`` in O(dim^2)."""
        cos, sin = self._weights(t)
        r = self.right @ x
        return self.left_cos @ (cos * r) + self.left_sin @ (sin * r)


def spectral_propagator(sys: LinearSystem) -> SpectralPropagator:
    try:
        u = cholesky(sys.hamiltonian, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ExponentialNonConvergence("Hamiltonian matrix is not positive definite") from exc
    k = _apply_j(u) @ u.T
    k = 0.5 * (k - k.T)
    w2, vecs = eigh(k @ k.T, check_finite=False)
    if not np.all(np.isfinite(w2)):
        raise ExponentialNonConvergence("normal-mode decomposition failed")
    left_cos = solve_triangular(u, vecs, check_finite=False)
    left_sin = solve_triangular(u, k @ vecs, check_finite=False)
    return SpectralPropagator(left_cos, left_sin, vecs.T @ u, np.sqrt(np.clip(w2, 0.0, None)))


def normal_mode_frequencies(sys: LinearSystem) -> np.ndarray:
    """Frequencies of the coupled system, ascending, each listed once per pair."""
    return spectral_propagator(sys).frequencies[0::2]


def propagator(sys: LinearSystem, t: float, method: str = "spectral") -> np.ndarray:
    """``exp(t A)``.

    ``method="spectral"`` uses :class:`SpectralPropagator`; ``"pade"`` uses
    scaling and squaring with a Pade approximant (scipy), whose rounding
    error grows with the largest phase ``t * max(w_j)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if method == "spectral":
        s = spectral_propagator(sys)(t)
    elif method == "pade":
        s = expm(t * sys.generator)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(s)):
        raise ExponentialNonConvergence(f"matrix exponential is not finite at t = {t}")
    return s


def evolve(sys: LinearSystem, state: CovarianceState, t: float,
           method: str = "spectral") -> CovarianceState:
    """Advance the state by ``t``: mean <- S mean, cov <- S cov S^T."""
    if t == 0:
        return state
    s = propagator(sys, t, method)
    return CovarianceState(s @ state.mean, s @ state.cov @ s.T, s @ state.vacuum @ s.T,
                           state.time + t)


def symplectic_error(s: np.ndarray) -> float:
    """``max |S J S^T - J|``."""
    j = symplectic_form(s.shape[0] // 2 - 1)
    return float(np.max(np.abs(_apply_j(s) @ s.T - j)))


def uncertainty_min_eigenvalue(state: CovarianceState) -> float:
    """Smallest eigenvalue of ``cov + i J / 2``; non-negative for physical states."""
    j = symplectic_form(state.cov.shape[0] // 2 - 1)
    return float(np.linalg.eigvalsh(state.cov + 0.5j * j).min())


def _osc_energy_from(mom, params, c, form):
    m, w = params.mass, params.omega
    pot = 0.5 * m * w**2 * mom[0, 0]
    if form is EnergyForm.CANONICAL:
        return mom[1, 1] / (2 * m) + pot
    return float(c @ mom @ c) / (2 * m) + pot


def oscillator_energy(state: CovarianceState, sys: LinearSystem,
                      form: EnergyForm = EnergyForm.CANONICAL,
                      normal_order: bool = False) -> float:
    """Oscillator energy in canonical (``p^2/2m``) or kinetic (``m qdot^2/2``) form.

    With ``normal_order`` the initial-reservoir vacuum contribution is removed.
    """
    mom = state.second_moments(normal_order)
    return float(_osc_energy_from(mom, sys.params, sys.velocity, form))


def bath_energy(state: CovarianceState, grid: ModeGrid, normal_order: bool = True) -> float:
    """``sum_j w_j <b_j^dag b_j>``.

    ``normal_order=True`` orders with respect to the initial reservoir
    operators (the convention under which a relaxed oscillator hands
    ``(n + 1/2) w`` to the reservoir); ``False`` uses the instantaneous
    ``b_j^dag b_j``.  The two agree at ``t = 0``.
    """
    mom = state.second_moments(normal_order)
    d = np.diagonal(mom)[2:]
    occ = 0.5 * (d[0::2] + d[1::2]) - (0.0 if normal_order else 0.5)
    return float(grid.frequencies @ occ)


def total_energy(state: CovarianceState, sys: LinearSystem) -> float:
    """``<H>`` including the ``<R^2>/2m`` cross term; conserved by :func:`evolve`."""
    mom = state.second_moments(False)
    return 0.5 * float(np.sum(sys.hamiltonian * mom)) - 0.5 * float(np.sum(sys.grid.frequencies))


def noise_mean(state: CovarianceState, grid: ModeGrid, t: float) -> float:
    """``<xi(t)>`` for the noise built from the state's reservoir means at ``t = 0``.

    ``xi(t) = i sum_j w_j g_j (b_j e^{-i w_j t} - b_j^dag e^{i w_j t})``.
    """
    mu = state.mean[2:]
    b = (mu[0::2] + 1j * mu[1::2]) / math.sqrt(2)
    z = b * np.exp(-1j * grid.frequencies * t)
    return float(-2 * np.sum(grid.frequencies * grid.couplings * z.imag))


@dataclass(frozen=True)
class EnergySeries:
    times: np.ndarray
    osc_canonical: np.ndarray
    osc_kinetic: np.ndarray
    bath: np.ndarray
    total: np.ndarray
    q_mean: np.ndarray
    p_mean: np.ndarray
    symplectic_error: np.ndarray
    normal_order: bool

    def to_csv(self, stream) -> None:
        wr = csv.writer(stream, lineterminator="\n")
        wr.writerow(["t", "E_osc_canonical", "E_osc_kinetic", "E_bath", "E_total"])
        for row in zip(self.times, self.osc_canonical, self.osc_kinetic, self.bath, self.total):
            wr.writerow([f"{x:.17g}" for x in row])

    def trajectory(self) -> Trajectory:
        return Trajectory(self.times, self.q_mean, self.p_mean, Method.CLOSED_FORM,
                          label="discretized-bath oracle")


def energy_series(sys: LinearSystem, state: CovarianceState, times,
                  *, normal_order: bool = True, check_symplectic: bool = False) -> EnergySeries:
    """Energies at the requested ``times`` (measured from ``state.time``).

    The normal-mode decomposition is done once; each sample then costs two
    dense products.  Only diagonal entries and one quadratic form of the
    covariance are needed, so the full covariance is never assembled.
    Oscillator and reservoir energies honour ``normal_order``; the total
    energy is always the plain ``<H>``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    prop = spectral_propagator(sys)
    p = sys.params
    w_diag = np.diagonal(sys.hamiltonian) - np.square(sys.velocity) / p.mass
    c = sys.velocity
    cov0, vac0 = state.cov, state.vacuum
    diag0 = (np.count_nonzero(cov0 - np.diag(np.diagonal(cov0))) == 0
             and np.count_nonzero(vac0 - np.diag(np.diagonal(vac0))) == 0)
    freqs = sys.grid.frequencies

    def moments(s, base):
        if diag0:
            sb = s * np.diagonal(base)
        else:
            sb = s @ base
        cs = c @ s
        return np.einsum("ij,ij->i", sb, s), float(cs @ (sb.T @ c) if not diag0 else (cs * np.diagonal(base)) @ cs)

    n_out = len(times)
    out = {k: np.empty(n_out) for k in ("can", "kin", "bath", "tot", "q", "p", "sym")}
    for k, t in enumerate(times):
        s = prop(t)
        mean = s @ state.mean
        dg, ccc = moments(s, cov0)
        mu_c = float(c @ mean)
        dg_full = dg + mean**2
        ccc_full = ccc + mu_c**2
        out["tot"][k] = 0.5 * (ccc_full / p.mass + w_diag @ dg_full) - 0.5 * freqs.sum()
        if normal_order:
            dv, cv = moments(s, vac0)
            dg_use, ccc_use = dg_full - dv, ccc_full - cv
        else:
            dg_use, ccc_use = dg_full, ccc_full
        pot = 0.5 * p.mass * p.omega**2 * dg_use[0]
        out["can"][k] = dg_use[1] / (2 * p.mass) + pot
        out["kin"][k] = ccc_use / (2 * p.mass) + pot
        bd = dg_use[2:]
        out["bath"][k] = freqs @ (0.5 * (bd[0::2] + bd[1::2]) - (0.0 if normal_order else 0.5))
        out["q"][k], out["p"][k] = mean[0], mean[1]
        out["sym"][k] = symplectic_error(s) if check_symplectic else np.nan
    return EnergySeries(state.time + times, out["can"], out["kin"], out["bath"], out["tot"],
                        out["q"], out["p"], out["sym"], normal_order)


def oracle_mean_path(sys: LinearSystem, q0: float, p0: float, times) -> Trajectory:
    """Mean oscillator path with the reservoir means initially zero."""
    times = np.asarray(times, dtype=float)
    prop = spectral_propagator(sys)
    x0 = np.zeros(sys.dimension)
    x0[0], x0[1] = q0, p0
    means = np.array([prop.apply(t, x0) for t in times])
    v = means @ sys.velocity / sys.params.mass
    return Trajectory(times, means[:, 0], means[:, 1], Method.CLOSED_FORM, v_mean=v,
                      label="discretized-bath oracle")
