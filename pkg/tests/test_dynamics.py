import io
import math

import numpy as np
import pytest

from qdamp.coupling import CouplingSpec, MemoryKernelTable, kernel_table
from qdamp.dynamics import (
    Method,
    OscillatorParams,
    Potential,
    Trajectory,
    cutoff_renormalized,
    envelope_bound,
    mean_trajectory_ho,
    mechanical_energy,
    omega1,
    solve_mean_path,
)
from qdamp.errors import GridMismatch, OverdampedRegime, StepTooLarge


def test_omega1_and_overdamped():
    assert omega1(OscillatorParams(1.0, 1.0, 0.6)) == pytest.approx(math.sqrt(1 - 0.09))
    with pytest.raises(OverdampedRegime):
        omega1(OscillatorParams(1.0, 1.0, 2.0))


def test_params_validation():
    with pytest.raises(ValueError):
        OscillatorParams(0.0, 1.0)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        OscillatorParams(1.0, 1.0, potential=Potential.CUSTOM)
    OscillatorParams(1.0, 0.0, potential=Potential.FREE)


def test_closed_form_solves_the_damped_equation():
    p = OscillatorParams(1.3, 0.8, 0.2)
    t = np.linspace(0, 10, 20001)
    tr = mean_trajectory_ho(p, 0.7, -0.4, t)
    h = t[1] - t[0]
    q = tr.q_mean
    qdd = (q[2:] - 2 * q[1:-1] + q[:-2]) / h**2
    qd = (q[2:] - q[:-2]) / (2 * h)
    resid = p.mass * qdd + p.beta * qd + p.mass * p.omega**2 * q[1:-1]
    assert np.max(np.abs(resid)) < 1e-6
    assert np.allclose(tr.v_mean[1:-1], qd, atol=1e-7)
    assert tr.q_mean[0] == pytest.approx(0.7)
    assert tr.v_mean[0] == pytest.approx(-0.4 / 1.3)
    assert tr.p_mean[0] == pytest.approx(-0.4)


def test_canonical_momentum_obeys_force_law():
    # dp/dt = -m w^2 q exactly for the canonical momentum
    p = OscillatorParams(1.0, 1.0, 0.3)
    t = np.linspace(0, 8, 16001)
    tr = mean_trajectory_ho(p, 1.0, 0.5, t)
    pd = np.gradient(tr.p_mean, t, edge_order=2)
    assert np.max(np.abs(pd + tr.q_mean)) < 1e-6


def test_undamped_limit():
    p = OscillatorParams(2.0, 3.0, 0.0)
    t = np.linspace(0, 5, 11)
    tr = mean_trajectory_ho(p, 1.0, 0.0, t)
    assert np.allclose(tr.q_mean, np.cos(3 * t))
    assert np.allclose(tr.p_mean, -6 * np.sin(3 * t))


def test_envelope_bounds_the_path():
    p = OscillatorParams(1.0, 1.0, 0.4)
    t = np.linspace(0, 30, 3001)
    tr = mean_trajectory_ho(p, 1.0, 1.0, t)
    assert np.all(np.abs(tr.q_mean) <= envelope_bound(p, 1.0, 1.0, t) + 1e-12)


def test_volterra_delta_kernel_second_order():
    p = OscillatorParams(1.0, 1.0, 0.2)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        t = dt * np.arange(int(round(5 / dt)) + 1)
        kern = MemoryKernelTable.delta(p.beta, dt, len(t))
        num = solve_mean_path(p, kern, 1.0, 0.0, t)
        ref = mean_trajectory_ho(p, 1.0, 0.0, t)
        errs.append(np.max(np.abs(num.q_mean - ref.q_mean)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)
    assert errs[-1] < 1e-5


def test_volterra_momentum_is_canonical():
    p = OscillatorParams(1.0, 1.0, 0.2)
    dt = 1e-3
    t = dt * np.arange(3001)
    num = solve_mean_path(p, MemoryKernelTable.delta(p.beta, dt, len(t)), 1.0, 0.0, t)
    ref = mean_trajectory_ho(p, 1.0, 0.0, t)
    assert np.max(np.abs(num.p_mean - ref.p_mean)) < 1e-5


def test_free_particle_velocity_decays():
    p = OscillatorParams(1.0, 0.0, 1.0, potential=Potential.FREE)
    dt = 1e-3
    t = dt * np.arange(2001)
    tr = solve_mean_path(p, MemoryKernelTable.delta(1.0, dt, len(t)), 0.0, 1.0, t)
    assert np.max(np.abs(tr.v_mean - np.exp(-t))) < 1e-6
    assert np.max(np.abs(tr.q_mean - (1 - np.exp(-t)))) < 1e-6


def test_finite_cutoff_kernel_matches_renormalised_closed_form():
    p = OscillatorParams(1.0, 1.0, 0.05)
    cutoff, dt = 1000.0, 1e-3
    t = dt * np.arange(1001)
    kern = kernel_table(CouplingSpec.ohmic(p.beta, cutoff), 1.0, dt)
    num = solve_mean_path(p, kern, 1.0, 0.0, t)
    ref = mean_trajectory_ho(cutoff_renormalized(p, cutoff), 1.0, 0.0, t)
    assert np.max(np.abs(num.q_mean - ref.q_mean)) < 1e-4


def test_anharmonic_energy_is_non_increasing():
    p = OscillatorParams(1.0, 1.0, 0.1, Potential.CUSTOM, force_derivative=lambda q: q + q**3)
    dt = 2e-3
    t = dt * np.arange(5001)
    tr = solve_mean_path(p, MemoryKernelTable.delta(p.beta, dt, len(t)), 1.0, 0.0, t)
    e = 0.5 * tr.v_mean**2 + 0.5 * tr.q_mean**2 + 0.25 * tr.q_mean**4
    assert np.max(np.diff(e)) < 1e-9
    assert e[-1] < 0.5 * e[0]


def test_mechanical_energy_helper():
    p = OscillatorParams(1.0, 1.0, 0.0)
    tr = mean_trajectory_ho(p, 1.0, 0.0, np.linspace(0, 3, 7))
    assert np.allclose(mechanical_energy(p, tr), 0.5)


def test_runaway_raises_step_too_large():
    p = OscillatorParams(1.0, 1.0, 0.0, Potential.CUSTOM, force_derivative=lambda q: -(q**3))
    dt = 0.05
    t = dt * np.arange(400)
    with pytest.raises(StepTooLarge):
        solve_mean_path(p, MemoryKernelTable.delta(0.0, dt, len(t)), 1.0, 0.0, t)


def test_grid_mismatch():
    p = OscillatorParams(1.0, 1.0, 0.1)
    kern = MemoryKernelTable.delta(0.1, 0.01, 5)
    with pytest.raises(GridMismatch):
        solve_mean_path(p, kern, 1.0, 0.0, 0.01 * np.arange(6))


def test_trajectory_csv_round_trip():
    tr = mean_trajectory_ho(OscillatorParams(1.0, 1.0, 0.1), 1.0, 0.0, np.linspace(0, 1, 5))
    buf = io.StringIO()
    tr.to_csv(buf)
    assert buf.getvalue().splitlines()[0] == "t,q,p"
    back = Trajectory.from_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.q_mean, tr.q_mean)
    assert np.array_equal(back.p_mean, tr.p_mean)
    assert back.method is Method.CLOSED_FORM
    with pytest.raises(ValueError):
        Trajectory.from_csv(io.StringIO("a,b\n1,2\n"))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), Method.VOLTERRA)
