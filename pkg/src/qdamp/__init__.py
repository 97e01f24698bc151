"""Minimal-coupling model of a quantum damped oscillator.

Memory kernels, mean dynamics, asymptotic energy partition, perturbative
transition rates and Klein-Gordon field profiles, all checked against an
exact discretised-reservoir moment oracle.
"""

from .bath_oracle import (
    BathInitState,
    CovarianceState,
    GridStrategy,
    LinearSystem,
    ModeGrid,
    build_generator,
    build_mode_grid,
    energy_series,
    evolve,
    init_state,
)
from .coupling import CouplingSpec, kernel_integral, memory_kernel, noise_correlation
from .dynamics import OscillatorParams, Potential, Trajectory, mean_trajectory_ho, solve_mean_path
from .errors import NumericalError, QdampError
from .spectra import EnergyForm, asymptotic_bath_energy, residual_oscillator_energy
from .transitions import RateReport, decay_rate_vacuum, rates_thermal

__version__ = "0.1.0"
