"""Discrete weighted Neumann forms, spectral gaps and Poincare constants."""
from .counterexamples import chi_log, chi_n, chi_n_energy, chi_n_report, chi_n_variance, eta
from .eigen import ConvergenceError, EigenResult, spectral_gap
from .forms import DiscreteForm, assemble_interval_form, assemble_region_form
from .grid import Axis, graded_axis, uniform_axis
from .poincare import (
    PoincareEstimate,
    family_region,
    fit_slope,
    interval_gap_exact,
    poincare_constant,
    poincare_sweep,
)
