"""Numerical laboratory for generalized Grushin operators: geometry, Poincare
constants, heat kernels and one-dimensional diffusions."""

__version__ = "0.1.0"
