"""Stability toolkit for channel flow of a conducting polymeric fluid.

Computes the stationary state of a plane-channel magnetohydrodynamic flow
of an incompressible viscoelastic fluid, the point spectrum of the
linearization around it for streamwise-periodic perturbations, and the
large-mode asymptotics of that spectrum together with the resulting
necessary stability criterion.
"""

from .asymptotics import (AsymptoticReport, VerificationRow,
                          VerificationTable, asymptotic_lambda,
                          drift_from_diagonals, drift_integral,
                          stability_criterion, travel_time, verify_spectrum)
from .base_state import BaseState, base_residual, solve_base_state
from .chebyshev import Grid, cgl_grid
from .model import PARAM_KEYS, ModelParams, params_from_dict
from .spectrum import (Eigenvalue, IntegratorConfig, SpectrumResult,
                       dispersion, find_eigenvalues)

__version__ = "1.0.0"

__all__ = [
    "AsymptoticReport", "BaseState", "Eigenvalue", "Grid",
    "IntegratorConfig", "ModelParams", "PARAM_KEYS", "SpectrumResult",
    "VerificationRow", "VerificationTable", "asymptotic_lambda",
    "base_residual", "cgl_grid", "dispersion", "drift_from_diagonals",
    "drift_integral", "find_eigenvalues", "params_from_dict",
    "solve_base_state", "stability_criterion", "travel_time",
    "verify_spectrum", "__version__",
]
