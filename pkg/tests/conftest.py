"""Shared fixtures: parameter sets, solved base states, spectrum runs.

Expensive computations (129-node base states, the k = 10..30 eigenvalue
band for both reference flows) are solved once per session and shared.
"""

import time

import numpy as np
import pytest

from polymhd import asymptotics, base_state, model
from polymhd.chebyshev import cgl_grid


@pytest.fixture(scope="session")
def main_params():
    """All defaults: the fully loaded reference case."""
    return model.ModelParams()


@pytest.fixture(scope="session")
def rest_params():
    """Quiescent channel: no pressure gradient, equal wall data."""
    return model.ModelParams(A_hat=0.0, theta_bar=0.0, J_plus=1.0,
                             J_minus=1.0)


@pytest.fixture(scope="session")
def main_state(main_params):
    return base_state.solve_base_state(main_params, cgl_grid(129))


@pytest.fixture(scope="session")
def rest_state(rest_params):
    return base_state.solve_base_state(rest_params, cgl_grid(129))


@pytest.fixture(scope="session")
def cold_wall_state(main_params):
    """Reference case with the lower wall strongly cooled."""
    params = main_params.with_(theta_bar=-0.95)
    return base_state.solve_base_state(params, cgl_grid(129))


@pytest.fixture(scope="session")
def band_runs(main_state, rest_state):
    """Numerics-vs-asymptotics band k = 10..30, omega = 1, both flows.

    Returns {name: (VerificationTable, SpectrumResult)} plus the wall time
    of the two runs under key "_elapsed".
    """
    out = {}
    t0 = time.perf_counter()
    out["rest"] = asymptotics.verify_spectrum(rest_state, 1.0, (10, 30))
    out["main"] = asymptotics.verify_spectrum(main_state, 1.0, (10, 30))
    out["_elapsed"] = time.perf_counter() - t0
    return out
