"""Stationary-state solver tests: closure, shooting, invariants, export."""

import numpy as np
import pytest

from polymhd import base_state, model
from polymhd.chebyshev import cgl_grid


def test_closure_zero_shear():
    p = model.ModelParams()
    a11, a22, _ = base_state.solve_closure(p, 0.0)
    assert a11 == 0.0 and a22 == 0.0


def test_closure_residual_and_signs():
    p = model.ModelParams()
    a12 = 0.4
    a11, a22, _ = base_state.solve_closure(p, a12)
    g = a12 * a12
    K = model.relax_inverse(p, a11 + a22)
    Kt = model.relax_inverse_tilde(p, a11 + a22)
    A2 = 1.0 / p.W + a22
    assert abs(K * a22 + p.beta * (g + a22 * a22)) < 1e-12
    assert abs(K * a11 + p.beta * (g + a11 * a11) - 2.0 * g * Kt / A2) < 1e-12
    assert a11 > 0.0 > a22          # extension along the flow, compression across


def test_closure_branch_continuity():
    # the physical branch must depend continuously on the shear, including
    # the switch between direct Newton and continuation starts
    p = model.ModelParams()
    shear = np.linspace(0.0, 1.5, 61)
    sols = np.array([base_state.solve_closure(p, s)[:2] for s in shear])
    # smooth branch: monotone components, small curvature between samples
    assert np.all(np.diff(sols[:, 0]) >= 0.0)
    assert np.all(np.diff(sols[:, 1]) <= 0.0)
    assert np.abs(np.diff(sols, n=2, axis=0)).max() < 0.05


def test_rest_state_closed_form(rest_state):
    nodes = rest_state.grid.nodes
    assert np.max(np.abs(rest_state.u)) < 1e-10
    assert np.max(np.abs(rest_state.Z - 1.0)) < 1e-10
    assert np.max(np.abs(rest_state.L + 1.0)) < 1e-10
    for name in ("a11", "a12", "a22"):
        assert np.max(np.abs(rest_state.fields[name])) < 1e-10
    assert nodes[0] == -0.5 and nodes[-1] == 0.5


def test_main_state_boundary_conditions(main_state):
    p = main_state.params
    s = main_state.sample(np.array([-0.5, 0.5]), names=("u", "Z", "L"))
    assert abs(s["u"][0]) < 1e-8 and abs(s["u"][1]) < 1e-8
    assert abs(s["Z"][0] - (1.0 + p.theta_bar)) < 1e-8
    assert abs(s["Z"][1] - 1.0) < 1e-8
    assert abs(s["L"][0] + p.J_minus) < 1e-8
    assert abs(s["L"][1] + p.J_plus) < 1e-8


def test_main_state_first_integral(main_state):
    p = main_state.params
    y = main_state.grid.nodes
    recon = (main_state.C0 - p.grad_amp * y
             - (1.0 + p.lambda_hat) * p.sigma_m * p.Re * main_state.L)
    assert np.max(np.abs(main_state.Z * main_state.a12 - recon)) < 1e-8


def test_main_state_residual(main_state):
    assert base_state.base_residual(main_state) < 1e-8


def test_no_loading_has_symmetric_profile():
    # sigma_m = 0 with equal wall data leaves a buoyancy-free symmetric flow
    p = model.ModelParams(sigma_m=0.0, theta_bar=0.0, A_m=0.0, A_r=0.0,
                          Gr=0.0, J_plus=1.0, J_minus=1.0)
    state = base_state.solve_base_state(p, cgl_grid(65))
    y = np.linspace(0.0, 0.5, 51)
    up = state.sample(y, names=("u",))["u"]
    um = state.sample(-y, names=("u",))["u"]
    assert np.max(np.abs(up - um)) < 1e-8


def test_shoot_seed_continuation(main_state):
    again = base_state.solve_base_state(main_state.params, cgl_grid(65),
                                        shoot_seed=main_state.shoot_vars)
    assert np.max(np.abs(again.shoot_vars - main_state.shoot_vars)) < 1e-8


def test_solver_failure_raises():
    # a wall colder than absolute zero has no admissible temperature profile
    p = model.ModelParams(theta_bar=-1.5)
    with pytest.raises(Exception):
        base_state.solve_base_state(p, cgl_grid(33))


def test_csv_export(tmp_path, rest_state):
    path = tmp_path / "base_state.csv"
    base_state.write_base_state_csv(rest_state, path)
    lines = path.read_text().split("\n")
    assert lines[0] == "y,u,a11,a12,a22,Z,L,P"
    assert lines[1].startswith("-0.5,")
    assert len(lines) == 129 + 2    # header + nodes + trailing newline
