"""Integrator, Newton, quadrature and winding-number unit tests."""

import numpy as np
import pytest

from polymhd.errors import NoConvergence
from polymhd.numerics import (integrate_ivp, newton_solve, quad_adaptive,
                              winding_number)


def test_dp5_exponential_decay():
    res = integrate_ivp(lambda t, y: -y, (0.0, 2.0), np.array([1.0]),
                        rtol=1e-10, atol=1e-12)
    assert abs(res.y[-1][0] - np.exp(-2.0)) < 1e-9


def test_dop853_exponential_decay():
    res = integrate_ivp(lambda t, y: -y, (0.0, 2.0), np.array([1.0]),
                        rtol=1e-12, atol=1e-14, method="dop853")
    assert abs(res.y[-1][0] - np.exp(-2.0)) < 1e-12


def test_dop853_oscillator_accuracy_and_cost():
    # the high-order pair should hit tight tolerance with far fewer steps
    w = 40.0

    def rhs(t, y):
        return np.array([y[1], -w * w * y[0]])

    y0 = np.array([1.0, 0.0])
    lo = integrate_ivp(rhs, (0.0, 1.0), y0, rtol=1e-10, atol=1e-12)
    hi = integrate_ivp(rhs, (0.0, 1.0), y0, rtol=1e-10, atol=1e-12,
                       method="dop853")
    exact = np.cos(w)
    assert abs(hi.y[-1][0] - exact) < 1e-8
    assert abs(lo.y[-1][0] - exact) < 1e-7
    assert hi.n_steps < lo.n_steps / 2


def test_complex_state_supported():
    lam = 1.0 + 2.0j
    res = integrate_ivp(lambda t, y: lam * y, (0.0, 1.0),
                        np.array([1.0 + 0.0j]), rtol=1e-11, atol=1e-13,
                        method="dop853")
    assert abs(res.y[-1][0] - np.exp(lam)) < 1e-9


def test_t_eval_exact_endpoints():
    pts = np.linspace(0.0, 1.0, 7)
    res = integrate_ivp(lambda t, y: y, (0.0, 1.0), np.array([1.0]),
                        t_eval=pts)
    assert np.array_equal(res.t, pts)
    assert np.allclose(res.y[:, 0], np.exp(pts), rtol=1e-8)


def test_backward_integration():
    res = integrate_ivp(lambda t, y: y, (1.0, 0.0), np.array([np.e]))
    assert abs(res.y[-1][0] - 1.0) < 1e-8


def test_callback_rescaling():
    # renormalization callback must see and replace the running state
    scales = []

    def cb(t, y):
        if abs(y[0]) > 10.0:
            scales.append(t)
            return y / 10.0
        return y

    res = integrate_ivp(lambda t, y: 3.0 * y, (0.0, 3.0), np.array([1.0]),
                        callback=cb)
    assert scales
    total = res.y[-1][0] * 10.0 ** len(scales)
    assert abs(total - np.exp(9.0)) / np.exp(9.0) < 1e-7


def test_store_trajectory_false_keeps_endpoints():
    res = integrate_ivp(lambda t, y: -y, (0.0, 1.0), np.array([1.0]),
                        store_trajectory=False)
    assert len(res.t) == 2
    assert res.t[0] == 0.0 and res.t[-1] == 1.0


def test_newton_solve_quadratic_system():
    def fun(x):
        return np.array([x[0] ** 2 - 2.0, x[0] * x[1] - 3.0])

    x, rnorm, it = newton_solve(fun, np.array([1.0, 1.0]))
    assert abs(x[0] - np.sqrt(2.0)) < 1e-10
    assert abs(x[1] - 3.0 / np.sqrt(2.0)) < 1e-10
    assert rnorm < 1e-10


def test_newton_no_convergence_reports_best():
    with pytest.raises(NoConvergence):
        newton_solve(lambda x: np.array([x[0] ** 2 + 1.0]),
                     np.array([1.0]), max_iter=8)


def test_quad_adaptive_polynomial():
    val, err = quad_adaptive(lambda x: x ** 3, 0.0, 1.0)
    assert abs(val - 0.25) < 1e-13
    assert err < 1e-12


def test_quad_adaptive_oscillatory():
    val, _ = quad_adaptive(lambda x: np.sin(20.0 * x), 0.0, np.pi)
    exact = (1.0 - np.cos(20.0 * np.pi)) / 20.0
    assert abs(val - exact) < 1e-10


def test_winding_number_simple_zero():
    assert winding_number(lambda z: z - (0.5 + 0.5j),
                          (0.0, 1.0, 0.0, 1.0)) == 1
    assert winding_number(lambda z: z - (5.0 + 0.5j),
                          (0.0, 1.0, 0.0, 1.0)) == 0


def test_winding_number_double_zero():
    assert winding_number(lambda z: (z - 0.3) * (z - 0.3j),
                          (-1.0, 1.0, -1.0, 1.0)) == 2
