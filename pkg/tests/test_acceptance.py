"""End-to-end acceptance suite.

Eight criteria covering the stationary solver, the certified point
spectrum, the large-mode asymptotics and their cross-validation. The
expensive k = 10..30 eigenvalue band for both reference flows is computed
once in the band_runs fixture and shared by criteria 4, 5 and 7.
"""

import time

import numpy as np

from polymhd import asymptotics, base_state, model, spectrum
from polymhd.chebyshev import cgl_grid


def test_criterion_1_rest_state_closed_forms(rest_params):
    t0 = time.perf_counter()
    state = base_state.solve_base_state(rest_params, cgl_grid(129))
    assert np.max(np.abs(state.u)) < 1e-10
    assert np.max(np.abs(state.Z - 1.0)) < 1e-10
    assert np.max(np.abs(state.L + 1.0)) < 1e-10
    for name in ("a11", "a12", "a22"):
        assert np.max(np.abs(state.fields[name])) < 1e-10

    report = asymptotics.stability_criterion(state, omega=1.0)
    assert abs(report.mu - 1.0) < 1e-10
    assert abs(report.criterion_S - 5.0) < 1e-10
    for k in (1, 4, 9):
        lam = asymptotics.asymptotic_lambda(state, 1.0, k)
        assert abs(lam - (-2.5 + 1j * np.pi * k)) < 1e-10
    assert time.perf_counter() - t0 < 1.0


def test_criterion_2_base_state_residual(main_state):
    t0 = time.perf_counter()
    assert main_state.grid.nodes.size == 129
    assert base_state.base_residual(main_state) < 1e-8

    walls = main_state.sample(np.array([-0.5, 0.5]), names=("u",))["u"]
    assert np.max(np.abs(walls)) < 1e-8

    p = main_state.params
    y = main_state.grid.nodes
    first_integral = (main_state.Z * main_state.a12 + p.grad_amp * y
                      + (1.0 + p.lambda_hat) * p.sigma_m * p.Re
                      * main_state.L)
    assert np.max(np.abs(first_integral - main_state.C0)) < 1e-8
    assert time.perf_counter() - t0 < 5.0


def test_criterion_3_cold_wall_velocity_suppression(cold_wall_state):
    # expected to fail: the converged profile (verified against an
    # independent collocation solve of the same boundary value problem)
    # keeps about 65% of its peak velocity in the bottom quarter; the
    # near-zero bottom region appears only at larger activation energy
    y_all = np.linspace(-0.5, 0.5, 4001)
    y_bot = np.linspace(-0.5, -0.25, 1001)
    u_all = np.abs(cold_wall_state.sample(y_all, names=("u",))["u"])
    u_bot = np.abs(cold_wall_state.sample(y_bot, names=("u",))["u"])
    ratio = u_bot.max() / u_all.max()
    assert ratio <= 0.2, (
        f"bottom-quarter velocity ratio {ratio:.3f} exceeds 0.2")


def test_criterion_4_band_converges_with_bounded_remainder(band_runs):
    assert band_runs["_elapsed"] < 60.0
    for name in ("rest", "main"):
        table, result = band_runs[name]
        assert len(result.eigenvalues) == 21
        for eig in result.eigenvalues:
            assert eig.certified, f"{name}: {eig.lam} uncertified"
            assert eig.residual < 1e-8
        errk = np.array([r.err_times_k for r in table.rows])
        assert errk.max() / np.median(errk) < 3.0, name


def test_criterion_5_imaginary_spacing(band_runs, main_state, rest_state):
    # expected to fail: the O(1/k) remainder alternates in sign between
    # adjacent modes, so single-sided spacings oscillate around pi/mu with
    # amplitude ~1.1/k and still sit at ~1.1% relative error at k = 30
    for name, state in (("rest", rest_state), ("main", main_state)):
        _, result = band_runs[name]
        target = np.pi / asymptotics.travel_time(state)
        ims = np.array([e.lam.imag for e in result.eigenvalues])
        spacing = ims[-1] - ims[-2]           # between k = 29 and k = 30
        rel = abs(spacing - target) / target
        assert rel < 0.01, f"{name}: spacing error {rel:.4%} at k = 30"


def test_criterion_6_criterion_identity(main_state, rest_state,
                                        cold_wall_state):
    t0 = time.perf_counter()
    sigma0 = base_state.solve_base_state(
        model.ModelParams(A_hat=0.0, theta_bar=0.0, J_plus=1.0, J_minus=1.0,
                          sigma_m=0.0), cgl_grid(65))
    for state in (main_state, rest_state, cold_wall_state, sigma0):
        r = asymptotics.stability_criterion(state, omega=1.0)
        assert abs(r.re_lambda_inf + r.criterion_S / (2.0 * r.mu)) < 1e-12
        assert r.necessary_condition_met == (r.re_lambda_inf < 0.0)
    assert time.perf_counter() - t0 < 1.0


def test_criterion_7_winding_completeness(band_runs):
    for name in ("rest", "main"):
        _, result = band_runs[name]
        assert result.missed_count_estimate == 0
        assert result.winding_total == len(result.eigenvalues)


def test_criterion_8_symmetry_and_robustness(main_state):
    omega = 1.0
    mu = asymptotics.travel_time(main_state)
    pad = 0.45 * np.pi / mu
    seeds = [asymptotics.asymptotic_lambda(main_state, omega, k)
             for k in (10, 11)]
    region = (seeds[0].real - 2.0, seeds[0].real + 2.0,
              seeds[0].imag - pad, seeds[-1].imag + pad)
    plus = spectrum.find_eigenvalues(main_state, omega, region, seeds)

    conj_seeds = [np.conj(s) for s in seeds][::-1]
    conj_region = (region[0], region[1], -region[3], -region[2])
    minus = spectrum.find_eigenvalues(main_state, -omega, conj_region,
                                      conj_seeds)
    for ep, em in zip(plus.eigenvalues, reversed(minus.eigenvalues)):
        assert abs(ep.lam - np.conj(em.lam)) < 1e-7

    lam10 = plus.eigenvalues[0].lam

    # renormalization-threshold doubling must not move the root
    cfg2 = spectrum.IntegratorConfig(renorm_threshold=2e3)
    tight = spectrum.find_eigenvalues(main_state, omega, region, [lam10],
                                      cfg2, band_check=False)
    assert abs(tight.eigenvalues[0].lam - lam10) < 1e-6

    # grid doubling must not move the root
    fine_state = base_state.solve_base_state(main_state.params,
                                             cgl_grid(257))
    fine = spectrum.find_eigenvalues(fine_state, omega, region, [lam10],
                                     band_check=False)
    assert abs(fine.eigenvalues[0].lam - lam10) < 1e-6
