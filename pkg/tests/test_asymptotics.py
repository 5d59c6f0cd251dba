"""Asymptotic eigenvalue formula, stability criterion, cross-checks."""

import numpy as np
import pytest

from polymhd import asymptotics, base_state, model
from polymhd.chebyshev import cgl_grid


def test_rest_state_oracles(rest_state):
    # closed forms: Z = 1, alpha2 = 1, S = 1 + sigma_m (1+lambda_hat)^2/b_m
    assert abs(asymptotics.travel_time(rest_state) - 1.0) < 1e-12
    drift = asymptotics.drift_integral(rest_state, 1.0)
    assert abs(drift - (-2.5)) < 1e-12
    report = asymptotics.stability_criterion(rest_state, omega=1.0)
    assert abs(report.criterion_S - 5.0) < 1e-12
    assert abs(report.re_lambda_inf + 2.5) < 1e-12
    assert abs(report.im_spacing - np.pi) < 1e-14
    assert report.necessary_condition_met
    lam7 = asymptotics.asymptotic_lambda(rest_state, 1.0, 7)
    assert abs(lam7 - (-2.5 + 7.0j * np.pi)) < 1e-12


def test_rest_state_without_conductivity():
    p = model.ModelParams(A_hat=0.0, theta_bar=0.0, J_plus=1.0, J_minus=1.0,
                          sigma_m=0.0)
    state = base_state.solve_base_state(p, cgl_grid(65))
    report = asymptotics.stability_criterion(state, omega=1.0)
    assert abs(report.criterion_S - 1.0) < 1e-12


def test_mode_index_must_be_positive(rest_state):
    with pytest.raises(ValueError):
        asymptotics.asymptotic_lambda(rest_state, 1.0, 0)


def test_consistency_identity(main_state, rest_state, cold_wall_state):
    for state in (main_state, rest_state, cold_wall_state):
        r = asymptotics.stability_criterion(state, omega=1.0)
        assert abs(r.re_lambda_inf + r.criterion_S / (2.0 * r.mu)) < 1e-12


def test_two_drift_routes_agree(main_state, rest_state):
    # the literal closed-form integrand against the transformed-system
    # diagonals: independently coded, must agree to quadrature accuracy
    for state in (main_state, rest_state):
        for omega in (0.5, 1.0, 2.0):
            d1 = asymptotics.drift_integral(state, omega)
            d2 = asymptotics.drift_from_diagonals(state, omega)
            assert abs(d1 - d2) < 1e-12 * (1.0 + abs(d1))


def test_amplitude_route_matches_formula(main_state):
    lam_a = asymptotics.asymptotic_lambda(main_state, 1.0, 6)
    lam_p = asymptotics.lambda_from_amplitudes(main_state, 1.0, 6)
    assert abs(lam_a - lam_p) < 1e-10


def test_rest_amplitude_ratio(rest_state):
    # on the rest profile the two direction amplitudes separate by exp(S)
    p1, p2 = asymptotics.amplitude_factors(rest_state, 1.0)
    ratio = abs(np.exp(p2(0.5)) / np.exp(p1(0.5)))
    assert abs(ratio - np.exp(5.0)) < 1e-8


def test_report_json_schema(tmp_path, rest_state):
    report = asymptotics.stability_criterion(rest_state, omega=1.0)
    path = tmp_path / "asymptotics.json"
    asymptotics.write_asymptotics_json(report, path)
    import json
    doc = json.loads(path.read_text())
    assert list(doc) == ["mu", "drift_re", "drift_im", "re_lambda_inf",
                         "im_spacing", "criterion_S",
                         "necessary_condition_met"]
    assert doc["necessary_condition_met"] is True
    assert doc["criterion_S"] == 5.0


def test_verify_rows_and_export(tmp_path, band_runs):
    table, result = band_runs["main"]
    assert [r.k for r in table.rows] == list(range(10, 31))
    assert table.bounded
    path = tmp_path / "verify.csv"
    asymptotics.write_verify_csv(table, path)
    lines = path.read_text().split("\n")
    assert lines[0] == "k,re_num,im_num,re_asym,im_asym,err,err_times_k"
    assert len(lines) == 23


def test_truncated_variant_keeps_first_order_remainder(rest_state):
    # even on the rest profile the truncated reduction leaves an O(1/k)
    # remainder: the constant-coefficient system still couples the fast
    # pair to the nilpotent blocks through off-diagonal zeroth-order terms
    table, _ = asymptotics.verify_spectrum(rest_state, 1.0, (8, 10),
                                           variant="truncated_3_2")
    for row in table.rows:
        assert 0.05 / row.k < row.err < 1.5 / row.k
