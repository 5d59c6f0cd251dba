"""Parameter container and rheology coefficient unit tests."""

import numpy as np
import pytest

from polymhd import model


def test_defaults_and_derived():
    p = model.ModelParams()
    assert p.kappa2 == 1.0
    assert p.k_bar == 0.5
    assert p.grad_amp == 1.0


def test_validation():
    with pytest.raises(ValueError):
        model.ModelParams(W=0.0)
    with pytest.raises(ValueError):
        model.ModelParams(beta=1.0)
    with pytest.raises(ValueError):
        model.ModelParams(b_m=-1.0)


def test_params_from_dict_rejects_unknown_and_non_numeric():
    with pytest.raises(KeyError):
        model.params_from_dict({"Ea": 1.0})
    with pytest.raises(TypeError):
        model.params_from_dict({"Re": True})
    p = model.params_from_dict({"Re": 2, "W": 0.5})
    assert p.Re == 2.0 and p.W == 0.5


def test_mobility_factor():
    p = model.ModelParams()
    assert model.eval_J(p, 1.0) == 1.0
    assert abs(model.eval_J(p, 2.0) - np.exp(0.5)) < 1e-15
    with pytest.raises(ValueError):
        model.eval_J(p, -1.0)


def test_relaxation_coefficients():
    p = model.ModelParams()          # W = 1, k = 1, beta = 0.5
    assert model.relax_inverse(p, 0.0) == 1.0
    assert abs(model.relax_inverse(p, 3.0) - (1.0 + 0.5)) < 1e-15
    assert abs(model.relax_inverse_tilde(p, 3.0) - (1.0 + 2.0)) < 1e-15


def test_rheo_zero_stress_limit():
    p = model.ModelParams()
    r = model.eval_rheo(p, 1.0, 0.0, 0.0, 0.0)
    assert r.chi0 == 1.0
    assert abs(r.chi0_prime - 2.0) < 1e-15     # (E_A + Z)/Z^2 at Z = 1
    assert r.r33 == r.r55 == 1.0               # chi0 * K(0)
    assert r.r35 == r.r53 == r.r43 == r.r54 == 0.0
    assert r.r44 == 1.0


def test_rheo_r44_variants_differ_by_chi0_derivative():
    p = model.ModelParams()
    cons = model.eval_rheo(p, 2.0, 0.1, 0.2, 0.3)
    lit = model.eval_rheo(p, 2.0, 0.1, 0.2, 0.3, r44_variant="literal")
    ratio = lit.r44 / cons.r44
    assert abs(ratio - (p.E_A + 2.0) / 4.0) < 1e-14
    with pytest.raises(ValueError):
        model.eval_rheo(p, 2.0, 0.1, 0.2, 0.3, r44_variant="bogus")


def test_rheo_shear_coupling_scaling():
    p = model.ModelParams()
    r = model.eval_rheo(p, 1.0, 0.0, 0.3, 0.0)
    # both shear couplings carry a12 * chi0 * (k_bar/3 + beta)
    expect = 0.3 * (p.k_bar / 3.0 + p.beta)
    assert abs(r.r43 - expect) < 1e-15
    assert abs(r.r45_stress - expect) < 1e-15
    assert abs(r.r34_stress - 2.0 * p.beta * 0.3) < 1e-15


def test_alpha_scalings():
    p = model.ModelParams(Re=2.0, W=1.0)
    assert model.alpha_hat(p, 3.0) == 1.5
    assert abs(model.alpha_diag(p, 3.0) - (1.5 + 0.5)) < 1e-15
