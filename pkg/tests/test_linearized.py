"""Linearized-operator assembly tests: reduction, variants, transforms."""

import numpy as np
import pytest

from polymhd import linearized
from polymhd.errors import ContinuousSpectrumPoint


def _field(state):
    return linearized.coeff_field(state, state.grid.nodes)


def test_boundary_operator_shape():
    B = linearized.boundary_operator()
    assert B.shape == (5, 10)
    assert np.array_equal(np.nonzero(B)[1], linearized.BOUNDARY_INDICES)
    assert sorted(linearized.BOUNDARY_INDICES + linearized.FREE_INDICES) \
        == list(range(10))


def test_sparse_D_structure(main_state):
    D = linearized.sparse_D(_field(main_state))
    assert D.shape == (129, 10, 10)
    assert np.count_nonzero(D[0]) == 8


def test_scaffold_matches_direct_elimination(main_state):
    field = _field(main_state)
    scaf = linearized.elimination_scaffold(field, 1.0)
    lams = np.array([2.0 + 30.0j, -1.0 - 5.0j, 0.3 + 0.0j])
    e11d, e22d, _ = linearized.eliminate_alpha(field, lams, 1.0)
    for i in (0, 64, 128):           # wall, center, wall
        e11s, e22s = linearized.e_rows_from_scaffold(scaf[i], lams, 1.0)
        assert np.max(np.abs(e11s - e11d[:, i])) < 1e-13
        assert np.max(np.abs(e22s - e22d[:, i])) < 1e-13


def test_variants_agree_at_large_lambda(main_state):
    # the truncated reduction is the leading large-|lambda| term, so the
    # two assembled matrices must approach each other like 1/|lambda|
    field = linearized.coeff_field(main_state,
                                   np.array([-0.3, 0.0, 0.25]))
    prev = None
    for mag in (1e3, 1e4, 1e5, 1e6):
        lam = mag * (1.0 + 1.0j) / np.sqrt(2.0)
        A_ex = linearized.coeff_matrix(field, lam, 1.0, "exact_elimination")
        A_tr = linearized.coeff_matrix(field, lam, 1.0, "truncated_3_2")
        gap = np.max(np.abs(A_ex - A_tr)) / np.max(np.abs(A_tr))
        if mag == 1e5:
            assert gap < 1e-3
        if prev is not None:
            assert gap < prev * 0.2       # one decade gains a factor 10
        prev = gap


def test_unknown_variant_rejected(main_state):
    field = linearized.coeff_field(main_state, np.array([0.0]))
    with pytest.raises(ValueError):
        linearized.coeff_matrix(field, 1.0, 1.0, "bogus")


def test_reduction_singularity_detected(rest_state):
    # on the rest profile the reduction determinant is (lam + r33)(lam + r55),
    # so lam = -r33 sits on the continuous-spectrum locus
    field = linearized.coeff_field(rest_state, np.array([0.0]))
    lam_sing = complex(-field.rheo.r33[0])
    with pytest.raises(ContinuousSpectrumPoint):
        linearized.eliminate_alpha(field, lam_sing, 1.0)


def test_transform_diagonalizes_leading_matrix(main_state):
    field = _field(main_state)
    D = linearized.sparse_D(field)
    T, W = linearized.transform_T(field)
    back = np.einsum("nij,njk->nik", np.linalg.solve(T, D), T)
    assert np.max(np.abs(back - W)) < 1e-10
    rate = 1.0 / np.sqrt(field.Z * field.alpha2)
    assert np.max(np.abs(W[:, 0, 0] + rate)) < 1e-14
    assert np.max(np.abs(W[:, 1, 1] - rate)) < 1e-14


def test_c_diag_difference_integrand_is_finite(main_state):
    field = _field(main_state)
    c11, c22 = linearized.c_diag(field, 1.0)
    assert c11.shape == c22.shape == (129,)
    assert np.all(np.isfinite(c11)) and np.all(np.isfinite(c22))
