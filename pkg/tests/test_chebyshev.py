"""Grid, interpolation, differentiation and quadrature unit tests."""

import numpy as np

from polymhd.chebyshev import (bary_eval, barycentric_weights, cgl_grid,
                               cgl_nodes, clenshaw_curtis_weights,
                               diff_matrix)


def test_nodes_cover_channel():
    nodes = cgl_nodes(33)
    assert nodes[0] == -0.5 and nodes[-1] == 0.5
    assert np.all(np.diff(nodes) > 0)


def test_interpolation_reproduces_polynomial():
    grid = cgl_grid(17)
    vals = grid.nodes ** 5 - 2.0 * grid.nodes ** 2 + 0.25
    y = np.linspace(-0.5, 0.5, 101)
    approx = grid.interpolate(vals, y)
    assert np.max(np.abs(approx - (y ** 5 - 2.0 * y ** 2 + 0.25))) < 1e-13


def test_interpolation_hits_nodes_exactly():
    grid = cgl_grid(33)
    vals = np.sin(grid.nodes)
    assert np.array_equal(grid.interpolate(vals, grid.nodes), vals)


def test_bary_eval_scalar_point():
    nodes = cgl_nodes(9)
    w = barycentric_weights(nodes)
    assert abs(bary_eval(nodes, w, nodes ** 2, 0.3) - 0.09) < 1e-14


def test_diff_matrix_on_polynomial():
    nodes = cgl_nodes(21)
    D = diff_matrix(nodes)
    vals = nodes ** 4
    assert np.max(np.abs(D @ vals - 4.0 * nodes ** 3)) < 1e-10


def test_clenshaw_curtis_exact_on_polynomials():
    n = 33
    w = clenshaw_curtis_weights(n)
    x = np.cos(np.pi * np.arange(n) / (n - 1))[::-1]   # reference interval
    for p in range(0, 8):
        exact = (1.0 - (-1.0) ** (p + 1)) / (p + 1)
        assert abs(w @ x ** p - exact) < 1e-13


def test_grid_quad_weights_channel_length():
    grid = cgl_grid(65)
    assert abs(np.sum(grid.quad_weights()) - 1.0) < 1e-14
    assert abs(grid.quad_weights() @ grid.nodes ** 2 - 1.0 / 12.0) < 1e-14
