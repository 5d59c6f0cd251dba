"""Chebyshev grids, barycentric interpolation and Clenshaw-Curtis weights.

The channel cross-section is y in [-1/2, 1/2]; all profile storage and
spectral differentiation in the toolkit happens on grids from this module.
"""

from dataclasses import dataclass, field

import numpy as np

CHANNEL = (-0.5, 0.5)


@dataclass(frozen=True)
class Grid:
    """Ordered collocation nodes spanning the channel.

    kind is 'chebyshev-gauss-lobatto' or 'uniform'.
    """

    nodes: np.ndarray
    kind: str = "chebyshev-gauss-lobatto"
    _bary_weights: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.size < 8:
            raise ValueError("grid needs at least 8 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if not (np.isclose(nodes[0], CHANNEL[0]) and np.isclose(nodes[-1], CHANNEL[1])):
            raise ValueError("grid must span [-1/2, 1/2]")
        if self.kind not in ("chebyshev-gauss-lobatto", "uniform"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        object.__setattr__(self, "_bary_weights", barycentric_weights(nodes, self.kind))

    @property
    def n(self):
        return self.nodes.size

    def interpolate(self, values, y):
        """Barycentric interpolation of nodal values at point(s) y."""
        return bary_eval(self.nodes, self._bary_weights, values, y)

    def diff_matrix(self):
        return diff_matrix(self.nodes, self._bary_weights)

    def quad_weights(self):
        """Weights w with sum(w * f(nodes)) ~ integral of f over the channel."""
        if self.kind == "chebyshev-gauss-lobatto":
            return clenshaw_curtis_weights(self.n) * (CHANNEL[1] - CHANNEL[0]) / 2.0
        # trapezoid on a uniform grid
        h = np.diff(self.nodes)
        w = np.zeros(self.n)
        w[:-1] += h / 2
        w[1:] += h / 2
        return w


def cgl_grid(n):
    """Chebyshev-Gauss-Lobatto grid with n nodes on the channel."""
    return Grid(cgl_nodes(n), "chebyshev-gauss-lobatto")


def cgl_nodes(n, interval=CHANNEL):
    """n Chebyshev-Gauss-Lobatto points, increasing, on the given interval."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    a, b = interval
    # cos spacing, flipped to increasing order
    theta = np.pi * np.arange(n - 1, -1, -1) / (n - 1)
    x = np.cos(theta)
    return (a + b) / 2 + (b - a) / 2 * x


def barycentric_weights(nodes, kind=None):
    """Barycentric weights for the given nodes.

    Uses the closed form for Chebyshev-Gauss-Lobatto points (stable for
    large n); otherwise the direct product formula with rescaling.
    """
    n = nodes.size
    if kind == "chebyshev-gauss-lobatto":
        w = np.ones(n)
        w[0] = w[-1] = 0.5
        w *= (-1.0) ** np.arange(n)
        return w
    # generic nodes: product formula with overflow guard via scaling
    scale = 4.0 / (nodes[-1] - nodes[0])
    w = np.ones(n)
    for j in range(n):
        d = (nodes[j] - nodes) * scale
        d[j] = 1.0
        w[j] = 1.0 / np.prod(d)
    return w / np.max(np.abs(w))


def bary_eval(nodes, weights, values, y):
    """Evaluate the barycentric interpolant of (nodes, values) at y.

    values may be 1-D (n,) or 2-D (m, n) for m stacked profiles; y may be a
    scalar or array. Exact node hits are handled explicitly.
    """
    values = np.asarray(values)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    diff = y_arr[:, None] - nodes[None, :]
    exact = diff == 0.0
    any_exact = exact.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = weights[None, :] / diff
        denom = c.sum(axis=1)
        num = c @ values.T if values.ndim == 2 else c @ values
        quotient = (num / denom[:, None]) if values.ndim == 2 else num / denom
    if values.ndim == 2:
        out = quotient.T  # (m, len(y))
        if any_exact.any():
            for i in np.nonzero(any_exact)[0]:
                j = np.nonzero(exact[i])[0][0]
                out[:, i] = values[:, j]
        result = out
    else:
        out = quotient
        if any_exact.any():
            for i in np.nonzero(any_exact)[0]:
                j = np.nonzero(exact[i])[0][0]
                out[i] = values[j]
        result = out
    if np.isscalar(y) or np.asarray(y).ndim == 0:
        return result[..., 0]
    return result


def diff_matrix(nodes, weights=None):
    """Spectral differentiation matrix for the barycentric interpolant."""
    if weights is None:
        weights = barycentric_weights(nodes)
    n = nodes.size
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def clenshaw_curtis_weights(n):
    """Clenshaw-Curtis weights for n CGL nodes on [-1, 1], increasing order."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    m = n - 1
    # exact cosine-sum construction
    k = np.arange(n)
    w = np.zeros(n)
    for i in range(n):
        theta = np.pi * i / m
        s = 1.0
        for j in range(1, m // 2 + 1):
            factor = 0.5 if 2 * j == m else 1.0
            s -= factor * 2.0 * np.cos(2 * j * theta) / (4 * j * j - 1)
        w[i] = 2.0 * s / m
    w[0] /= 2.0
    w[-1] /= 2.0
    return w
