"""Deterministic quadrature rules and boundary-limit extrapolation.

All reductions run in a fixed order (dimension-major, node-ascending) with
compensated accumulation, so repeated runs give the same bits.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_complex, check_positive_int, check_positive_real
from .exceptions import NonFiniteIntegrandError

__all__ = [
    "TorusGrid",
    "ArcContour",
    "ExtrapolationLadder",
    "periodic_trapezoid",
    "gauss_segment",
    "gauss_nodes",
    "contour_integral",
    "richardson_limit",
]


@dataclass(frozen=True)
class TorusGrid:
    """Uniform ``N^d`` grid on the torus with nodes ``2 pi m / N``."""

    d: int
    nodes_per_dim: int

    def __post_init__(self):
        check_positive_int(self.d, "d")
        check_positive_int(self.nodes_per_dim, "nodes_per_dim")

    @property
    def N(self):
        return self.nodes_per_dim

    @property
    def size(self):
        return self.N**self.d

    def axis(self):
        return 2.0 * np.pi * np.arange(self.N) / self.N

    def mesh(self):
        """Per-dimension node arrays shaped for broadcasting."""
        t = self.axis()
        out = []
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = self.N
            out.append(t.reshape(shape))
        return out

    def refined(self):
        return TorusGrid(self.d, 2 * self.N)


@dataclass(frozen=True)
class ArcContour:
    """Arc ``center + radius e^{i theta}``, ``arg_start <= theta <= arg_end``."""

    center: complex
    radius: float
    arg_start: float
    arg_end: float
    nodes: int = 64

    def __post_init__(self):
        check_positive_real(self.radius, "radius")
        if not self.arg_start < self.arg_end:
            raise ValueError("arg_start must be smaller than arg_end")
        if check_positive_int(self.nodes, "nodes") < 8:
            raise ValueError("an arc contour needs at least 8 nodes")

    @classmethod
    def circle(cls, center=0j, radius=1.0, nodes=64):
        return cls(complex(center), radius, -math.pi, math.pi, nodes)

    @property
    def is_closed(self):
        return math.isclose(self.arg_end - self.arg_start, 2 * math.pi, rel_tol=0, abs_tol=1e-14)


@dataclass(frozen=True)
class ExtrapolationLadder:
    """Geometric offsets ``base_offset * ratio**k``, ``k = 0 .. steps-1``."""

    base_offset: float
    ratio: float
    steps: int

    def __post_init__(self):
        check_positive_real(self.base_offset, "base_offset")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")
        check_positive_int(self.steps, "steps")

    def offsets(self):
        return self.base_offset * self.ratio ** np.arange(self.steps)


def _exact_sum(values):
    """Correctly rounded sum of a flat real or complex array."""
    values = np.ravel(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)


def _check_finite(values, nodes):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.flatnonzero(np.ravel(bad))[0]
        node = np.ravel(nodes)[idx] if nodes is not None else idx
        raise NonFiniteIntegrandError(f"integrand is not finite at node {node!r}", node=node)


def periodic_trapezoid(grid, f):
    """Normalised trapezoid mean ``(2 pi)^{-d} integral f`` on the torus.

    ``f`` receives ``d`` broadcastable node arrays and must return an array
    broadcastable to ``(N,) * d``. Trigonometric polynomials of degree ``< N``
    per dimension are integrated exactly; frequencies ``= 0 mod N`` alias to
    the constant mode.
    """
    mesh = grid.mesh()
    values = np.broadcast_to(np.asarray(f(*mesh)), (grid.N,) * grid.d)
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
        node = tuple(2 * math.pi * i / grid.N for i in idx)
        raise NonFiniteIntegrandError(f"integrand is not finite at node {node}", node=node)
    return _exact_sum(values) / grid.size


@lru_cache(maxsize=64)
def gauss_nodes(order):
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_gauss_rule(edges, order):
    """Nodes and weights of a composite Gauss rule on consecutive ``edges``."""
    x, w = gauss_nodes(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gauss_segment(f, a, b, panels=4, order=16, return_error=False):
    """Composite Gauss-Legendre integral of ``f`` over ``[a, b]``.

    ``f`` is called once with the array of all nodes. With
    ``return_error=True`` the result is ``(value, estimate)`` where the
    estimate is the change under panel doubling.
    """
    panels = check_positive_int(panels, "panels")
    order = check_positive_int(order, "order")
    a, b = float(a), float(b)

    def rule(p):
        nodes, weights = composite_gauss_rule(np.linspace(a, b, p + 1), order)
        values = np.asarray(f(nodes))
        _check_finite(values, nodes)
        return _exact_sum(values * weights)

    value = rule(panels)
    if not return_error:
        return value
    finer = rule(2 * panels)
    return finer, abs(finer - value)


def contour_integral(c, f):
    """``integral over the arc c of f(sigma) d sigma``.

    Full circles use the trapezoid rule in angle (spectrally accurate); open
    arcs use a Gauss-Legendre rule in angle with ``c.nodes`` points.
    """
    if c.is_closed:
        theta = c.arg_start + (c.arg_end - c.arg_start) * np.arange(c.nodes) / c.nodes
        weights = np.full(c.nodes, (c.arg_end - c.arg_start) / c.nodes)
    else:
        x, w = gauss_nodes(c.nodes)
        half = 0.5 * (c.arg_end - c.arg_start)
        theta = c.arg_start + half * (x + 1.0)
        weights = half * w
    unit = np.exp(1j * theta)
    sigma = c.center + c.radius * unit
    values = np.asarray(f(sigma), dtype=complex)
    _check_finite(values, sigma)
    return _exact_sum(values * (1j * c.radius * unit) * weights)


def _basis(offsets, size, log_terms):
    cols = [np.ones_like(offsets)]
    k = 1
    while len(cols) < size:
        cols.append(offsets**k)
        if log_terms and len(cols) < size:
            cols.append(offsets**k * np.log(offsets))
        k += 1
    return np.column_stack(cols)


def richardson_limit(ladder, samples, log_terms=False):
    """Extrapolate ``samples[k] = f(eps_k)`` to ``eps = 0``.

    Parameters
    ----------
    ladder : ExtrapolationLadder
    samples : sequence of complex, length ``ladder.steps``
    log_terms : bool
        Use the model ``1, eps, eps log eps, eps^2, eps^2 log eps, ...``
        instead of a polynomial in ``eps``.

    Returns
    -------
    limit : complex
    error_estimate : float
        Magnitude of the last extrapolation correction, i.e. the change in
        the limit when the final sample is added.
    """
    samples = np.asarray(samples, dtype=complex)
    if ladder.steps < 3:
        raise ValueError("richardson_limit needs at least 3 ladder steps")
    if samples.shape != (ladder.steps,):
        raise ValueError(f"expected {ladder.steps} samples, got shape {samples.shape}")
    eps = ladder.offsets()
    if not log_terms:
        table = samples.copy()
        previous = table[0]
        for m in range(1, ladder.steps):
            for i in range(ladder.steps - m):
                table[i] = (eps[i] * table[i + 1] - eps[i + m] * table[i]) / (eps[i] - eps[i + m])
            if m == ladder.steps - 2:
                previous = table[0]
        return complex(table[0]), float(abs(table[0] - previous))
    estimates = []
    for size in (ladder.steps - 1, ladder.steps):
        A = _basis(eps[:size], size, True)
        estimates.append(np.linalg.solve(A, samples[:size])[0])
    return complex(estimates[-1]), float(abs(estimates[-1] - estimates[-2]))
