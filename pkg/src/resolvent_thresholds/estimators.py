"""scikit-learn style wrappers around the kernel evaluators.

The estimators treat a column of spectral offsets ``w`` (relative to the
threshold) as the input matrix and return one kernel column per configured
lattice or space point. ``fit`` only validates hyperparameters and caches
the threshold data, so the objects slot into pipelines and grid searches
that sweep ``q``, ``grid`` or ``gamma``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import continuum as cm
from . import lattice as lt
from ._validation import check_complex_array, check_int_vector
from .quadrature import TorusGrid
from .specfun import SeriesControl

__all__ = ["LatticeResolvent", "ContinuumResolvent"]


def _as_offsets(X):
    """Flatten ``(m,)`` or ``(m, 1)`` input to a complex vector of offsets."""
    arr = check_complex_array(X, "X")
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"X must have shape (m,) or (m, 1), got {arr.shape}")
    return arr


class _ResolventBase(TransformerMixin, BaseEstimator):
    def _control(self):
        return SeriesControl(max_total_degree=self.series_degree,
                             degree_limit=max(400, self.series_degree))

    def fit(self, X=None, y=None):
        """Validate hyperparameters; ``X`` and ``y`` are ignored."""
        self._setup()
        self.control_ = self._control()
        return self

    def transform(self, X):
        """Kernel values, shape ``(m, n_points)``."""
        check_is_fitted(self, "control_")
        w = _as_offsets(X)
        out = np.empty((w.size, len(self.points_)), dtype=complex)
        for i, wi in enumerate(w):
            for j, pt in enumerate(self.points_):
                out[i, j] = self._kernel(wi, pt)
        return out

    def predict(self, X):
        """Alias of :meth:`transform` for pipeline compatibility."""
        return self.transform(X)

    def decompose(self, X):
        """Branching terms and remainders, each of shape ``(m, n_points)``.

        Requires ``Im w > 0`` for every row.
        """
        check_is_fitted(self, "control_")
        w = _as_offsets(X)
        branch = np.empty((w.size, len(self.points_)), dtype=complex)
        rem = np.empty_like(branch)
        for i, wi in enumerate(w):
            for j, pt in enumerate(self.points_):
                dec = self._decompose(wi, pt)
                branch[i, j] = dec.branching_value
                rem[i, j] = dec.remainder_value
        return branch, rem


class LatticeResolvent(_ResolventBase):
    """Resolvent kernel of the discrete Laplacian near the threshold ``4q``.

    Parameters
    ----------
    d : int
        Lattice dimension (1 to 4).
    q : int
        Threshold index; inputs are offsets ``w = z - 4q``.
    points : sequence of int tuples, optional
        Lattice points ``n``; defaults to the origin.
    grid : int, optional
        Torus nodes per dimension. ``None`` refines adaptively.
    method : {'trapezoid', 'bessel', 'closed'}
    series_degree : int
        Initial truncation degree of the branching series.

    Attributes
    ----------
    context_ : ThresholdContext
    points_ : list of tuple
    threshold_ : float
    critical_points_ : tuple of SignPattern
    """

    def __init__(self, d=1, q=0, points=None, grid=None, method="trapezoid", series_degree=24):
        self.d = d
        self.q = q
        self.points = points
        self.grid = grid
        self.method = method
        self.series_degree = series_degree

    def _setup(self):
        self.context_ = lt.ThresholdContext(self.d, self.q)
        pts = self.points if self.points is not None else [(0,) * self.d]
        self.points_ = [check_int_vector(p, self.d, "points") for p in pts]
        if self.method not in ("trapezoid", "bessel", "closed"):
            raise ValueError(f"unknown method {self.method!r}")
        self.grid_ = None if self.grid is None else TorusGrid(self.d, self.grid)
        self.threshold_ = self.context_.threshold_value
        self.critical_points_ = self.context_.patterns()

    def _kernel(self, w, n):
        return lt.lattice_kernel(self.d, w + self.threshold_, n, self.grid_, self.method).value

    def _decompose(self, w, n):
        return lt.decompose_lattice(self.context_, w, n, self.grid_, self.control_, self.method)

    def branching_coefficients(self, X):
        """``sum_l E^(l)(w, n)`` for each row and point."""
        check_is_fitted(self, "control_")
        w = _as_offsets(X)
        return np.array([[lt.E_sum(self.context_, wi, n, self.control_) for n in self.points_] for wi in w])


class ContinuumResolvent(_ResolventBase):
    """Truncated resolvent kernel of the model operator of signature ``(p, q)``.

    Parameters
    ----------
    p, q : int
        Signature.
    points : sequence of vectors, optional
        Space points ``x``; defaults to the origin.
    gamma : float
        Frequency cutoff.
    method : {'hyperbolic', 'triangle'}
    series_degree : int

    Attributes
    ----------
    signature_ : Signature
    points_ : list of ndarray
    threshold_ : float
        Always 0.
    """

    def __init__(self, p=1, q=0, points=None, gamma=1.0, method="hyperbolic", series_degree=24):
        self.p = p
        self.q = q
        self.points = points
        self.gamma = gamma
        self.method = method
        self.series_degree = series_degree

    def _setup(self):
        self.signature_ = cm.Signature(self.p, self.q)
        d = self.signature_.d
        pts = self.points if self.points is not None else [np.zeros(d)]
        self.points_ = []
        for p in pts:
            x = np.atleast_1d(np.asarray(p, dtype=complex))
            if x.shape != (d,):
                raise ValueError(f"points must have length {d}, got shape {x.shape}")
            self.points_.append(x)
        if self.method not in ("hyperbolic", "triangle"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        self.threshold_ = 0.0

    def _kernel(self, z, x):
        return cm.continuum_kernel(self.signature_, z, x, self.gamma, self.control_, self.method)

    def _decompose(self, z, x):
        return cm.decompose_continuum(self.signature_, z, x, self.gamma, self.control_, self.method)
