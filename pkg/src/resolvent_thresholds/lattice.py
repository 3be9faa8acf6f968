"""Resolvent kernel of the discrete Laplacian on Z^d and its threshold branching.

The kernel

    k(z, n) = (2 pi)^{-d} int_{T^d} e^{i n theta} / (Theta(theta) - z) d theta,
    Theta(theta) = sum_j 4 sin^2(theta_j / 2),

has branch points at the thresholds ``z = 4q``. Near ``z = 4q`` with
``w = z - 4q`` it equals ``i pi (sqrt w)^{d-2} sum_l E^(l)(w, n)`` (odd ``d``)
or ``-(sqrt w)^{d-2} log(w) sum_l E^(l)(w, n)`` (even ``d``) plus a function
analytic in ``|w| < 4``; the coefficients ``E^(l)`` are Lauricella ``F_B``
series centred at the critical points ``theta^(l) in {0, pi}^d``.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import jv

from ._validation import (
    check_complex,
    check_int_vector,
    check_nonneg_int,
    check_positive_int,
)
from .continuum import BranchingDecomposition, branching_form, i_power
from .exceptions import AccuracyError, AliasingError, ConvergenceError, DomainError
from .quadrature import ArcContour, TorusGrid, contour_integral, gauss_nodes, periodic_trapezoid
from .specfun import (
    DEFAULT_CONTROL,
    HalfInteger,
    branch_log,
    branch_sqrt,
    compensated_sum,
    log_gamma_half_integer,
)

__all__ = [
    "ThresholdContext",
    "SignPattern",
    "KernelSample",
    "theta_symbol",
    "apply_discrete_laplacian",
    "enumerate_critical_points",
    "default_grid",
    "lattice_kernel",
    "lattice_kernel_table",
    "E_l",
    "E_sum",
    "lattice_branching",
    "decompose_lattice",
    "lattice_sphere_average",
    "lattice_f_pm",
    "lattice_phi_psi",
    "SERIES_RADIUS",
]

_DEFAULT_N = {1: 64, 2: 64, 3: 48, 4: 24}


@dataclass(frozen=True)
class SignPattern:
    """Critical point ``theta in {0, pi}^d`` encoded by signs (``+1`` at 0)."""

    signs: tuple

    def __post_init__(self):
        if not self.signs or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be a nonempty tuple of +1/-1")

    @property
    def d(self):
        return len(self.signs)

    @property
    def theta(self):
        return tuple(0.0 if s > 0 else math.pi for s in self.signs)

    @property
    def q(self):
        return sum(1 for s in self.signs if s < 0)

    def pi_coordinates(self):
        return tuple(j for j, s in enumerate(self.signs) if s < 0)


@dataclass(frozen=True)
class ThresholdContext:
    """Threshold ``4q`` of the discrete Laplacian on ``Z^d`` (``p = d - q``)."""

    d: int
    q: int

    def __post_init__(self):
        check_positive_int(self.d, "d")
        check_nonneg_int(self.q, "q")
        if self.q > self.d:
            raise ValueError(f"q must lie in [0, d], got q = {self.q}, d = {self.d}")

    @property
    def p(self):
        return self.d - self.q

    @property
    def threshold_value(self):
        return 4.0 * self.q

    @property
    def n_patterns(self):
        return math.comb(self.d, self.q)

    @property
    def is_odd_odd(self):
        return self.p % 2 == 1 and self.q % 2 == 1

    def patterns(self):
        return enumerate_critical_points(self)

    def pattern(self, l):
        """Pattern ``l`` (1-based, lexicographic; ``l = 1`` is canonical)."""
        if isinstance(l, SignPattern):
            if l.d != self.d or l.q != self.q:
                raise ValueError("sign pattern does not belong to this threshold")
            return l
        l = check_positive_int(l, "l")
        pats = self.patterns()
        if l > len(pats):
            raise ValueError(f"pattern index {l} exceeds L = {len(pats)}")
        return pats[l - 1]


@dataclass(frozen=True)
class KernelSample:
    """A kernel value with its quadrature bookkeeping."""

    z: complex
    n: tuple
    value: complex
    quadrature_nodes: int
    error_estimate: float

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be nonnegative")


def theta_symbol(theta):
    """``Theta(theta) = sum_j 4 sin^2(theta_j / 2)`` over the last axis."""
    theta = np.asarray(theta, dtype=float)
    out = np.sum(4.0 * np.sin(0.5 * theta) ** 2, axis=-1)
    return float(out) if out.ndim == 0 else out


def apply_discrete_laplacian(u, n, origin=None):
    """Stencil value ``(Delta u)[n] = sum_j (u[n+e_j] + u[n-e_j] - 2u[n])``.

    Parameters
    ----------
    u : array_like, d-dimensional
        Values on a box of lattice points.
    n : sequence of int
        Lattice point at which the stencil is applied.
    origin : sequence of int, optional
        Lattice coordinates of ``u[0, ..., 0]`` (default the zero vector).
    """
    u = np.asarray(u)
    d = u.ndim
    n = check_int_vector(n, d, "n")
    origin = (0,) * d if origin is None else check_int_vector(origin, d, "origin")
    idx = [nj - oj for nj, oj in zip(n, origin)]
    for j in range(d):
        if not 1 <= idx[j] <= u.shape[j] - 2:
            raise IndexError(f"stencil at {n} leaves the array box along axis {j}")
    centre = u[tuple(idx)]
    total = 0j
    for j in range(d):
        up = list(idx)
        dn = list(idx)
        up[j] += 1
        dn[j] -= 1
        total += u[tuple(up)] + u[tuple(dn)] - 2 * centre
    return complex(total)


def enumerate_critical_points(ctx):
    """Critical points with exactly ``p`` zero coordinates, lexicographic.

    Ordering uses ``0 < pi`` coordinatewise, so the first entry is
    ``(0, ..., 0, pi, ..., pi)``.
    """
    out = []
    for pos in itertools.combinations(range(ctx.d), ctx.q):
        out.append(tuple(-1 if j in pos else 1 for j in range(ctx.d)))
    out.sort(key=lambda s: tuple(0 if v > 0 else 1 for v in s))
    return [SignPattern(s) for s in out]


# ---------------------------------------------------------------------------
# kernel


def default_grid(d):
    """Default torus grid: ``N = 64`` for ``d <= 2``, 48 for 3, 24 for 4."""
    return TorusGrid(d, _DEFAULT_N.get(d, 16))


def _trapezoid_value(grid, z, n):
    def f(*theta):
        phase = np.ones((1,) * grid.d, dtype=complex)
        symbol = np.zeros((1,) * grid.d)
        for nj, t in zip(n, theta):
            phase = phase * np.exp(1j * nj * t)
            symbol = symbol + 4.0 * np.sin(0.5 * t) ** 2
        return phase / (symbol - z)

    return periodic_trapezoid(grid, f)


def _closed_form_1d(z, n):
    """``zeta^|n| / (1/zeta - zeta)`` with ``zeta + 1/zeta = 2 - z``, ``|zeta| < 1``."""
    b = 2.0 - z
    root = np.sqrt(complex(b * b - 4.0))
    zeta = (b - root) / 2
    other = (b + root) / 2
    if abs(other) < abs(zeta):
        zeta = other
    return complex(zeta ** abs(n) / (1.0 / zeta - zeta))


def _bessel_value(z, n, order):
    """``i int_0^inf e^{i(z-2d)t} prod_j i^{n_j} J_{n_j}(2t) dt`` on unit panels."""
    d = len(n)
    length = (37.0 + math.log1p(1.0 / z.imag)) / z.imag
    panels = int(math.ceil(length))
    x, w = gauss_nodes(order)
    t = (np.arange(panels)[:, None] + 0.5 * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * w, panels)
    f = np.exp(1j * (z - 2 * d) * t)
    for nj in n:
        f = f * (i_power(nj) * jv(nj, 2.0 * t))
    total = f * weights
    return 1j * complex(math.fsum(total.real), math.fsum(total.imag)), t.size


def lattice_kernel(d, z, n, grid=None, method="trapezoid", tol=1e-13, max_nodes=2**23):
    """Resolvent kernel ``k(z, n)`` of the discrete Laplacian.

    Parameters
    ----------
    d : int
    z : complex
        ``Im z != 0``. Values with ``Im z < 0`` follow from
        ``k(conj z, n) = conj k(z, n)``.
    n : sequence of int, length d
    grid : TorusGrid, optional
        Trapezoid grid. If omitted, ``N`` is doubled from the default grid
        until the refinement estimate falls below ``tol * (1 + |k|)``.
    method : {'trapezoid', 'bessel', 'closed'}
        ``'trapezoid'``: periodic trapezoid rule, error estimated from
        ``N -> 2N``. ``'bessel'``: time-domain integral
        ``i int_0^inf e^{i(z-2d)t} prod i^{n_j} J_{n_j}(2t) dt``, accurate
        close to the real axis. ``'closed'``: exact formula, ``d = 1`` only.

    Returns
    -------
    KernelSample
    """
    d = check_positive_int(d, "d")
    z = check_complex(z, "z")
    n = check_int_vector(n, d, "n")
    if z.imag == 0.0:
        raise DomainError("lattice_kernel needs Im z != 0 (the real axis carries the spectrum)")
    if z.imag < 0:
        s = lattice_kernel(d, z.conjugate(), n, grid, method, tol, max_nodes)
        return KernelSample(z, n, s.value.conjugate(), s.quadrature_nodes, s.error_estimate)
    if method == "closed":
        if d != 1:
            raise ValueError("the closed form is available for d = 1 only")
        return KernelSample(z, n, _closed_form_1d(z, n[0]), 0, 0.0)
    if method == "bessel":
        coarse, _ = _bessel_value(z, n, 14)
        value, nodes = _bessel_value(z, n, 20)
        return KernelSample(z, n, value, nodes, abs(value - coarse))
    if method != "trapezoid":
        raise ValueError(f"unknown method {method!r}")
    need = 2 * max(abs(v) for v in n) + 2
    if grid is not None:
        if grid.d != d:
            raise ValueError(f"grid dimension {grid.d} does not match d = {d}")
        if grid.N <= need:
            raise AliasingError(f"grid N = {grid.N} must exceed 2 max|n_j| + 2 = {need}")
        value = _trapezoid_value(grid, z, n)
        finer = _trapezoid_value(grid.refined(), z, n)
        return KernelSample(z, n, value, grid.size, abs(finer - value))
    grid = default_grid(d)
    while grid.N <= need:
        grid = grid.refined()
    value = _trapezoid_value(grid, z, n)
    while True:
        finer = _trapezoid_value(grid.refined(), z, n)
        err = abs(finer - value)
        if err <= tol * (1.0 + abs(value)):
            return KernelSample(z, n, value, grid.size, err)
        grid = grid.refined()
        if grid.refined().size > max_nodes:
            raise AccuracyError(
                f"lattice_kernel: estimate {err:.3e} above tolerance within {max_nodes} nodes"
            )
        value = finer


def lattice_kernel_table(d, z, grid):
    """Trapezoid kernel for every ``n`` modulo ``N`` at once.

    Returns an array ``K`` of shape ``(N,) * d`` with ``K[n mod N]`` equal to
    the trapezoid value of ``k(z, n)`` on ``grid``; entries agree with
    :func:`lattice_kernel` on the same grid up to rounding.
    """
    z = check_complex(z, "z")
    if z.imag == 0.0:
        raise DomainError("lattice_kernel_table needs Im z != 0")
    if grid.d != d:
        raise ValueError(f"grid dimension {grid.d} does not match d = {d}")
    symbol = np.zeros((1,) * d)
    for t in grid.mesh():
        symbol = symbol + 4.0 * np.sin(0.5 * t) ** 2
    return np.fft.ifftn(1.0 / (symbol - z))


# ---------------------------------------------------------------------------
# Lauricella coefficients


@lru_cache(maxsize=64)
def _inverse_binomials(kmax):
    """``inv[k, m] = 1 / binom(k, m)`` for ``0 <= m <= k <= kmax``."""
    lf = np.array([math.lgamma(j + 1) for j in range(kmax + 1)])
    out = np.zeros((kmax + 1, kmax + 1))
    for k in range(kmax + 1):
        m = np.arange(k + 1)
        out[k, : k + 1] = np.exp(lf[m] + lf[k - m] - lf[k])
    out.flags.writeable = False
    return out


def _binomial_convolve(seqs, kmax):
    """``C_k = sum_{|alpha| = k} prod_j s_j(alpha_j) * prod_j alpha_j! / k!``.

    The multinomial weight keeps intermediate values bounded when each
    ``s_j(m)`` behaves like ``x^m``; the merge is done coordinate by
    coordinate in a fixed order.
    """
    inv = _inverse_binomials(kmax)
    out = np.asarray(seqs[0], dtype=float)
    for seq in seqs[1:]:
        seq = np.asarray(seq, dtype=float)
        new = np.empty(kmax + 1)
        for k in range(kmax + 1):
            new[k] = math.fsum(out[: k + 1] * seq[k::-1] * inv[k, : k + 1])
        out = new
    return out


def _fb_coefficients(n, signs, kmax):
    """Per-coordinate ``s^m (1/2 - n)_m (1/2 + n)_m / (m!)^2``."""
    seqs = []
    for nj, s in zip(n, signs):
        b = np.empty(kmax + 1)
        b[0] = 1.0
        for m in range(kmax):
            b[m + 1] = b[m] * s * (0.5 - nj + m) * (0.5 + nj + m) / ((m + 1) ** 2)
        seqs.append(b)
    return seqs


@lru_cache(maxsize=512)
def _fb_degree_tables(n, signs, kmax):
    """Signed and majorant degree coefficients of the ``F_B`` series.

    Returns ``(coef, major)`` with ``coef[k] * (w/4)^k`` the degree-``k``
    part, ``major[k] >= |coef[k]|``.
    """
    d = len(n)
    seqs = _fb_coefficients(n, signs, kmax)
    conv = _binomial_convolve(seqs, kmax)
    major = _binomial_convolve([np.abs(s) for s in seqs], kmax)
    half_d = HalfInteger(d)
    lg_half_d = log_gamma_half_integer(half_d)[0]
    weight = np.array(
        [math.exp(math.lgamma(k + 1) + lg_half_d - log_gamma_half_integer(HalfInteger(2 * k + d))[0])
         for k in range(kmax + 1)]
    )
    coef = conv * weight
    major = major * weight
    coef.flags.writeable = False
    major.flags.writeable = False
    return coef, major


def _geometric_tail(major_terms, base_ratio):
    """Tail bound from the last majorant terms; ``inf`` if not contracting."""
    last = major_terms[-1]
    if last == 0.0:
        return 0.0
    ratios = [base_ratio]
    for a, b in ((major_terms[-2], major_terms[-1]), (major_terms[-3], major_terms[-2])):
        if a > 0:
            ratios.append(b / a)
    rho = max(ratios)
    if rho >= 1.0:
        return math.inf
    return last * rho / (1.0 - rho)


def _series_sum(coef_fn, x, ctl, what):
    """Sum ``sum_k coef[k] x^k`` with a majorant tail test, raising the degree."""
    ax = abs(x)
    kmax = ctl.max_total_degree
    while True:
        coef, major = coef_fn(kmax)
        k = np.arange(kmax + 1)
        powers = x**k
        terms = coef * powers
        major_terms = major * ax**k
        total = compensated_sum(terms)
        tail = _geometric_tail(major_terms, ax)
        if ctl.accepts(tail, total) or not ctl.adaptive:
            return complex(total), tail
        if kmax >= ctl.degree_limit:
            raise ConvergenceError(f"{what}: tail {tail:.3e} not certified at degree {kmax}")
        kmax = min(2 * kmax, ctl.degree_limit)


# default series domain, kept clear of the convergence boundary |w| = 4
SERIES_RADIUS = 3.5


def _check_series_domain(w, radius, name, closed=False):
    if abs(w) > radius if closed else abs(w) >= radius:
        bound = "<=" if closed else "<"
        raise DomainError(f"{name} must satisfy |{name}| {bound} {radius}, got {w!r}")


def E_l(ctx, l, w, n, ctl=DEFAULT_CONTROL, radius=SERIES_RADIUS):
    """Branching coefficient ``E^(l)(w, n)`` at the critical point ``theta^(l)``.

    ``E^(l)(w, n) = (-1)^{|n_pi|} i^q / (2^d pi^{d/2} Gamma(d/2))
    F_B(1/2 - n, 1/2 + n; d/2; s w / 4)`` where ``s`` is the sign pattern
    (``+`` where ``theta_j = 0``, ``-`` where ``theta_j = pi``) and ``|n_pi|``
    sums ``|n_j|`` over the ``pi`` coordinates.

    ``|w| <= radius`` is required; ``radius`` may be raised towards, but not
    to, the convergence radius 4.
    """
    pat = ctx.pattern(l)
    w = check_complex(w, "w")
    n = check_int_vector(n, ctx.d, "n")
    if not 0 < radius < 4:
        raise ValueError(f"radius must lie in (0, 4), got {radius}")
    _check_series_domain(w, radius, "w", closed=True)
    total, _ = _series_sum(lambda k: _fb_degree_tables(n, pat.signs, k), w / 4, ctl, "E_l")
    n_pi = sum(abs(n[j]) for j in pat.pi_coordinates())
    lg, _ = log_gamma_half_integer(HalfInteger(ctx.d))
    pref = (-1) ** n_pi * i_power(ctx.q) / (2**ctx.d * math.pi ** (ctx.d / 2) * math.exp(lg))
    return pref * total


def E_sum(ctx, w, n, ctl=DEFAULT_CONTROL):
    """``sum_l E^(l)(w, n)`` over the critical points, in enumeration order."""
    vals = [E_l(ctx, pat, w, n, ctl) for pat in ctx.patterns()]
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def lattice_branching(ctx, w, n, ctl=DEFAULT_CONTROL, boundary=False):
    """Branching term ``i pi (sqrt w)^{d-2} sum E^(l)`` (odd ``d``) or
    ``-(sqrt w)^{d-2} log(w) sum E^(l)`` (even ``d``).

    ``Im w > 0`` is required; with ``boundary=True`` real ``w`` is accepted
    and the branch functions return their upper-half-plane limits.
    """
    w = check_complex(w, "w")
    if w.imag < 0 or (w.imag == 0 and not boundary):
        raise DomainError("lattice_branching evaluates Im w > 0 (or real w in boundary mode)")
    coeff = E_sum(ctx, w, n, ctl)
    root_power = branch_sqrt(w, boundary) ** (ctx.d - 2)
    if ctx.d % 2:
        return 1j * math.pi * root_power * coeff
    return -root_power * branch_log(w, boundary) * coeff


def decompose_lattice(ctx, w, n, grid=None, ctl=DEFAULT_CONTROL, method="trapezoid"):
    """Split ``k(w + 4q, n)`` into its branching term and analytic remainder."""
    w = check_complex(w, "w")
    if not w.imag > 0:
        raise DomainError("decompose_lattice evaluates only Im w > 0")
    _check_series_domain(w, SERIES_RADIUS, "w", closed=True)
    sample = lattice_kernel(ctx.d, w + ctx.threshold_value, n, grid, method)
    branch = lattice_branching(ctx, w, n, ctl)
    return BranchingDecomposition(
        branch, sample.value - branch, branching_form(ctx.d), sample.value, sample.error_estimate
    )


# ---------------------------------------------------------------------------
# lattice sphere averages


@lru_cache(maxsize=512)
def _sphere_average_tables(d, n, kmax):
    """Degree coefficients ``W_k`` with ``e(rho, n) = (2 pi)^{-d} sum W_k rho^{2k}``.

    ``W_k = sum_{|alpha| = k} prod_j a_j(alpha_j) int_{S^{d-1}} omega^{2 alpha} dS``
    with ``a_j(m) = (1/2 - n_j)_m (1/2 + n_j)_m / (2m)!``, the Taylor
    coefficients of ``cos(2 n_j arcsin(x/2)) / sqrt(1 - x^2/4)`` in ``x^2``.
    The sphere moments factor as ``2 prod Gamma(alpha_j + 1/2) / Gamma(|alpha| + d/2)``;
    the ``alpha`` sum is accumulated with multinomial weights.
    """
    lg_fact = [math.lgamma(m + 1) for m in range(2 * kmax + 2)]
    seqs, mseqs = [], []
    for nj in n:
        # vals[m] = a(m) Gamma(m + 1/2) 4^m / m!, bounded in m
        vals = np.empty(kmax + 1)
        poch = 1.0
        for m in range(kmax + 1):
            if m:
                poch *= (0.5 - nj + m - 1) * (0.5 + nj + m - 1) / (4.0 * m)
            lg_half, _ = log_gamma_half_integer(HalfInteger(2 * m + 1))
            vals[m] = poch * math.exp(lg_half + 4 * m * math.log(2) - lg_fact[2 * m])
        seqs.append(vals)
        mseqs.append(np.abs(vals))
    conv = _binomial_convolve(seqs, kmax)
    major = _binomial_convolve(mseqs, kmax)
    # restore k! / 4^k and divide by Gamma(k + d/2)
    weight = np.array(
        [2.0 * math.exp(lg_fact[k] - k * math.log(4) - log_gamma_half_integer(HalfInteger(2 * k + d))[0])
         for k in range(kmax + 1)]
    )
    coef = conv * weight / (2 * math.pi) ** d
    major = major * weight / (2 * math.pi) ** d
    coef.flags.writeable = False
    major.flags.writeable = False
    return coef, major


def _sphere_average_array(d, rho, n, ctl):
    """Vectorised lattice sphere average for an array ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    x = rho**2
    amax = float(np.max(np.abs(x), initial=0.0))
    if amax >= 4.0:
        raise DomainError("lattice sphere average needs |rho| < 2")
    kmax = ctl.max_total_degree
    while True:
        coef, major = _sphere_average_tables(d, n, kmax)
        k = np.arange(kmax + 1)
        major_terms = major * amax**k
        tail = _geometric_tail(major_terms, amax / 4)
        if ctl.accepts(tail, abs(coef[0])) or not ctl.adaptive:
            break
        if kmax >= ctl.degree_limit:
            raise ConvergenceError(f"lattice sphere average: tail {tail:.3e} at degree {kmax}")
        kmax = min(2 * kmax, ctl.degree_limit)
    # Horner in x for arrays; fixed order
    out = np.zeros(x.shape, dtype=complex)
    for c in coef[::-1]:
        out = out * x + c
    return out


def lattice_sphere_average(d, rho, n, ctl=DEFAULT_CONTROL, kind="sin_phase"):
    """Lattice sphere average ``e(rho, n)``.

    ``kind='sin_phase'`` gives
    ``(2 pi)^{-d} int prod_j exp(2i n_j arcsin(rho omega_j / 2)) / sqrt(1 - rho^2 omega_j^2 / 4) dS``;
    ``kind='cos_phase'`` uses ``arccos`` in the phase, which equals
    ``(-1)^{|n|}`` times the former. ``rho`` may be an array.
    """
    d = check_positive_int(d, "d")
    n = check_int_vector(n, d, "n")
    if kind not in ("sin_phase", "cos_phase"):
        raise ValueError(f"unknown kind {kind!r}")
    scalar = np.ndim(rho) == 0
    if scalar:
        rho = check_complex(rho, "rho")
    out = _sphere_average_array(d, rho, n, ctl)
    if kind == "cos_phase" and sum(abs(v) for v in n) % 2:
        out = -out
    return complex(out) if scalar else out


# ---------------------------------------------------------------------------
# lattice f, phi, psi


def _check_hyperbolic(ctx):
    if ctx.p < 1 or ctx.q < 1:
        raise DomainError(f"lattice f, phi, psi need p, q >= 1, got d = {ctx.d}, q = {ctx.q}")


def lattice_f_pm(ctx, sign, sigma, tau, n, ctl=DEFAULT_CONTROL):
    """``f_+(sigma, tau, n) = 2^{2-d} (sigma + 1/sigma)^{p-1} (sigma - 1/sigma)^{q-1}
    e'(tau (sigma + 1/sigma) / 2, n') e''(tau (sigma - 1/sigma) / 2, n'')``;
    ``f_-`` swaps the signs. ``e'`` is the sin-phase average in ``p``
    dimensions and ``e''`` the cos-phase average in ``q`` dimensions.
    """
    _check_hyperbolic(ctx)
    if sign not in ("plus", "minus", "+", "-"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    s = 1 if sign in ("plus", "+") else -1
    scalar = np.ndim(sigma) == 0
    sigma = np.asarray(sigma, dtype=complex)
    if np.any(sigma == 0):
        raise DomainError("lattice_f_pm is singular at sigma = 0")
    tau = check_complex(tau, "tau")
    n = check_int_vector(n, ctx.d, "n")
    a = sigma + s / sigma
    b = sigma - s / sigma
    ep = lattice_sphere_average(ctx.p, 0.5 * tau * a, n[: ctx.p], ctl, "sin_phase")
    eq = lattice_sphere_average(ctx.q, 0.5 * tau * b, n[ctx.p :], ctl, "cos_phase")
    out = a ** (ctx.p - 1) * b ** (ctx.q - 1) / 2 ** (ctx.d - 2) * ep * eq
    return complex(out) if scalar else out


def lattice_phi_psi(ctx, sign, which, tau, n, ctl=DEFAULT_CONTROL, method="closed", nodes=None):
    """Residue (``which='phi'``) or quarter-arc (``which='psi'``) functionals of
    the lattice ``f_pm``.

    ``method='closed'`` returns the closed forms in terms of ``E^(1)``;
    ``method='contour'`` evaluates ``(2 pi i)^{-1} oint_{|sigma|=1} f / sigma``
    and ``int_{Gamma(1)} (f - phi) / sigma`` by quadrature.
    """
    _check_hyperbolic(ctx)
    if which not in ("phi", "psi"):
        raise ValueError(f"which must be 'phi' or 'psi', got {which!r}")
    if sign not in ("plus", "minus", "+", "-"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    tau = check_complex(tau, "tau")
    n = check_int_vector(n, ctx.d, "n")
    _check_series_domain(tau, 2.0, "tau")
    plus = sign in ("plus", "+")
    if method == "contour":
        circle = ArcContour.circle(nodes=nodes or 128)
        f = lambda t: lattice_f_pm(ctx, sign, t, tau, n, ctl) / t
        phi = contour_integral(circle, f) / (2j * math.pi)
        if which == "phi":
            return phi
        arc = ArcContour(0j, 1.0, 0.0, math.pi / 2, nodes or 48)
        return contour_integral(arc, lambda t: (lattice_f_pm(ctx, sign, t, tau, n, ctl) - phi) / t)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    vanishes = (which == "psi") == ctx.is_odd_odd
    if vanishes:
        return 0j
    w = tau**2 if plus else -(tau**2)
    coeff = E_l(ctx, 1, w, n, ctl)
    phase = 1 if plus else i_power(ctx.p - ctx.q)
    scale = 4 / (1j * math.pi) if which == "phi" else 2.0
    return scale * phase * coeff
