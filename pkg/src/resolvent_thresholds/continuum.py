"""Resolvent kernels of the ultra-hyperbolic operator and their branching parts.

The operator ``-(d_1^2 + ... + d_p^2 - d_{p+1}^2 - ... - d_{p+q}^2)`` on R^d
has symbol ``xi'^2 - xi''^2``.  Its truncated kernel

    k_gamma(z, x) = (2 pi)^{-d} int_{|xi'| + |xi''| < gamma} e^{i x xi} / (xi'^2 - xi''^2 - z) d xi

splits near ``z = 0`` into an explicit branching term built from the entire
function :func:`E_entire` and a remainder analytic in ``|z| < gamma^2``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_complex,
    check_complex_vector,
    check_nonneg_int,
    check_positive_int,
    check_positive_real,
)
from .exceptions import AccuracyError, ConvergenceError, DomainError
from .quadrature import ArcContour, composite_gauss_rule, contour_integral, gauss_nodes
from .specfun import (
    DEFAULT_CONTROL,
    HalfInteger,
    SeriesControl,
    _sqrt_upper,
    branch_log,
    branch_sqrt,
    compensated_sum,
    gamma_half_integer,
)

__all__ = [
    "Signature",
    "BranchingDecomposition",
    "xi_symbol",
    "E_entire",
    "sphere_average_e",
    "f_pm",
    "phi_pm",
    "psi_pm",
    "continuum_kernel",
    "continuum_branching",
    "decompose_continuum",
    "i_power",
]

SQRT_BRANCH = "sqrt_branch"
LOG_BRANCH = "log_branch"

_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


def i_power(k):
    """``i**k`` from ``k mod 4``, exact for any integer ``k``."""
    return _I_POWERS[int(k) % 4]


@dataclass(frozen=True)
class Signature:
    """Signature ``(p, q)`` of the operator, ``d = p + q >= 1``."""

    p: int
    q: int

    def __post_init__(self):
        check_nonneg_int(self.p, "p")
        check_nonneg_int(self.q, "q")
        if self.p + self.q < 1:
            raise ValueError("signature must have p + q >= 1")

    @classmethod
    def of(cls, sig):
        if isinstance(sig, Signature):
            return sig
        p, q = sig
        return cls(int(p), int(q))

    @property
    def d(self):
        return self.p + self.q

    @property
    def is_elliptic(self):
        return self.p == 0 or self.q == 0

    @property
    def is_odd_odd(self):
        return self.p % 2 == 1 and self.q % 2 == 1

    @property
    def parity_class(self):
        if self.is_elliptic:
            return "elliptic"
        if self.is_odd_odd:
            return "odd-odd"
        if self.p % 2 == 0 and self.q % 2 == 0:
            return "even-even"
        return "mixed"

    def split(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.d:
            raise ValueError(f"point must have {self.d} coordinates, got {x.shape[-1]}")
        return x[..., : self.p], x[..., self.p :]


@dataclass(frozen=True)
class BranchingDecomposition:
    """A kernel value split as ``branching_value + remainder_value``."""

    branching_value: complex
    remainder_value: complex
    form: str
    kernel_value: complex = complex("nan")
    error_estimate: float = 0.0

    def __post_init__(self):
        if self.form not in (SQRT_BRANCH, LOG_BRANCH):
            raise ValueError(f"unknown branching form {self.form!r}")


def branching_form(d):
    return SQRT_BRANCH if d % 2 else LOG_BRANCH


def xi_symbol(sig, xi):
    """``xi'^2 - xi''^2`` for a real vector ``xi``."""
    sig = Signature.of(sig)
    xi = np.asarray(xi, dtype=float)
    head, tail = sig.split(xi)
    return float(np.sum(head**2) - np.sum(tail**2))


# ---------------------------------------------------------------------------
# the entire function E


def _entire_series(d, w, ctl):
    """``sum_k (-w/4)^k / (k! Gamma(k + d/2))`` for an array ``w``."""
    w = np.asarray(w, dtype=complex)
    quarter = -w / 4
    amax = float(np.max(np.abs(quarter), initial=0.0))
    half_d = d / 2
    term = np.full(w.shape, 1.0 / gamma_half_integer(HalfInteger(d)), dtype=complex)
    terms = [term]
    for k in range(ctl.term_budget):
        term = term * quarter / ((k + 1) * (k + half_d))
        terms.append(term)
        rho = amax / ((k + 2) * (k + 1 + half_d))
        if rho < 1:
            tail = float(np.max(np.abs(term), initial=0.0)) * rho / (1 - rho)
            if tail <= ctl.abs_tol or (ctl.accepts(tail, float(np.min(np.abs(terms[0])))) and k > 2):
                break
    else:
        raise ConvergenceError(f"E series not certified within {ctl.term_budget} terms")
    return compensated_sum(np.stack(terms))


def E_entire(sig, w, ctl=DEFAULT_CONTROL):
    """Entire function ``E(w) = i^q / (2^d pi^{d/2}) sum (-w/4)^k / (k! Gamma(k+d/2))``.

    ``w`` may be a scalar or an array; arrays are evaluated elementwise.
    """
    sig = Signature.of(sig)
    scalar = np.ndim(w) == 0
    if scalar:
        w = check_complex(w, "w")
    pref = i_power(sig.q) / (2**sig.d * math.pi ** (sig.d / 2))
    out = pref * _entire_series(sig.d, w, ctl)
    return complex(out) if scalar else out


def E_bessel(sig, w, ctl=DEFAULT_CONTROL):
    """``E(w)`` through ``J_{d/2-1}(w^{1/2}) / w^{(d/2-1)/2}`` (``w != 0``)."""
    from .specfun import bessel_j

    sig = Signature.of(sig)
    w = check_complex(w, "w")
    if w == 0:
        raise DomainError("Bessel form of E has a removable singularity at w = 0")
    nu = HalfInteger(sig.d - 2)
    root = np.sqrt(w)
    pref = i_power(sig.q) / (2 * (2 * math.pi) ** (sig.d / 2))
    return complex(pref * bessel_j(nu, root, ctl) / w ** (nu.value / 2))


# ---------------------------------------------------------------------------
# sphere averages


def sphere_average_e(d, zeta, ctl=DEFAULT_CONTROL):
    """``(2 pi)^{-d} int_{S^{d-1}} exp(i zeta . omega) dS`` by its Taylor series.

    The multi-index series over ``alpha`` is grouped by total degree through
    a truncated polynomial product of the per-coordinate exponential series.
    ``zeta`` has shape ``(..., d)``; the result has shape ``zeta.shape[:-1]``.
    """
    d = check_positive_int(d, "d")
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape[-1] != d:
        raise ValueError(f"zeta must have trailing dimension {d}")
    batch = zeta.shape[:-1]
    zeta = zeta.reshape(-1, d)
    quarter = -(zeta**2) / 4
    amax = float(np.max(np.sum(np.abs(quarter), axis=1), initial=0.0))
    half_d = d / 2
    # majorant a^k / (k! Gamma(k + d/2)) fixes the truncation degree
    K = None
    bound = 1.0 / gamma_half_integer(HalfInteger(d))
    for k in range(ctl.term_budget):
        bound *= amax / ((k + 1) * (k + half_d))
        rho = amax / ((k + 2) * (k + 1 + half_d))
        if rho < 1 and bound * rho / (1 - rho) <= ctl.abs_tol:
            K = k + 1
            break
    if K is None:
        raise ConvergenceError(f"sphere average not certified within {ctl.term_budget} terms")
    m = np.arange(K + 1)
    inv_fact = np.array([1.0 / math.factorial(j) for j in range(K + 1)])
    coeff = None
    for j in range(d):
        series = quarter[:, j : j + 1] ** m * inv_fact
        if coeff is None:
            coeff = series
            continue
        prod = np.zeros_like(coeff)
        for k in range(K + 1):
            prod[:, k] = np.sum(coeff[:, : k + 1] * series[:, k::-1], axis=1)
        coeff = prod
    rgam = np.empty(K + 1)
    rgam[0] = 1.0 / gamma_half_integer(HalfInteger(d))
    for k in range(K):
        rgam[k + 1] = rgam[k] / (k + half_d)
    total = compensated_sum((coeff * rgam).T)
    out = 2.0 / (2**d * math.pi ** (d / 2)) * total
    return out.reshape(batch) if batch else complex(out[0])


def _e_via_entire(dim, zeta):
    """Sphere average through ``e(zeta) = 2 E(zeta . zeta)``, vectorised."""
    sq = np.sum(np.asarray(zeta, dtype=complex) ** 2, axis=-1)
    return 2.0 * E_entire(Signature(dim, 0), sq) if np.ndim(sq) else 2.0 * E_entire(Signature(dim, 0), complex(sq))


# ---------------------------------------------------------------------------
# f, phi, psi


def _check_sign(sign):
    if sign not in ("plus", "minus", "+", "-"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return 1 if sign in ("plus", "+") else -1


def _f_values(sig, s, sigma, zeta, average):
    """Vectorised ``f_s(sigma, zeta)``; ``zeta`` broadcasts against ``sigma``."""
    sigma = np.asarray(sigma, dtype=complex)
    inv = 1.0 / sigma
    a = sigma + s * inv
    b = sigma - s * inv
    zeta = np.asarray(zeta, dtype=complex)
    zp, zq = zeta[..., : sig.p], zeta[..., sig.p :]
    ep = average(sig.p, 0.5 * a[..., None] * zp)
    eq = average(sig.q, 0.5 * b[..., None] * zq)
    return a ** (sig.p - 1) * b ** (sig.q - 1) / 2 ** (sig.d - 2) * ep * eq


def _require_hyperbolic(sig):
    if sig.p < 1 or sig.q < 1:
        raise DomainError(f"f, phi and psi need p, q >= 1, got {sig}")


def f_pm(sig, sign, sigma, zeta, ctl=DEFAULT_CONTROL):
    """Integrand ``f_+`` (``sign='plus'``) or ``f_-`` of the hyperbolic expansion.

    ``f_+(sigma, zeta) = 2^{2-d} (sigma + 1/sigma)^{p-1} (sigma - 1/sigma)^{q-1}
    e'((sigma + 1/sigma) zeta'/2) e''((sigma - 1/sigma) zeta''/2)``; ``f_-``
    swaps the two signs. ``sigma`` may be an array.
    """
    sig = Signature.of(sig)
    _require_hyperbolic(sig)
    s = _check_sign(sign)
    scalar = np.ndim(sigma) == 0
    sigma = np.asarray(sigma, dtype=complex)
    if np.any(sigma == 0):
        raise DomainError("f_pm is singular at sigma = 0")
    zeta = check_complex_vector(zeta, sig.d, "zeta")
    avg = lambda dim, z: sphere_average_e(dim, z, ctl)
    out = _f_values(sig, s, sigma, zeta, avg)
    return complex(out) if scalar else out


def _quad_forms(sig, zeta):
    zeta = check_complex_vector(zeta, sig.d, "zeta")
    zp, zq = sig.split(zeta)
    return complex(np.sum(zp**2)), complex(np.sum(zq**2))


def phi_pm(sig, sign, zeta, ctl=DEFAULT_CONTROL, method="closed", nodes=128):
    """Residue functional ``(2 pi i)^{-1} oint_{|sigma|=1} f(sigma, zeta) / sigma d sigma``.

    ``method='closed'`` returns the closed form (a multiple of ``E`` for
    odd-odd signatures, zero otherwise); ``method='contour'`` evaluates the
    defining contour integral.
    """
    sig = Signature.of(sig)
    _require_hyperbolic(sig)
    s = _check_sign(sign)
    if method == "contour":
        circle = ArcContour.circle(nodes=nodes)
        return contour_integral(circle, lambda t: f_pm(sig, sign, t, zeta, ctl) / t) / (2j * math.pi)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    a, b = _quad_forms(sig, zeta)
    if not sig.is_odd_odd:
        return 0j
    if s > 0:
        return 4 / (1j * math.pi) * E_entire(sig, a - b, ctl)
    return 4 * i_power(sig.p - sig.q) / (1j * math.pi) * E_entire(sig, b - a, ctl)


def psi_pm(sig, sign, zeta, ctl=DEFAULT_CONTROL, method="closed", nodes=48):
    """Quarter-arc functional ``int_{Gamma(1)} (f - phi) / sigma d sigma``.

    ``Gamma(1)`` is the arc ``e^{i theta}``, ``0 <= theta <= pi/2``. In
    ``method='contour'`` the subtracted residue is itself computed by contour
    quadrature, so the diagnostic never touches the closed forms.
    """
    sig = Signature.of(sig)
    _require_hyperbolic(sig)
    s = _check_sign(sign)
    if method == "contour":
        phi = phi_pm(sig, sign, zeta, ctl, method="contour")
        arc = ArcContour(0j, 1.0, 0.0, math.pi / 2, nodes)
        return contour_integral(arc, lambda t: (f_pm(sig, sign, t, zeta, ctl) - phi) / t)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    a, b = _quad_forms(sig, zeta)
    if sig.is_odd_odd:
        return 0j
    if s > 0:
        return 2 * E_entire(sig, a - b, ctl)
    return 2 * i_power(sig.p - sig.q) * E_entire(sig, b - a, ctl)


# ---------------------------------------------------------------------------
# truncated kernel


def _log_segment(a, b, s):
    """``int_a^b d rho / (rho - s)`` along the real segment ``[a, b]``."""
    if s.imag == 0.0:
        if a <= s.real <= b:
            raise DomainError("pole on the integration segment")
        return complex(math.log(abs(b - s.real)) - math.log(abs(a - s.real)))
    return complex(np.log(b - s) - np.log(a - s))


def _pole_subtracted(g, s, nodes, weights, a, b):
    """``int_a^b g(u) / (u - s) du`` with the pole contribution done exactly."""
    gs = complex(np.asarray(g(np.array([s])))[0])
    gu = np.asarray(g(nodes), dtype=complex)
    quotient = (gu - gs) / (nodes - s)
    return complex(math.fsum((quotient * weights).real), math.fsum((quotient * weights).imag)) + gs * _log_segment(a, b, s)


def _elliptic_kernel(sig, z, x, gamma, order, panels):
    """Radial integral for signatures ``(d, 0)`` and ``(0, d)``."""
    d = sig.d
    c, sign = (z, 1.0) if sig.q == 0 else (-z, -1.0)
    kappa = complex(np.sqrt(c))

    def g(rho):
        rho = np.asarray(rho, dtype=complex)
        return rho ** (d - 1) * _e_via_entire(d, rho[..., None] * x)

    nodes, weights = composite_gauss_rule(np.linspace(0.0, gamma, panels + 1), order)
    plus = _pole_subtracted(g, kappa, nodes, weights, 0.0, gamma)
    minus = _pole_subtracted(g, -kappa, nodes, weights, 0.0, gamma)
    return sign * (plus - minus) / (2 * kappa), nodes.size


def _graded_edges(top, levels):
    return np.concatenate(([0.0], top * 0.5 ** np.arange(levels, -1, -1)))


def _g_hyperbolic(sig, s, tau, x, gamma, order):
    """``tau^{d-2} int_0^{log(gamma/tau)} f_s(e^t, tau x) dt`` for an array of ``tau``."""
    tau = np.asarray(tau, dtype=complex)
    length = np.log(gamma / tau)
    n_panels = max(2, int(math.ceil(float(np.max(np.abs(length))))) + 1)
    t, wt = composite_gauss_rule(np.linspace(0.0, 1.0, n_panels + 1), order)
    svals = length[:, None] * t[None, :]
    sigma = np.exp(svals)
    zeta = tau[:, None, None] * x[None, None, :]
    vals = _f_values(sig, s, sigma, zeta, _e_via_entire)
    inner = np.sum(vals * wt[None, :], axis=1) * length
    return tau ** (sig.d - 2) * inner


def _hyperbolic_kernel(sig, z, x, gamma, order, levels):
    top = gamma**2
    nodes, weights = composite_gauss_rule(_graded_edges(top, levels), order)
    total = 0j
    for s, pole, scale in ((1, z, 0.5), (-1, -z, -0.5)):
        def g(u, s=s):
            return _g_hyperbolic(sig, s, np.sqrt(np.asarray(u, dtype=complex)), x, gamma, order)

        total += scale * _pole_subtracted(g, complex(pole), nodes, weights, 0.0, top)
    return total, 2 * nodes.size


def _triangle_kernel(sig, z, x, gamma, order, panels):
    """Composite Gauss over the two sub-triangles split by ``rho' = rho''``.

    Each triangle is collapsed onto the unit square (Duffy map) and
    integrated with a tensor Gauss rule.
    """
    u, wu = composite_gauss_rule(np.linspace(0.0, 1.0, panels + 1), order)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * U
    xp, xq = x[: sig.p], x[sig.p :]
    apex = np.array([gamma / 2, gamma / 2])
    total = 0j
    for corner in (np.array([gamma, 0.0]), np.array([0.0, gamma])):
        # point = u * corner + u v (apex - corner); |jacobian| = u |det|
        r1 = U * corner[0] + U * V * (apex[0] - corner[0])
        r2 = U * corner[1] + U * V * (apex[1] - corner[1])
        det = abs(corner[0] * (apex[1] - corner[1]) - corner[1] * (apex[0] - corner[0]))
        ep = _e_via_entire(sig.p, r1[..., None] * xp)
        eq = _e_via_entire(sig.q, r2[..., None] * xq)
        f = r1 ** (sig.p - 1) * r2 ** (sig.q - 1) * ep * eq / (r1**2 - r2**2 - z)
        total += complex(math.fsum((f * W * det).real.ravel()), math.fsum((f * W * det).imag.ravel()))
    return total, 2 * U.size


def continuum_kernel(sig, z, x, gamma=1.0, ctl=DEFAULT_CONTROL, method="hyperbolic",
                     quad_tol=1e-9, return_error=False):
    """Truncated resolvent kernel ``k_gamma(z, x)``.

    Parameters
    ----------
    sig : Signature or (p, q)
    z : complex
        Spectral parameter with ``Im z != 0``; values with ``Im z < 0`` are
        obtained as ``conj(k(conj z, conj x))``.
    x : array_like, length d
        Space point (complex entries allowed).
    gamma : float
        Frequency cutoff ``|xi'| + |xi''| < gamma``.
    method : {'hyperbolic', 'triangle'}
        ``'hyperbolic'`` integrates in the coordinates ``rho' = tau cosh t``,
        ``rho'' = tau sinh t`` (and the mirror) with the pole at ``tau^2 = z``
        removed analytically; accurate close to the threshold. ``'triangle'``
        applies a tensor Gauss rule directly over the two sub-triangles and
        is meant for ``z`` well away from zero. Elliptic signatures always
        use the radial integral with pole subtraction.
    quad_tol : float
        Relative tolerance on the refinement error estimate.
    return_error : bool
        Also return the error estimate.
    """
    sig = Signature.of(sig)
    z = check_complex(z, "z")
    gamma = check_positive_real(gamma, "gamma")
    x = check_complex_vector(x, sig.d, "x")
    if z.imag == 0.0:
        raise DomainError("continuum_kernel needs Im z != 0")
    if z.imag < 0:
        out = continuum_kernel(sig, z.conjugate(), np.conj(x), gamma, ctl, method, quad_tol, True)
        value, err = out[0].conjugate(), out[1]
        return (value, err) if return_error else value
    if sig.is_elliptic:
        coarse, _ = _elliptic_kernel(sig, z, x, gamma, 16, 8)
        value, _ = _elliptic_kernel(sig, z, x, gamma, 24, 16)
    elif method == "hyperbolic":
        coarse, _ = _hyperbolic_kernel(sig, z, x, gamma, 10, 36)
        value, _ = _hyperbolic_kernel(sig, z, x, gamma, 14, 44)
    elif method == "triangle":
        coarse, _ = _triangle_kernel(sig, z, x, gamma, 16, 8)
        value, _ = _triangle_kernel(sig, z, x, gamma, 16, 16)
    else:
        raise ValueError(f"unknown method {method!r}")
    err = abs(value - coarse)
    if err > quad_tol * max(1.0, abs(value)):
        raise AccuracyError(f"continuum_kernel: refinement estimate {err:.3e} exceeds tolerance")
    return (value, err) if return_error else value


def continuum_branching(sig, z, x, ctl=DEFAULT_CONTROL, boundary=False):
    """Branching term ``i pi (sqrt z)^{d-2} E(z (x'^2 - x''^2))`` (odd ``d``)
    or ``-(sqrt z)^{d-2} (log z) E(z (x'^2 - x''^2))`` (even ``d``)."""
    sig = Signature.of(sig)
    z = check_complex(z, "z")
    x = check_complex_vector(x, sig.d, "x")
    a, b = _quad_forms(sig, x)
    coeff = E_entire(sig, z * (a - b), ctl)
    root_power = branch_sqrt(z, boundary) ** (sig.d - 2)
    if sig.d % 2:
        return 1j * math.pi * root_power * coeff
    return -root_power * branch_log(z, boundary) * coeff


def decompose_continuum(sig, z, x, gamma=1.0, ctl=DEFAULT_CONTROL, method="hyperbolic", quad_tol=1e-9):
    """Split ``k_gamma(z, x)`` into its branching term and analytic remainder."""
    sig = Signature.of(sig)
    z = check_complex(z, "z")
    if not z.imag > 0:
        raise DomainError("decompose_continuum evaluates only Im z > 0")
    value, err = continuum_kernel(sig, z, x, gamma, ctl, method, quad_tol, return_error=True)
    branch = continuum_branching(sig, z, x, ctl)
    return BranchingDecomposition(branch, value - branch, branching_form(sig.d), value, err)


def _semicircle_remainder(sig, z, x, gamma=1.0, nodes=64):
    """Remainder for odd elliptic ``(d, 0)``: ``-1/2 int over the upper
    half circle |rho| = gamma of rho^{d-1} e(rho x) / (rho^2 - z) d rho``.

    Independent of :func:`continuum_kernel`; used as an oracle in tests.
    """
    sig = Signature.of(sig)
    if sig.q != 0 or sig.d % 2 == 0:
        raise DomainError("semicircle remainder applies to odd elliptic signatures")
    x = check_complex_vector(x, sig.d, "x")
    arc = ArcContour(0j, gamma, 0.0, math.pi, nodes)

    def f(rho):
        return rho ** (sig.d - 1) * _e_via_entire(sig.d, rho[..., None] * x) / (rho**2 - z)

    # the arc runs gamma -> -gamma through the upper half-plane
    return -0.5 * contour_integral(arc, f)
