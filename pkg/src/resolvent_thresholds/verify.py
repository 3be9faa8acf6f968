"""Verification suites: each identity becomes a pass/fail check with a tolerance.

Analyticity of the threshold remainders is tested through three necessary
consequences:

* ray limits: the remainder extrapolated to ``w = 0`` along different rays
  gives the same value, while the kernel itself has a fitted singular
  coefficient matching the branching term;
* negative controls: scaling the branching term by 1.1 must break the above;
* boundary values: for odd ``d`` the upper boundary value of the remainder
  on the real axis equals the value of an analytic model fitted away from
  the axis.

All sample sets are fixed (seeded generators, fixed grids) and reductions
run in a fixed order, so reports are reproducible to the bit.
"""

import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import continuum as cm
from . import lattice as lt
from . import specfun as sf
from ._formatting import format_complex
from ._validation import check_complex_vector, check_int_vector
from .exceptions import ConfigError
from .quadrature import (
    ExtrapolationLadder,
    TorusGrid,
    composite_gauss_rule,
    gauss_segment,
    richardson_limit,
)
from .specfun import DEFAULT_CONTROL, HalfInteger, SeriesControl

__all__ = [
    "CheckReport",
    "RayLimitReport",
    "SUITES",
    "run_identity_suite",
    "ray_limit_test",
    "boundary_jump_test",
    "reports_to_json",
    "write_json_report",
    "thread_count",
]

DEFAULT_RAYS = (math.pi / 6, math.pi / 2, 5 * math.pi / 6)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check; ``passed`` iff ``max_residual <= tolerance``."""

    check_id: str
    max_residual: float
    tolerance: float
    passed: bool
    samples: int
    runtime_ms: int = 0

    def __post_init__(self):
        if self.passed != (self.max_residual <= self.tolerance):
            raise ValueError("passed must equal max_residual <= tolerance")

    @classmethod
    def from_residual(cls, check_id, residual, tolerance, samples, runtime_ms=0):
        residual = float(residual)
        if math.isnan(residual):
            residual = math.inf
        return cls(check_id, residual, float(tolerance), residual <= tolerance, int(samples), int(runtime_ms))


@dataclass(frozen=True)
class RayLimitReport:
    """Per-ray extrapolated remainder limits and divergence indicators.

    ``kernel_divergence_indicator`` is the fitted coefficient of the singular
    profile (``r^{(d-2)/2}`` for odd ``d``, ``log(1/r)`` for even ``d``) in the
    kernel itself, maximised over rays; ``remainder_divergence_indicator`` is
    the same coefficient for the (perturbed) remainder.
    """

    target: str
    rays: tuple
    limits: tuple
    cross_ray_spread: float
    kernel_divergence_indicator: float
    remainder_divergence_indicator: float
    predicted_divergence: float
    perturbation: float
    radii: tuple = field(default=())
    extrapolation_errors: tuple = field(default=())

    def to_dict(self):
        out = asdict(self)
        out["limits"] = [format_complex(v) for v in self.limits]
        out["rays"] = list(self.rays)
        out["radii"] = list(self.radii)
        out["extrapolation_errors"] = list(self.extrapolation_errors)
        return out


def thread_count():
    """Worker threads from ``RESOLVENT_THREADS`` (default 1)."""
    raw = os.environ.get("RESOLVENT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RESOLVENT_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"RESOLVENT_THREADS must be >= 1, got {n}")
    return n


# ---------------------------------------------------------------------------
# ray-limit harness


def _singular_profile(d, r):
    return r ** ((d - 2) / 2) if d % 2 else np.log(1.0 / r)


def _singular_coefficient(d, radii, values, order=3):
    """Least-squares coefficient ``b`` of ``a + b s(r) + sum c_m r^m + sum e_m s(r) r^m``."""
    r = np.asarray(radii, dtype=float)
    s = _singular_profile(d, r)
    order = max(1, min(order, (r.size - 2) // 2))
    cols = [np.ones_like(r), s]
    for m in range(1, order + 1):
        cols.append(r**m)
        cols.append(s * r**m)
    A = np.column_stack(cols).astype(complex)
    # column scaling keeps the fit well conditioned
    scale = np.max(np.abs(A), axis=0)
    coef = np.linalg.lstsq(A / scale, np.asarray(values, dtype=complex), rcond=None)[0] / scale
    return float(abs(coef[1]))


def default_ladder(target, gamma=1.0):
    if target == "lattice":
        return ExtrapolationLadder(0.5, 0.6, 10)
    return ExtrapolationLadder(0.25 * gamma**2, 0.6, 10)


def _resolve_target(target, sig_or_ctx):
    if target == "lattice":
        if isinstance(sig_or_ctx, lt.ThresholdContext):
            return sig_or_ctx
        d, q = sig_or_ctx
        return lt.ThresholdContext(int(d), int(q))
    if target == "continuum":
        return cm.Signature.of(sig_or_ctx)
    raise ConfigError(f"unknown target {target!r}; expected 'lattice' or 'continuum'")


@lru_cache(maxsize=128)
def _ray_samples(target, key, point, rays, radii, gamma):
    """Kernel and branching values on the ray grid (cached for reuse by controls)."""
    kern = np.empty((len(rays), len(radii)), dtype=complex)
    branch = np.empty_like(kern)
    if target == "lattice":
        ctx = lt.ThresholdContext(*key)
        method = "closed" if ctx.d == 1 else "bessel"
        for i, phi in enumerate(rays):
            for k, r in enumerate(radii):
                w = r * complex(math.cos(phi), math.sin(phi))
                kern[i, k] = lt.lattice_kernel(ctx.d, w + ctx.threshold_value, point, method=method).value
                branch[i, k] = lt.lattice_branching(ctx, w, point)
    else:
        sig = cm.Signature(*key)
        x = np.array(point, dtype=complex)
        for i, phi in enumerate(rays):
            for k, r in enumerate(radii):
                z = r * complex(math.cos(phi), math.sin(phi))
                kern[i, k] = cm.continuum_kernel(sig, z, x, gamma)
                branch[i, k] = cm.continuum_branching(sig, z, x)
    kern.flags.writeable = False
    branch.flags.writeable = False
    return kern, branch


def _predicted_divergence(target, obj, point):
    if target == "lattice":
        coeff = lt.E_sum(obj, 0j, point)
    else:
        coeff = cm.E_entire(obj, 0j)
    return (math.pi if obj.d % 2 else 1.0) * abs(coeff)


def ray_limit_test(target, sig_or_ctx, n_or_x, rays=DEFAULT_RAYS, ladder=None, perturbation=1.0, gamma=1.0):
    """Ray-limit discriminator for the branching decomposition.

    Parameters
    ----------
    target : {'lattice', 'continuum'}
    sig_or_ctx : ThresholdContext, Signature or pair
        ``(d, q)`` for the lattice, ``(p, q)`` for the continuum.
    n_or_x : sequence
        Lattice point or space point.
    rays : sequence of float
        Angles in ``(0, pi)``.
    ladder : ExtrapolationLadder, optional
        Radii ``|w|`` of the samples along each ray.
    perturbation : float
        Factor applied to the branching term before subtraction
        (1 for the genuine test).
    gamma : float
        Continuum cutoff.
    """
    obj = _resolve_target(target, sig_or_ctx)
    rays = tuple(float(a) for a in rays)
    if not rays or any(not 0.0 < a < math.pi for a in rays):
        raise ConfigError("rays must be a nonempty list of angles in (0, pi)")
    ladder = ladder or default_ladder(target, gamma)
    radii = tuple(float(r) for r in ladder.offsets())
    if target == "lattice":
        point = check_int_vector(n_or_x, obj.d, "n")
        key = (obj.d, obj.q)
    else:
        point = tuple(complex(v) for v in check_complex_vector(n_or_x, obj.d, "x"))
        key = (obj.p, obj.q)
    kern, branch = _ray_samples(target, key, point, rays, radii, float(gamma))
    remainder = kern - perturbation * branch
    limits, errors = [], []
    for i in range(len(rays)):
        lim, err = richardson_limit(ladder, remainder[i])
        limits.append(lim)
        errors.append(err)
    spread = max((abs(a - b) for a, b in itertools.combinations(limits, 2)), default=0.0)
    k_ind = max(_singular_coefficient(obj.d, radii, kern[i]) for i in range(len(rays)))
    r_ind = max(_singular_coefficient(obj.d, radii, remainder[i]) for i in range(len(rays)))
    return RayLimitReport(
        target=target,
        rays=rays,
        limits=tuple(limits),
        cross_ray_spread=float(spread),
        kernel_divergence_indicator=k_ind,
        remainder_divergence_indicator=r_ind,
        predicted_divergence=_predicted_divergence(target, obj, point),
        perturbation=float(perturbation),
        radii=radii,
        extrapolation_errors=tuple(errors),
    )


# ---------------------------------------------------------------------------
# boundary values


def _remainder_at(ctx, n, w, perturbation, method):
    k = lt.lattice_kernel(ctx.d, w + ctx.threshold_value, n, method=method).value
    return k - perturbation * lt.lattice_branching(ctx, w, n)


def boundary_jump_test(ctx, n, w_real, ladder=None, tolerance=None, perturbation=1.0,
                       fit_degree=16, arc_nodes=40, method=None):
    """Upper boundary value of ``k - branching`` against an analytic model.

    The boundary value at ``w_real + i0`` is the Richardson limit of the
    remainder over ``w_real + i eps``. The prediction is a degree
    ``fit_degree`` polynomial in ``w`` fitted by least squares to remainder
    samples on the arc ``|w| = R``, ``arg w in [pi/12, 11 pi/12]``; it sees
    only data away from the real axis. For ``q = 0`` the remainder has a real
    Taylor series, so the imaginary part of the boundary value must vanish
    too (equivalently ``Im k(w + i0) = Im branching(w + i0)``).

    The kernel is evaluated by the closed form for ``d = 1`` and by the
    Bessel time-domain integral otherwise (default ``method``).
    """
    if not isinstance(ctx, lt.ThresholdContext):
        ctx = lt.ThresholdContext(*ctx)
    if ctx.d % 2 == 0:
        raise ConfigError("boundary_jump_test applies to odd d")
    w_real = float(w_real)
    if w_real == 0.0 or abs(w_real) >= 4.0:
        raise ConfigError("w_real must satisfy 0 < |w_real| < 4")
    n = check_int_vector(n, ctx.d, "n")
    method = method or ("closed" if ctx.d == 1 else "bessel")
    ladder = ladder or ExtrapolationLadder(0.1, 0.5, 8)
    if tolerance is None:
        tolerance = 1e-6 if ctx.d == 1 else 1e-4
    samples = [_remainder_at(ctx, n, complex(w_real, e), perturbation, method) for e in ladder.offsets()]
    boundary, _ = richardson_limit(ladder, samples)
    radius = max(1.0, abs(w_real))
    theta = np.linspace(math.pi / 12, 11 * math.pi / 12, arc_nodes)
    ws = radius * np.exp(1j * theta)
    vals = np.array([_remainder_at(ctx, n, complex(w), perturbation, method) for w in ws])
    A = np.vander(ws / radius, fit_degree, increasing=True)
    coef = np.linalg.lstsq(A, vals, rcond=None)[0]
    model = complex(np.polyval(coef[::-1], w_real / radius))
    residual = abs(boundary - model)
    if ctx.q == 0:
        residual = max(residual, abs(boundary.imag))
    check_id = f"boundary.lattice.d{ctx.d}q{ctx.q}.n{'_'.join(map(str, n))}.w{w_real:g}"
    return CheckReport.from_residual(check_id, residual, tolerance, len(samples) + arc_nodes)


# ---------------------------------------------------------------------------
# identity checks; each returns (max_residual, samples)


def _max(values):
    return float(max(values)) if len(values) else 0.0


def _check_gamma_recurrence():
    res = []
    for twice in range(-40, 80):
        x = HalfInteger(twice)
        if x.is_integer and twice <= 0:
            continue
        g = sf.gamma_half_integer(x)
        g1 = sf.gamma_half_integer(HalfInteger(twice + 2))
        res.append(abs(g1 - x.value * g) / abs(g1))
    return _max(res), len(res)


def _check_gamma_values():
    rp = math.sqrt(math.pi)
    cases = [(1, rp), (2, 1.0), (5, 0.75 * rp), (-1, -2 * rp), (-3, 4 * rp / 3)]
    res = [abs(sf.gamma_half_integer(HalfInteger(t)) - v) / abs(v) for t, v in cases]
    return _max(res), len(res)


def _check_pochhammer():
    res = []
    for nu in (0.5, -2.5, 1.0, 3.5, -7.5):
        for k in range(30):
            lhs = sf.pochhammer(nu, k + 1)
            rhs = sf.pochhammer(nu, k) * (nu + k)
            res.append(abs(lhs - rhs) / max(1.0, abs(lhs)))
    return _max(res), len(res)


def _check_chebyshev():
    res = []
    for n in range(65):
        for t in np.linspace(0.0, math.pi, 13):
            res.append(abs(sf.chebyshev_T(n, math.cos(t)) - math.cos(n * t)))
    return _max(res), len(res)


def _check_2f1_chebyshev():
    res = []
    for n in range(0, 9):
        for x in (0.0, 0.1, 0.4, 0.7, 0.95):
            lhs = sf.gauss_2f1(n, -n, 0.5, x * x)
            res.append(abs(lhs - math.cos(2 * n * math.asin(x))))
    return _max(res), len(res)


def _check_2f1_factor():
    res = []
    for n in range(-4, 5):
        for x in (0.1, 0.3, 0.6, 0.9):
            lhs = math.cos(2 * n * math.asin(x)) / math.sqrt(1 - x * x)
            res.append(abs(lhs - sf.gauss_2f1(0.5 - n, 0.5 + n, 0.5, x * x)))
    return _max(res), len(res)


def _check_2f1_euler():
    res = []
    cases = [(0.3, 0.7, 1.5, 0.25), (0.5, -0.5, 2.5, 0.6 + 0.2j), (1.2, 0.4, 0.9, -0.3), (0.25, 1.75, 3.0, 0.5j)]
    for a, b, c, z in cases:
        lhs = sf.gauss_2f1(a, b, c, z)
        rhs = (1 - z) ** (c - a - b) * sf.gauss_2f1(c - a, c - b, c, z)
        res.append(abs(lhs - rhs))
    return _max(res), len(res)


def _check_dilog_inversion():
    rng = np.random.default_rng(11)
    res = []
    pts = [1 + 2j] + [complex(a, b) for a, b in zip(rng.uniform(-4, 4, 30), rng.uniform(0.05, 4, 30))]
    for w in pts:
        lhs = sf.dilog(1 / w) + sf.dilog(w) + 0.5 * np.log(-w) ** 2 + math.pi**2 / 6
        res.append(abs(lhs))
    return _max(res), len(res)


def _check_dilog_conjugation():
    rng = np.random.default_rng(12)
    pts = [complex(a, b) for a, b in zip(rng.uniform(-5, 5, 40), rng.uniform(-5, 5, 40))]
    res = [abs(sf.dilog(w.conjugate()) - sf.dilog(w).conjugate()) for w in pts]
    return _max(res), len(res)


def _check_dilog_values():
    ref = math.pi**2 / 12 - math.log(2) ** 2 / 2
    res = [abs(sf.dilog(0.5) - ref), abs(sf.dilog(0.0)), abs(sf.dilog(-1.0) + math.pi**2 / 12)]
    return _max(res), len(res)


def _check_E_bessel():
    rng = np.random.default_rng(13)
    res = []
    for d in (1, 2, 3, 4):
        for q in range(d + 1):
            sig = cm.Signature(d - q, q)
            for _ in range(20 // (d + 1) + 1):
                w = 10 * rng.uniform(0.05, 1) * np.exp(1j * rng.uniform(-math.pi, math.pi))
                res.append(abs(cm.E_entire(sig, w) - cm.E_bessel(sig, w)))
    return _max(res), len(res)


def _check_sphere_average_identity():
    rng = np.random.default_rng(14)
    res = []
    for d in (1, 2, 3, 4):
        for _ in range(10):
            zeta = rng.uniform(-2, 2, d) + 1j * rng.uniform(-2, 2, d) * (rng.uniform() < 0.5)
            lhs = cm.sphere_average_e(d, zeta)
            rhs = 2 * cm.E_entire(cm.Signature(d, 0), complex(np.sum(zeta**2)))
            res.append(abs(lhs - rhs))
    return _max(res), len(res)


def _iterated_moment(d, alpha):
    """Sphere moment by iterated polar quadrature ``t = sin(theta)``."""
    if d == 1:
        return 2.0
    rest = alpha[1:]
    expo = 2 * sum(rest) + d - 2
    f = lambda th: np.sin(th) ** (2 * alpha[0]) * np.cos(th) ** expo
    inner = gauss_segment(f, -math.pi / 2, math.pi / 2, panels=4, order=24)
    return inner * _iterated_moment(d - 1, rest)


def _check_sphere_moment():
    res = []
    for d in (1, 2, 3, 4):
        for alpha in itertools.product(range(5), repeat=d):
            if sum(alpha) > 4:
                continue
            exact = sf.sphere_moment(d, alpha)
            res.append(abs(exact - _iterated_moment(d, alpha)) / exact)
    return _max(res), len(res)


def _check_branches():
    rng = np.random.default_rng(15)
    mags = np.exp(rng.uniform(-5, 5, 10000))
    args = rng.uniform(-math.pi, math.pi, 10000)
    ws = mags * np.exp(1j * args)
    res = []
    for w in ws:
        w = complex(w)
        if w.imag == 0:
            continue
        s = sf.branch_sqrt(w)
        res.append(abs(s * s - w) / abs(w))
        if s.imag <= 0:
            res.append(math.inf)
        lg = sf.branch_log(w)
        res.append(abs(np.exp(lg) - w) / abs(w))
        res.append(abs(sf.branch_log(1 / w) + lg) / max(1.0, abs(lg)))
    return _max(res), len(ws)


def _log_integral(w):
    """``int_0^1 log(l)/(l - w) dl - int_0^1 log(l)/(l + w) dl`` on dyadic panels."""
    edges = np.concatenate(([0.0], 0.5 ** np.arange(60, -1, -1)))
    nodes, weights = composite_gauss_rule(edges, 20)
    f = np.log(nodes) * (1 / (nodes - w) - 1 / (nodes + w))
    vals = f * weights
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


def _check_dilog_integral():
    rng = np.random.default_rng(16)
    res = []
    for _ in range(20):
        w = rng.uniform(1.5, 5) * np.exp(1j * rng.uniform(0.05, math.pi - 0.05))
        rhs = sf.dilog(1 / w) - sf.dilog(-1 / w)
        res.append(abs(_log_integral(w) - rhs))
    return _max(res), len(res)


def _continuum_phi_psi(sig):
    def run():
        rng = np.random.default_rng(17 + 10 * sig[0] + sig[1])
        s = cm.Signature(*sig)
        res = []
        for _ in range(10):
            zeta = rng.uniform(-1, 1, s.d) + 0.5j * rng.uniform(-1, 1, s.d)
            for sign in ("plus", "minus"):
                for fn in (cm.phi_pm, cm.psi_pm):
                    res.append(abs(fn(s, sign, zeta) - fn(s, sign, zeta, method="contour")))
        return _max(res), len(res)

    return run


def _check_f_symmetries():
    res = []
    rng = np.random.default_rng(18)
    for sig in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1)):
        s = cm.Signature(*sig)
        for _ in range(4):
            sigma = complex(rng.uniform(0.3, 1.5), rng.uniform(-0.5, 0.5))
            zeta = rng.uniform(-1, 1, s.d) + 0.3j * rng.uniform(-1, 1, s.d)
            for sign, other in (("plus", "minus"), ("minus", "plus")):
                f = cm.f_pm(s, sign, sigma, zeta)
                # f(-sigma) = (-1)^d f(sigma); antisymmetric for odd d
                res.append(abs(cm.f_pm(s, sign, -sigma, zeta) - (-1) ** s.d * f))
                res.append(abs(cm.f_pm(s, sign, sigma, -zeta) - f))
                rot = cm.f_pm(s, sign, 1j * sigma, zeta)
                res.append(abs(rot - cm.i_power(s.d - 2) * cm.f_pm(s, other, sigma, 1j * zeta)))
    return _max(res), len(res)


def _check_parity_exclusivity():
    res = []
    for sig in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3)):
        s = cm.Signature(*sig)
        zeta = np.linspace(0.2, 0.7, s.d) + 0.1j
        fn = cm.psi_pm if s.is_odd_odd else cm.phi_pm
        for sign in ("plus", "minus"):
            res.append(abs(fn(s, sign, zeta, method="contour")))
    return _max(res), len(res)


def _diamond_oracle(z, x, panels=8, order=16):
    """Cartesian oracle for signature (1, 1): ``u = a + b``, ``v = a - b`` over ``(-1, 1)^2``."""
    nodes, weights = composite_gauss_rule(np.linspace(-1.0, 1.0, panels + 1), order)
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    W = np.outer(weights, weights) * 0.5
    a, b = 0.5 * (U + V), 0.5 * (U - V)
    f = np.exp(1j * (x[0] * a + x[1] * b)) / (U * V - z) * W
    return complex(math.fsum(f.real.ravel()), math.fsum(f.imag.ravel())) / (4 * math.pi**2)


def _check_continuum_cartesian():
    res = []
    for z, x in ((1j, (0.0, 0.0)), (0.5 + 0.7j, (0.3, -0.4)), (-0.4 + 0.9j, (1.0, 0.5))):
        x = np.array(x, dtype=complex)
        k = cm.continuum_kernel((1, 1), z, x)
        res.append(abs(k - _diamond_oracle(z, x)))
    return _max(res), len(res)


def _check_continuum_elliptic_closed():
    # (1, 0), x = 0: (1/pi) int_0^1 d rho / (rho^2 - z)
    res = []
    for z in (1j, 0.3 + 0.2j, -2 + 0.5j):
        kappa = complex(np.sqrt(z))
        exact = (np.log((1 - kappa) / (-kappa)) - np.log((1 + kappa) / kappa)) / (2 * kappa * math.pi)
        res.append(abs(cm.continuum_kernel((1, 0), z, [0.0]) - exact))
    return _max(res), len(res)


def _check_continuum_reflection():
    res = []
    x = np.array([0.3, -0.2, 0.5])
    for z in (0.3 + 0.4j, -0.5 + 0.2j):
        a = cm.continuum_kernel((2, 1), z.conjugate(), x)
        b = cm.continuum_kernel((2, 1), z, x)
        res.append(abs(a - b.conjugate()))
    return _max(res), len(res)


def _check_continuum_semicircle():
    # odd elliptic remainder equals minus half the upper semicircle integral
    res = []
    for d, x in ((1, [0.4]), (3, [0.2, -0.3, 0.1])):
        sig = cm.Signature(d, 0)
        for z in (0.1 + 0.2j, -0.3 + 0.05j, 0.02j):
            dec = cm.decompose_continuum(sig, z, x)
            res.append(abs(dec.remainder_value - cm._semicircle_remainder(sig, z, x)))
    return _max(res), len(res)


def _check_lattice_closed_form():
    rng = np.random.default_rng(21)
    res = []
    for _ in range(50):
        z = complex(rng.uniform(-2, 6), rng.uniform(0.05, 2.0))
        n = int(rng.integers(-5, 6))
        k = lt.lattice_kernel(1, z, [n]).value
        res.append(abs(k - lt.lattice_kernel(1, z, [n], method="closed").value))
    return _max(res), len(res)


def _check_lattice_symmetry():
    res = []
    z = 1 + 1j
    grid = TorusGrid(2, 64)
    for n in ((1, 2), (3, 0), (2, -1)):
        base = lt.lattice_kernel(2, z, n, grid).value
        for m in ((-n[0], -n[1]), (n[1], n[0]), (-n[0], n[1])):
            res.append(abs(lt.lattice_kernel(2, z, m, grid).value - base))
    return _max(res), len(res)


def _lattice_phi_psi(dq):
    def run():
        d, q = dq
        ctx = lt.ThresholdContext(d, q)
        rng = np.random.default_rng(31 + 10 * d + q)
        res = []
        for _ in range(10):
            tau = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) / math.sqrt(2)
            n = tuple(int(v) for v in rng.integers(-2, 3, d))
            for sign in ("plus", "minus"):
                for which in ("phi", "psi"):
                    a = lt.lattice_phi_psi(ctx, sign, which, tau, n)
                    b = lt.lattice_phi_psi(ctx, sign, which, tau, n, method="contour")
                    res.append(abs(a - b))
        return _max(res), len(res)

    return run


def _check_lattice_sphere_elliptic():
    rng = np.random.default_rng(41)
    res = []
    for d in (1, 2, 3):
        ctx = lt.ThresholdContext(d, 0)
        for _ in range(8):
            rho = 1.5 * rng.uniform(0, 1) * np.exp(1j * rng.uniform(-math.pi, math.pi))
            n = tuple(int(v) for v in rng.integers(-2, 3, d))
            lhs = lt.lattice_sphere_average(d, rho, n)
            res.append(abs(lhs - 2 * lt.E_l(ctx, 1, rho**2, n)))
    return _max(res), len(res)


def _check_E_permutation():
    res = []
    ctx = lt.ThresholdContext(3, 1)
    n = (1, -2, 0)
    w = 0.3 + 0.4j
    for l, pat in enumerate(ctx.patterns(), start=1):
        base = lt.E_l(ctx, pat, w, n)
        for perm in itertools.permutations(range(3)):
            pn = tuple(n[j] for j in perm)
            ps = lt.SignPattern(tuple(pat.signs[j] for j in perm))
            res.append(abs(lt.E_l(ctx, ps, w, pn) - base))
    return _max(res), len(res)


def _check_E_real_series():
    res = []
    for d, q in ((1, 0), (1, 1), (2, 1), (3, 1), (3, 2)):
        ctx = lt.ThresholdContext(d, q)
        for w in np.linspace(-3.5, 3.5, 8):
            for n in ((0,) * d, (1,) + (0,) * (d - 1)):
                val = lt.E_sum(ctx, float(w), n) / cm.i_power(q)
                res.append(abs(val.imag))
    return _max(res), len(res)


def _check_E_sum_origin():
    ctx = lt.ThresholdContext(2, 1)
    res = []
    for w in (0.0, 0.3 + 0.1j, -1.2 + 0.5j):
        res.append(abs(lt.E_sum(ctx, w, (0, 0)) - 2 * lt.E_l(ctx, 1, w, (0, 0))))
    return _max(res), len(res)


def _check_trapezoid_eigen(d):
    def run():
        N = {1: 64, 2: 64, 3: 48}[d]
        grid = TorusGrid(d, N)
        zs = [2 + 1j, 3 + 0.5j] + [4 * q + 0.3 + 0.2j for q in range(d + 1)]
        res = []
        for z in zs:
            table = lt.lattice_kernel_table(d, z, grid)
            for n in itertools.product(range(-3, 4), repeat=d):
                idx = tuple(v % N for v in n)
                lap = 0j
                for j in range(d):
                    up = list(n)
                    dn = list(n)
                    up[j] += 1
                    dn[j] -= 1
                    lap += table[tuple(v % N for v in up)] + table[tuple(v % N for v in dn)] - 2 * table[idx]
                lhs = -lap - z * table[idx]
                delta = 1.0 if not any(n) else 0.0
                res.append(abs(lhs - delta) / (1 + abs(table[idx])))
        return _max(res), len(res)

    return run


def _E_box(ctx, l, w, radius, ctl):
    size = 2 * radius + 3
    box = np.empty((size,) * ctx.d, dtype=complex)
    for idx in itertools.product(range(size), repeat=ctx.d):
        box[idx] = lt.E_l(ctx, l, w, tuple(i - radius - 1 for i in idx), ctl)
    return box


def _check_E_eigen(dq):
    def run():
        ctx = lt.ThresholdContext(*dq)
        ctl = SeriesControl(max_total_degree=24, adaptive=False)
        res = []
        radius = 2
        origin = (-(radius + 1),) * ctx.d
        for w in (0.5 + 0.2j, -0.8 + 0.3j, 1j, 0.9):
            for l in range(1, ctx.n_patterns + 1):
                box = _E_box(ctx, l, w, radius, ctl)
                for n in itertools.product(range(-radius, radius + 1), repeat=ctx.d):
                    val = box[tuple(v + radius + 1 for v in n)]
                    lap = lt.apply_discrete_laplacian(box, n, origin)
                    res.append(abs(-lap - (w + 4 * ctx.q) * val))
        return _max(res), len(res)

    return run


def _check_psi_eigen():
    ctx = lt.ThresholdContext(3, 1)
    tau = 0.4
    res = []
    for sign, s in (("plus", 1), ("minus", -1)):
        size = 5
        box = np.empty((size,) * 3, dtype=complex)
        for idx in itertools.product(range(size), repeat=3):
            box[idx] = lt.lattice_phi_psi(ctx, sign, "psi", tau, tuple(i - 2 for i in idx))
        for n in itertools.product(range(-1, 2), repeat=3):
            lap = lt.apply_discrete_laplacian(box, n, (-2, -2, -2))
            res.append(abs(-lap - (s * tau**2 + 4 * ctx.q) * box[tuple(v + 2 for v in n)]))
    return _max(res), len(res)


def _check_sphere_average_eigen():
    res = []
    for d, rho in ((1, 0.6), (2, 1.1 + 0.2j), (3, 0.8)):
        size = 5
        box = np.empty((size,) * d, dtype=complex)
        for idx in itertools.product(range(size), repeat=d):
            box[idx] = lt.lattice_sphere_average(d, rho, tuple(i - 2 for i in idx))
        for n in itertools.product(range(-1, 2), repeat=d):
            lap = lt.apply_discrete_laplacian(box, n, (-2,) * d)
            res.append(abs(-lap - rho**2 * box[tuple(v + 2 for v in n)]))
    return _max(res), len(res)


# ray-limit checks ----------------------------------------------------------

LATTICE_BRANCH_CASES = ((1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1))
CONTINUUM_BRANCH_CASES = ((1, 0), (2, 0), (1, 1), (2, 1))


def _lattice_points(d):
    return ((0,) * d, (1,) * d)


def _continuum_points(d):
    return ((0.0,) * d, tuple(0.5 / (j + 1) for j in range(d)))


def _points(target, d):
    return _lattice_points(d) if target == "lattice" else _continuum_points(d)


def _tag(target, case, point):
    label = "d{}q{}" if target == "lattice" else "p{}q{}"
    pt = "_".join(f"{v:g}" for v in (np.real(point) if target == "continuum" else point))
    return f"{target}.{label.format(*case)}.at{pt}"


def _ray_spread_check(target, case):
    def run():
        res = []
        for point in _points(target, sum(case) if target == "continuum" else case[0]):
            rep = ray_limit_test(target, case, point)
            res.append(rep.cross_ray_spread)
        return _max(res), len(res)

    return run


def _ray_rate_check(target, case):
    def run():
        res = []
        for point in _points(target, sum(case) if target == "continuum" else case[0]):
            rep = ray_limit_test(target, case, point)
            res.append(abs(math.log(rep.kernel_divergence_indicator / rep.predicted_divergence)))
        return _max(res), len(res)

    return run


def _negative_control_check(target, case):
    """Residual ``genuine / perturbed`` of the discriminating quantity.

    For ``d <= 2`` the remainder divergence indicator is compared, for
    ``d = 3`` the cross-ray spread.
    """

    def run():
        res = []
        d = sum(case) if target == "continuum" else case[0]
        for point in _points(target, d):
            good = ray_limit_test(target, case, point)
            bad = ray_limit_test(target, case, point, perturbation=1.1)
            if d <= 2:
                ratio = good.remainder_divergence_indicator / bad.remainder_divergence_indicator
            else:
                ratio = good.cross_ray_spread / bad.cross_ray_spread
            res.append(ratio)
        return _max(res), len(res)

    return run


def _boundary_check(dq, n, w_real):
    def run():
        ctx = lt.ThresholdContext(*dq)
        rep = boundary_jump_test(ctx, n, w_real)
        return rep.max_residual, rep.samples

    return run


def _build_suites():
    specfun = [
        ("specfun.gamma.recurrence", 1e-13, _check_gamma_recurrence),
        ("specfun.gamma.values", 1e-14, _check_gamma_values),
        ("specfun.pochhammer.recurrence", 1e-15, _check_pochhammer),
        ("specfun.chebyshev.cos", 1e-12, _check_chebyshev),
        ("specfun.hyp2f1.chebyshev", 1e-12, _check_2f1_chebyshev),
        ("specfun.hyp2f1.factor", 1e-12, _check_2f1_factor),
        ("specfun.hyp2f1.euler", 1e-12, _check_2f1_euler),
        ("specfun.dilog.inversion", 1e-12, _check_dilog_inversion),
        ("specfun.dilog.conjugation", 1e-13, _check_dilog_conjugation),
        ("specfun.dilog.values", 1e-14, _check_dilog_values),
        ("specfun.entire.bessel", 1e-12, _check_E_bessel),
        ("specfun.sphere-average.entire", 1e-11, _check_sphere_average_identity),
        ("specfun.sphere-moment.quadrature", 1e-9, _check_sphere_moment),
        ("specfun.branches", 1e-15, _check_branches),
    ]
    continuum = [
        ("continuum.dilog-integral", 1e-10, _check_dilog_integral),
        ("continuum.f.symmetries", 1e-12, _check_f_symmetries),
        ("continuum.parity-exclusivity", 1e-12, _check_parity_exclusivity),
        ("continuum.kernel.cartesian", 1e-8, _check_continuum_cartesian),
        ("continuum.kernel.elliptic-closed", 1e-12, _check_continuum_elliptic_closed),
        ("continuum.kernel.reflection", 1e-12, _check_continuum_reflection),
        ("continuum.kernel.semicircle-remainder", 1e-10, _check_continuum_semicircle),
    ]
    for sig in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1)):
        continuum.append((f"continuum.phi-psi.p{sig[0]}q{sig[1]}", 1e-9, _continuum_phi_psi(sig)))
    lattice = [
        ("lattice.kernel.closed-form-1d", 1e-12, _check_lattice_closed_form),
        ("lattice.kernel.symmetry", 1e-13, _check_lattice_symmetry),
        ("lattice.sphere-average.elliptic", 1e-11, _check_lattice_sphere_elliptic),
        ("lattice.E.permutation", 1e-13, _check_E_permutation),
        ("lattice.E.real-series", 1e-12, _check_E_real_series),
        ("lattice.E.origin-symmetry", 1e-14, _check_E_sum_origin),
    ]
    for dq in ((2, 1), (3, 1), (3, 2), (4, 2)):
        lattice.append((f"lattice.phi-psi.d{dq[0]}q{dq[1]}", 1e-9, _lattice_phi_psi(dq)))
    eigen = [(f"eigen.trapezoid.d{d}", 1e-11, _check_trapezoid_eigen(d)) for d in (1, 2, 3)]
    for dq in ((1, 0), (2, 1), (3, 1)):
        eigen.append((f"eigen.E.d{dq[0]}q{dq[1]}", 1e-8, _check_E_eigen(dq)))
    eigen += [
        ("eigen.lattice-psi.d3q1", 1e-8, _check_psi_eigen),
        ("eigen.sphere-average", 1e-10, _check_sphere_average_eigen),
    ]
    branching, negative = [], []
    for target, cases in (("lattice", LATTICE_BRANCH_CASES), ("continuum", CONTINUUM_BRANCH_CASES)):
        for case in cases:
            label = ("d{}q{}" if target == "lattice" else "p{}q{}").format(*case)
            d = case[0] if target == "lattice" else sum(case)
            branching.append((f"branching.{target}.{label}.spread", 1e-5, _ray_spread_check(target, case)))
            if d <= 2:
                branching.append((f"branching.{target}.{label}.rate", math.log(2), _ray_rate_check(target, case)))
            tol = 1e-2 if d <= 2 else 1e-1
            negative.append((f"negative-control.{target}.{label}", tol, _negative_control_check(target, case)))
    boundary = [
        ("boundary.lattice.d1q0.w-1", 1e-6, _boundary_check((1, 0), (0,), -1.0)),
        ("boundary.lattice.d1q0.w1", 1e-6, _boundary_check((1, 0), (0,), 1.0)),
        ("boundary.lattice.d1q0.n2.w0.5", 1e-6, _boundary_check((1, 0), (2,), 0.5)),
        ("boundary.lattice.d3q1.w0.5", 1e-4, _boundary_check((3, 1), (0, 0, 0), 0.5)),
        ("boundary.lattice.d3q1.n1.w-0.7", 1e-4, _boundary_check((3, 1), (1, 0, 0), -0.7)),
        ("boundary.lattice.d3q0.w0.5", 1e-4, _boundary_check((3, 0), (0, 0, 0), 0.5)),
    ]
    return {
        "specfun": specfun,
        "continuum-identities": continuum,
        "lattice-identities": lattice,
        "eigenequations": eigen,
        "branching": branching,
        "negative-controls": negative,
        "boundary": boundary,
    }


SUITES = _build_suites()
SUITE_NAMES = tuple(SUITES) + ("all",)


def _run_check(entry, record_timings):
    check_id, tol, fn = entry
    start = time.perf_counter()
    residual, samples = fn()
    ms = int(round(1000 * (time.perf_counter() - start))) if record_timings else 0
    return CheckReport.from_residual(check_id, residual, tol, samples, ms)


def run_identity_suite(suite_id, ctl=DEFAULT_CONTROL, record_timings=False, threads=None):
    """Run a verification suite and return one :class:`CheckReport` per check.

    Parameters
    ----------
    suite_id : str
        One of ``specfun``, ``continuum-identities``, ``lattice-identities``,
        ``eigenequations``, ``branching``, ``negative-controls``,
        ``boundary`` or ``all``.
    ctl : SeriesControl
        Accepted for interface symmetry; checks that exercise a fixed
        truncation build their own control.
    record_timings : bool
        Fill ``runtime_ms``; off by default so reports are byte-stable.
    threads : int, optional
        Worker threads (default from ``RESOLVENT_THREADS``).

    Reports are returned sorted by ``check_id``.
    """
    if suite_id not in SUITE_NAMES:
        raise ConfigError(f"unknown suite {suite_id!r}; expected one of {', '.join(SUITE_NAMES)}")
    names = list(SUITES) if suite_id == "all" else [suite_id]
    entries = [e for name in names for e in SUITES[name]]
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda e: _run_check(e, record_timings), entries))
    else:
        reports = [_run_check(e, record_timings) for e in entries]
    return sorted(reports, key=lambda r: r.check_id)


def _json_default(obj):
    if isinstance(obj, complex):
        return format_complex(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite_or_text(x):
    return x if math.isfinite(x) else str(x)


def reports_to_json(reports):
    """Serialise :class:`CheckReport` objects (or a :class:`RayLimitReport`)."""
    if isinstance(reports, RayLimitReport):
        payload = reports.to_dict()
    else:
        payload = []
        for r in reports:
            row = asdict(r)
            row["max_residual"] = _finite_or_text(row["max_residual"])
            payload.append(row)
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def write_json_report(reports, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports_to_json(reports))
