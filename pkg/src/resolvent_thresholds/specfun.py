"""Scalar special functions and the branch conventions used by the kernels.

Every series in this module carries a tail bound: summation stops only when
the remaining terms are bounded by a geometric majorant that falls below the
requested tolerance, and :class:`~.exceptions.ConvergenceError` is raised when
that cannot be established within the term budget.

Branch conventions
------------------
``branch_sqrt`` takes the root with positive imaginary part on
``C \\ [0, inf)``; ``branch_log`` is the principal logarithm on
``C \\ (-inf, 0]``.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_complex, check_nonneg_int, check_positive_int
from .exceptions import ConvergenceError, DomainError, PoleError

__all__ = [
    "SeriesControl",
    "HalfInteger",
    "branch_sqrt",
    "branch_log",
    "gamma_half_integer",
    "log_gamma_half_integer",
    "pochhammer",
    "bessel_j",
    "dilog",
    "gauss_2f1",
    "chebyshev_T",
    "sphere_moment",
    "compensated_sum",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation and tolerance settings shared by all series evaluations.

    Parameters
    ----------
    max_total_degree : int
        Initial truncation degree for multi-index series (raised adaptively
        up to ``degree_limit`` when ``adaptive`` is true).
    abs_tol, rel_tol : float
        A tail is accepted once it is below ``max(abs_tol, rel_tol * |sum|)``.
    degree_limit : int
        Hard budget on the number of series terms.
    adaptive : bool
        If false, multi-index series are truncated at exactly
        ``max_total_degree`` and the tail bound is only reported.
    """

    max_total_degree: int = 24
    abs_tol: float = 1e-15
    rel_tol: float = 1e-15
    degree_limit: int = 400
    adaptive: bool = True

    def __post_init__(self):
        check_positive_int(self.max_total_degree, "max_total_degree")
        check_positive_int(self.degree_limit, "degree_limit")
        for name in ("abs_tol", "rel_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol <= 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2], got {tol}")
        if self.degree_limit < self.max_total_degree:
            raise ValueError("degree_limit must be >= max_total_degree")

    @property
    def term_budget(self):
        return self.degree_limit if self.adaptive else self.max_total_degree

    def accepts(self, tail, total):
        return tail <= max(self.abs_tol, self.rel_tol * abs(total))


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class HalfInteger:
    """An exact half-integer ``twice / 2`` (integers have even ``twice``)."""

    twice: int

    @classmethod
    def of(cls, value):
        """Build from an int, a :class:`~fractions.Fraction` or a float."""
        if isinstance(value, HalfInteger):
            return value
        doubled = 2 * Fraction(value)
        if doubled.denominator != 1:
            raise DomainError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @property
    def value(self):
        return self.twice / 2

    @property
    def is_integer(self):
        return self.twice % 2 == 0

    def __add__(self, other):
        return HalfInteger(self.twice + HalfInteger.of(other).twice)

    def __float__(self):
        return self.value


def compensated_sum(terms, axis=0):
    """Neumaier-compensated sum of ``terms`` along ``axis`` in index order.

    Works for real or complex arrays; the order of accumulation is fixed, so
    results are reproducible bit for bit.
    """
    terms = np.moveaxis(np.asarray(terms), axis, 0)
    if np.iscomplexobj(terms):
        return compensated_sum(terms.real) + 1j * compensated_sum(terms.imag)
    total = np.zeros(terms.shape[1:], dtype=float)
    comp = np.zeros_like(total)
    for t in terms:
        s = total + t
        big = np.abs(total) >= np.abs(t)
        comp += np.where(big, (total - s) + t, (t - s) + total)
        total = s
    return total + comp


def _fsum_complex(values):
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


# ---------------------------------------------------------------------------
# branches


def branch_sqrt(w, boundary=False):
    """Square root with ``Im sqrt(w) > 0`` on ``C \\ [0, inf)``.

    Parameters
    ----------
    w : complex
    boundary : bool
        Allow ``w >= 0`` real and return the limit from the upper half-plane,
        ``+sqrt(w)``.
    """
    w = check_complex(w, "w")
    if w.imag == 0.0 and w.real >= 0.0:
        if not boundary:
            raise DomainError(f"branch_sqrt: w = {w!r} lies on the cut [0, inf)")
        return complex(math.sqrt(w.real), 0.0)
    root = cmath.sqrt(w)
    if root.imag < 0:
        root = -root
    return root


def branch_log(w, boundary=False):
    """Principal logarithm, ``-pi < Im log w < pi``, on ``C \\ (-inf, 0]``.

    With ``boundary=True`` a negative real ``w`` returns the limit from the
    upper half-plane, ``log|w| + i*pi``.
    """
    w = check_complex(w, "w")
    if w.imag == 0.0 and w.real <= 0.0:
        if not boundary or w.real == 0.0:
            raise DomainError(f"branch_log: w = {w!r} lies on the cut (-inf, 0]")
        return complex(math.log(-w.real), math.pi)
    return cmath.log(w)


def _sqrt_upper(w):
    """Vectorised ``branch_sqrt`` for arrays off the cut."""
    root = np.sqrt(np.asarray(w, dtype=complex))
    return np.where(root.imag < 0, -root, root)


# ---------------------------------------------------------------------------
# gamma and Pochhammer


def _log_double_factorial_odd(m):
    """log((2m-1)!!) for m >= 0."""
    return math.fsum(math.log(2 * i - 1) for i in range(1, m + 1))


def log_gamma_half_integer(x):
    """Return ``(log|Gamma(x)|, sign)`` for a half-integer ``x``."""
    x = HalfInteger.of(x)
    if x.is_integer:
        m = x.twice // 2
        if m <= 0:
            raise PoleError(f"Gamma has a pole at {m}")
        return math.fsum(math.log(i) for i in range(1, m)), 1
    if x.twice > 0:
        m = (x.twice - 1) // 2
        return _log_double_factorial_odd(m) - m * math.log(2) + 0.5 * math.log(math.pi), 1
    m = (1 - x.twice) // 2
    sign = -1 if m % 2 else 1
    return m * math.log(2) + 0.5 * math.log(math.pi) - _log_double_factorial_odd(m), sign


def gamma_half_integer(x):
    """Gamma at a half-integer from the double-factorial formulas.

    ``Gamma(1/2 + m) = (2m-1)!! sqrt(pi) / 2^m`` and
    ``Gamma(1/2 - m) = (-2)^m sqrt(pi) / (2m-1)!!``; integer arguments use
    factorials. The rational part is formed exactly before one rounding.
    """
    x = HalfInteger.of(x)
    if x.is_integer:
        m = x.twice // 2
        if m <= 0:
            raise PoleError(f"Gamma has a pole at {m}")
        return float(math.factorial(m - 1))
    if x.twice > 0:
        m = (x.twice - 1) // 2
        ratio = Fraction(_double_factorial_odd(m), 2**m)
    else:
        m = (1 - x.twice) // 2
        ratio = Fraction((-2) ** m, _double_factorial_odd(m))
    return float(ratio) * math.sqrt(math.pi)


def _double_factorial_odd(m):
    out = 1
    for i in range(1, m + 1):
        out *= 2 * i - 1
    return out


def pochhammer(nu, k):
    """Rising factorial ``nu (nu+1) ... (nu+k-1)``, evaluated as a product."""
    k = check_nonneg_int(k, "k")
    nu = float(nu)
    out = 1.0
    for j in range(k):
        out *= nu + j
    return out


def _rgamma_half(x):
    """1/Gamma at a half-integer (zero at the poles)."""
    x = HalfInteger.of(x)
    if x.is_integer and x.twice <= 0:
        return 0.0
    return 1.0 / gamma_half_integer(x)


# ---------------------------------------------------------------------------
# series with certified tails


def _sum_ratio_series(first, ratio, bound, ctl, what):
    """Sum ``t_0 = first``, ``t_{k+1} = t_k * ratio(k)``.

    ``bound(k)`` must bound ``|ratio(j)|`` for every ``j >= k``; the sum stops
    at the first ``k`` with ``bound(k) < 1`` and a geometric tail below
    tolerance.
    """
    terms = [first]
    t = first
    for k in range(ctl.term_budget):
        t = t * ratio(k)
        terms.append(t)
        rho = bound(k + 1)
        if rho < 1.0:
            tail = abs(t) * rho / (1.0 - rho)
            total = _fsum_complex(terms)
            if ctl.accepts(tail, total):
                return total
    raise ConvergenceError(f"{what}: tail not certified within {ctl.term_budget} terms")


def bessel_j(nu, z, ctl=DEFAULT_CONTROL):
    """Bessel function of the first kind by its power series.

    Orders are restricted to half-integers (enough for ``nu = d/2 - 1``).
    ``z**nu`` uses the principal power.
    """
    nu = HalfInteger.of(nu)
    z = check_complex(z, "z")
    if nu.is_integer and nu.twice < 0:
        n = -nu.twice // 2
        return (-1) ** n * bessel_j(HalfInteger(-nu.twice), z, ctl)
    v = nu.value
    if z == 0:
        if nu.twice == 0:
            return 1.0 + 0j
        if v > 0:
            return 0j
        raise DomainError(f"J_{v} is singular at z = 0")
    half_sq = (z / 2) ** 2
    first = (z / 2) ** v * _rgamma_half(nu + 1)
    ratio = lambda k: -half_sq / ((k + 1) * (k + 1 + v))

    def bound(k):
        den = (k + 1) * (k + 1 + v)
        return abs(half_sq) / den if den > 0 else math.inf

    return _sum_ratio_series(first, ratio, bound, ctl, "bessel_j")


def _terminating_2f1(a, b, c, z, m):
    """Polynomial ``F(-m, b; c; z)`` in exact rational arithmetic, rounded once.

    Floats are dyadic rationals, so coefficients and powers of ``z`` are
    exact; this removes the cancellation that plain summation suffers for
    large ``m`` and ``|z|`` near 1.
    """
    fa, fb, fc = Fraction(a), Fraction(b), Fraction(c)
    zr, zi = Fraction(z.real), Fraction(z.imag)
    # Horner from the top coefficient, complex arithmetic on pairs
    coef = [Fraction(1)]
    for k in range(m):
        coef.append(coef[-1] * (fa + k) * (fb + k) / ((fc + k) * (k + 1)))
    acc_r, acc_i = Fraction(0), Fraction(0)
    for ck in reversed(coef):
        acc_r, acc_i = acc_r * zr - acc_i * zi + ck, acc_r * zi + acc_i * zr
    return complex(float(acc_r), float(acc_i))


def gauss_2f1(a, b, c, z, ctl=DEFAULT_CONTROL):
    """Gauss hypergeometric series ``F(a, b; c; z)``.

    Terminating series (``a`` or ``b`` a nonpositive integer) are summed
    exactly to their last term for any ``z``; otherwise ``|z| < 1`` is
    required.
    """
    z = check_complex(z, "z")
    a, b, c = float(a), float(b), float(c)
    if c <= 0 and c == round(c):
        raise PoleError(f"gauss_2f1: c = {c} is a nonpositive integer")
    stop = [int(-p) for p in (a, b) if p <= 0 and p == round(p)]
    if stop:
        return _terminating_2f1(a, b, c, z, min(stop))
    if abs(z) >= 1:
        raise DomainError(f"gauss_2f1: |z| = {abs(z)} >= 1 for a non-terminating series")
    if z == 0:
        return 1.0 + 0j
    ratio = lambda k: (a + k) * (b + k) / ((c + k) * (k + 1)) * z

    def bound(k):
        if k <= abs(c):
            return math.inf
        return abs(z) * max(1.0, (abs(a) + k) / (k + 1)) * (abs(b) + k) / (k - abs(c))

    return _sum_ratio_series(1.0 + 0j, ratio, bound, ctl, "gauss_2f1")


# ---------------------------------------------------------------------------
# dilogarithm


def _bernoulli_numbers(count):
    """B_0 .. B_{count-1} (with B_1 = -1/2) as exact fractions."""
    b = [Fraction(0)] * count
    for m in range(count):
        b[m] = Fraction(1, 1) if m == 0 else -sum(
            Fraction(math.comb(m + 1, j)) * b[j] for j in range(m)
        ) / (m + 1)
    return b


_DILOG_COEFFS = [float(bn / math.factorial(n + 1)) for n, bn in enumerate(_bernoulli_numbers(40))]


def _dilog_bernoulli(w):
    """Li2(w) for ``|w| <= 1`` and ``Re w <= 1/2`` via ``u = -log(1-w)``."""
    u = -cmath.log(1 - w)
    terms = []
    upow = u
    for coeff in _DILOG_COEFFS:
        terms.append(coeff * upow)
        upow *= u
    return _fsum_complex(terms)


def _dilog_unit_disk(w):
    if w.real <= 0.5:
        return _dilog_bernoulli(w)
    # reflection Li2(w) + Li2(1-w) = pi^2/6 - log(w) log(1-w)
    return math.pi**2 / 6 - cmath.log(w) * cmath.log(1 - w) - _dilog_bernoulli(1 - w)


def dilog(w, ctl=DEFAULT_CONTROL):
    """Dilogarithm ``Li2(w) = sum w^k / k^2`` continued to ``C \\ [1, inf)``.

    Outside the unit disk the inversion identity
    ``Li2(1/w) = -Li2(w) - log(-w)^2 / 2 - pi^2 / 6`` is applied in the upper
    half-plane and extended by ``Li2(conj w) = conj Li2(w)``.
    """
    w = check_complex(w, "w")
    if w.imag == 0.0 and w.real >= 1.0:
        raise DomainError(f"dilog: w = {w!r} lies on the cut [1, inf)")
    if w == 0:
        return 0j
    if w.imag < 0:
        return dilog(w.conjugate(), ctl).conjugate()
    if abs(w) <= 1.0:
        return _dilog_unit_disk(w)
    inv = 1 / w
    if inv.imag == 0.0:
        inv = complex(inv.real, -0.0)
    inner = _dilog_unit_disk(inv) if inv.imag >= 0 else _dilog_unit_disk(inv.conjugate()).conjugate()
    return -inner - 0.5 * cmath.log(-w) ** 2 - math.pi**2 / 6


# ---------------------------------------------------------------------------
# misc


def chebyshev_T(n, x):
    """Chebyshev polynomial of the first kind by the three-term recurrence."""
    n = check_nonneg_int(n, "n")
    x = float(x)
    if n == 0:
        return 1.0
    prev, cur = 1.0, x
    for _ in range(n - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def sphere_moment(d, alpha):
    """``integral over S^{d-1} of omega^{2 alpha} dS``.

    Evaluates ``2 prod Gamma(alpha_j + 1/2) / Gamma(|alpha| + d/2)`` in log
    space from the half-integer gamma formulas.
    """
    d = check_positive_int(d, "d")
    alpha = tuple(check_nonneg_int(a, "alpha_j") for a in np.atleast_1d(alpha).tolist())
    if len(alpha) != d:
        raise ValueError(f"alpha must have length {d}")
    logs = [log_gamma_half_integer(HalfInteger(2 * a + 1))[0] for a in alpha]
    denom, _ = log_gamma_half_integer(HalfInteger(2 * sum(alpha) + d))
    return 2.0 * math.exp(math.fsum(logs) - denom)


def _log_sphere_moment_table(d, kmax):
    """Tables for vectorised sphere moments.

    Returns ``(lg_half, lg_total)`` with ``lg_half[m] = log Gamma(m + 1/2)``
    and ``lg_total[k] = log Gamma(k + d/2)`` for ``0 <= m, k <= kmax``.
    """
    lg_half = np.array([log_gamma_half_integer(HalfInteger(2 * m + 1))[0] for m in range(kmax + 1)])
    lg_total = np.array([log_gamma_half_integer(HalfInteger(2 * k + d))[0] for k in range(kmax + 1)])
    return lg_half, lg_total
