import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resolvent_thresholds import specfun as sf
from resolvent_thresholds.exceptions import ConvergenceError, DomainError
from resolvent_thresholds.specfun import HalfInteger, SeriesControl

# mpmath reference values (30 digits), frozen
BESSEL_CASES = [
    (2.5, 1.3 + 0.7j, complex(0.058458437093055865624, 0.11553127751823923479)),
    (0, 3 - 2j, complex(-1.2492348796074221964, 0.94798379205773477611)),
    (-1.5, 0.4 + 2j, complex(-1.0286107729102172773, -0.2684056941299475776)),
]
HYP2F1_CASES = [
    (0.3, 0.7, 1.5, 0.25, complex(1.0395584540887966814, 0.0)),
    (0.5, -0.5, 2.5, 0.6 + 0.2j, complex(0.93610884325590108435, -0.023456815683166967764)),
    (1.5, 2.5, 1.5, -0.8 + 0.3j, complex(0.20362311475221922722, 0.089197034026974294944)),
    (-2.5, 3.5, 1, 0.9j, complex(-11.467298707129588404, -4.7745759640783647674)),
]
DILOG_CASES = [
    (2 + 1j, complex(1.1866885370000578311, 2.4077407693457720017)),
    (-3 + 0.5j, complex(-1.948171791653847674, 0.23050460321078513629)),
    (0.3 - 0.4j, complex(0.26659686674274041589, -0.46136289181910899428)),
    (1 + 1e-3j, complex(1.6433669749208800547, 0.0079085382630580532692)),
]

finite = dict(allow_nan=False, allow_infinity=False)


class TestBranches:
    def test_sqrt_upper_half_plane(self):
        assert sf.branch_sqrt(-4.0) == pytest.approx(2j)
        assert sf.branch_sqrt(1j).imag > 0
        assert sf.branch_sqrt(4 - 1e-300j) == pytest.approx(-2 + 0j)

    def test_sqrt_cut(self):
        with pytest.raises(DomainError):
            sf.branch_sqrt(2.0)
        assert sf.branch_sqrt(2.0, boundary=True) == pytest.approx(math.sqrt(2))

    def test_log_cut(self):
        with pytest.raises(DomainError):
            sf.branch_log(-1.0)
        assert sf.branch_log(-1.0, boundary=True) == pytest.approx(1j * math.pi)
        with pytest.raises(DomainError):
            sf.branch_log(0.0, boundary=True)

    @given(st.floats(-5, 5, **finite), st.floats(-math.pi + 1e-6, math.pi - 1e-6))
    def test_sqrt_squares_back(self, logr, arg):
        w = cmath.rect(math.exp(logr), arg)
        if w.imag == 0:
            return
        s = sf.branch_sqrt(w)
        assert s.imag > 0
        assert abs(s * s - w) <= 1e-14 * abs(w)


class TestGamma:
    @pytest.mark.parametrize("twice", [1, 2, 3, 7, 20, -1, -3, -9, 41])
    def test_against_mpmath(self, twice):
        ref = float(mpmath.gamma(mpmath.mpf(twice) / 2))
        assert sf.gamma_half_integer(HalfInteger(twice)) == pytest.approx(ref, rel=1e-14)

    def test_poles(self):
        with pytest.raises(DomainError):
            sf.gamma_half_integer(HalfInteger(0))
        with pytest.raises(DomainError):
            sf.gamma_half_integer(HalfInteger(-4))

    def test_half_integer_parsing(self):
        assert HalfInteger.of(1.5).twice == 3
        with pytest.raises(DomainError):
            HalfInteger.of(0.25)

    @given(st.integers(-30, 60))
    def test_recurrence(self, twice):
        x = HalfInteger(twice)
        if x.is_integer and twice <= 0:
            return
        g1 = sf.gamma_half_integer(HalfInteger(twice + 2))
        assert g1 == pytest.approx(x.value * sf.gamma_half_integer(x), rel=1e-13)

    def test_log_gamma_sign(self):
        lg, sign = sf.log_gamma_half_integer(HalfInteger(-1))
        assert sign == -1
        assert math.exp(lg) == pytest.approx(2 * math.sqrt(math.pi))


class TestPochhammer:
    @pytest.mark.parametrize("nu,k", [(0.5, 0), (0.5, 6), (-2.5, 4), (-3.0, 5), (1.75, 10)])
    def test_against_mpmath(self, nu, k):
        assert sf.pochhammer(nu, k) == pytest.approx(float(mpmath.rf(nu, k)), rel=1e-14, abs=1e-300)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            sf.pochhammer(0.5, -1)


class TestBessel:
    @pytest.mark.parametrize("nu,z,ref", BESSEL_CASES)
    def test_frozen_values(self, nu, z, ref):
        assert abs(sf.bessel_j(nu, z) - ref) <= 1e-14 * max(1.0, abs(ref))

    @given(st.integers(-3, 7), st.floats(0.1, 12), st.floats(-math.pi / 2, math.pi / 2))
    def test_against_mpmath(self, twice, r, arg):
        nu = twice / 2
        z = cmath.rect(r, arg)
        ref = complex(mpmath.besselj(nu, z))
        assert abs(sf.bessel_j(nu, z) - ref) <= 1e-12 * max(1.0, abs(ref))

    @given(st.integers(1, 6), st.floats(0.2, 6, **finite), st.floats(-1, 1))
    def test_recurrence(self, twice, x, y):
        nu = twice / 2
        z = complex(x, y)
        lhs = sf.bessel_j(nu - 1, z) + sf.bessel_j(nu + 1, z)
        rhs = 2 * nu / z * sf.bessel_j(nu, z)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))

    def test_origin(self):
        assert sf.bessel_j(0, 0) == 1
        assert sf.bessel_j(1.5, 0) == 0
        with pytest.raises(DomainError):
            sf.bessel_j(-0.5, 0)

    def test_integer_orders_only_half(self):
        with pytest.raises(DomainError):
            sf.bessel_j(0.3, 1.0)


class TestHyp2F1:
    @pytest.mark.parametrize("a,b,c,z,ref", HYP2F1_CASES)
    def test_frozen_values(self, a, b, c, z, ref):
        assert abs(sf.gauss_2f1(a, b, c, z) - ref) <= 1e-13 * max(1.0, abs(ref))

    @given(st.integers(0, 12), st.floats(0, 0.999))
    def test_chebyshev_identity(self, n, x):
        lhs = sf.gauss_2f1(n, -n, 0.5, x * x)
        assert abs(lhs - math.cos(2 * n * math.asin(x))) <= 1e-12

    @given(
        st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 3),
        st.floats(-0.6, 0.6), st.floats(-0.6, 0.6),
    )
    def test_euler_transformation(self, a, b, c, x, y):
        z = complex(x, y)
        lhs = sf.gauss_2f1(a, b, c, z)
        rhs = (1 - z) ** (c - a - b) * sf.gauss_2f1(c - a, c - b, c, z)
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))

    def test_outside_disk_rejected(self):
        with pytest.raises(DomainError):
            sf.gauss_2f1(0.3, 0.4, 1.2, 1.5)

    def test_terminating_is_exact(self):
        # cancellation-prone polynomial: exact coefficients keep it at rounding level
        x = 0.95
        assert sf.gauss_2f1(8, -8, 0.5, x * x) == pytest.approx(math.cos(16 * math.asin(x)), abs=1e-14)


class TestDilog:
    @pytest.mark.parametrize("w,ref", DILOG_CASES)
    def test_frozen_values(self, w, ref):
        assert abs(sf.dilog(w) - ref) <= 1e-14 * max(1.0, abs(ref))

    def test_special_values(self):
        assert sf.dilog(1.0 - 1e-300j) == pytest.approx(math.pi**2 / 6)
        assert sf.dilog(-1.0) == pytest.approx(-math.pi**2 / 12)
        assert sf.dilog(0) == 0

    def test_cut(self):
        with pytest.raises(DomainError):
            sf.dilog(2.0)

    @given(st.floats(-6, 6, **finite), st.floats(0.01, 6))
    def test_inversion(self, x, y):
        w = complex(x, y)
        lhs = sf.dilog(1 / w) + sf.dilog(w) + 0.5 * cmath.log(-w) ** 2 + math.pi**2 / 6
        assert abs(lhs) <= 1e-12

    @given(st.floats(-4, 4, **finite), st.floats(-4, 4, **finite))
    def test_against_mpmath(self, x, y):
        w = complex(x, y)
        if y == 0 and x >= 1:
            return
        ref = complex(mpmath.polylog(2, w))
        assert abs(sf.dilog(w) - ref) <= 1e-13 * max(1.0, abs(ref))


class TestMisc:
    def test_chebyshev(self):
        assert sf.chebyshev_T(5, 0.3) == pytest.approx(math.cos(5 * math.acos(0.3)))

    @pytest.mark.parametrize("d,alpha", [(1, (0,)), (2, (1, 0)), (3, (1, 1, 0)), (4, (2, 0, 1, 1))])
    def test_sphere_moment_against_mpmath(self, d, alpha):
        ref = 2 * mpmath.fprod(mpmath.gamma(a + 0.5) for a in alpha) / mpmath.gamma(sum(alpha) + d / 2)
        assert sf.sphere_moment(d, alpha) == pytest.approx(float(ref), rel=1e-14)

    def test_sphere_area(self):
        assert sf.sphere_moment(3, (0, 0, 0)) == pytest.approx(4 * math.pi)

    def test_compensated_sum(self):
        terms = np.array([1e16, 1.0, -1e16, 1.0])
        assert sf.compensated_sum(terms) == 2.0

    def test_series_control_validation(self):
        with pytest.raises(ValueError):
            SeriesControl(abs_tol=0.5)
        with pytest.raises(ValueError):
            SeriesControl(max_total_degree=50, degree_limit=10)

    def test_tight_budget_raises(self):
        ctl = SeriesControl(max_total_degree=2, degree_limit=3)
        with pytest.raises(ConvergenceError):
            sf.bessel_j(0, 30.0, ctl)


@given(st.integers(0, 10), st.integers(-6, 6), st.integers(1, 6), st.floats(-0.9, 0.9))
def test_terminating_2f1_matches_exact_sum(m, b2, c2, x):
    from fractions import Fraction

    a, b, c = -m, b2 / 2, c2 / 2
    term, total = Fraction(1), Fraction(1)
    fx = Fraction(x)
    for k in range(m):
        term *= Fraction(a + k) * (Fraction(b2, 2) + k) / ((Fraction(c2, 2) + k) * (k + 1)) * fx
        total += term
    ref = float(total)
    assert abs(sf.gauss_2f1(a, b, c, x) - ref) <= 1e-13 * max(1.0, abs(ref))
