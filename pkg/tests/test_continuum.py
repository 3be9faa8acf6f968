import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resolvent_thresholds import continuum as cm
from resolvent_thresholds.exceptions import DomainError

# mpmath quadrature of the cut-off Fourier integrals (20 digits), frozen
KERNEL_ORACLES = [
    ((1, 0), 0.3 + 0.2j, (0.4,), complex(-0.121404175031353682, 0.749087444421778322)),
    ((0, 1), -0.5 + 0.4j, (0.7,), complex(0.164591841373261048, 0.465403240083833888)),
    ((2, 0), 0.2 + 0.5j, (0.3, 0.4), complex(0.0425722673155626143, 0.108072919931589585)),
    ((1, 1), 0.5 + 0.7j, (0.3, -0.4), complex(-0.0266772565390219582, 0.0468184468300915527)),
    ((2, 1), 0.5 + 1j, (0.3, 0.4, 0.2), complex(-0.00186609401737126943, 0.00714134221076575797)),
]

signatures = st.sampled_from([(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
small = st.floats(-1, 1, allow_nan=False)


class TestSignature:
    def test_properties(self):
        s = cm.Signature(2, 1)
        assert s.d == 3 and not s.is_elliptic and not s.is_odd_odd
        assert cm.Signature(1, 1).is_odd_odd
        assert cm.Signature(0, 2).is_elliptic
        assert cm.Signature.of((3, 1)) == cm.Signature(3, 1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            cm.Signature(0, 0)
        with pytest.raises(ValueError):
            cm.Signature(-1, 2)

    def test_xi_symbol(self):
        assert cm.xi_symbol((2, 1), [1.0, 2.0, 3.0]) == pytest.approx(-4.0)

    def test_branching_form(self):
        assert cm.branching_form(3) == "sqrt_branch"
        assert cm.branching_form(2) == "log_branch"


class TestEntire:
    @given(st.integers(1, 4), st.floats(0.05, 30), st.floats(-math.pi, math.pi))
    def test_bessel_form(self, d, r, arg):
        w = r * complex(math.cos(arg), math.sin(arg))
        sig = cm.Signature(d, 0)
        assert abs(cm.E_entire(sig, w) - cm.E_bessel(sig, w)) < 1e-12 * max(1, abs(cm.E_entire(sig, w)))

    def test_against_mpmath(self):
        # E for (3, 1): i / (16 pi^2) * sum (-w/4)^k / (k! (k+1)!)
        w = 2.5 - 1j
        ref = 1j / (16 * mpmath.pi**2) * mpmath.nsum(lambda k: (-w / 4) ** k / (mpmath.factorial(k) * mpmath.factorial(k + 1)), [0, mpmath.inf])
        assert abs(cm.E_entire((3, 1), w) - complex(ref)) < 1e-16

    def test_array(self):
        w = np.array([0.0, 1.0, 2j])
        out = cm.E_entire((1, 1), w)
        assert out.shape == (3,)
        assert out[2] == pytest.approx(cm.E_entire((1, 1), 2j))

    def test_bessel_origin(self):
        with pytest.raises(DomainError):
            cm.E_bessel((1, 0), 0)


class TestSphereAverage:
    @pytest.mark.parametrize("r", [0.0, 0.3, 1.7, 4.0])
    def test_closed_forms(self, r):
        d1 = cm.sphere_average_e(1, [r])
        d2 = cm.sphere_average_e(2, [r * 0.6, r * 0.8])
        d3 = cm.sphere_average_e(3, [r, 0.0, 0.0])
        assert d1 == pytest.approx(2 * math.cos(r) / (2 * math.pi), abs=1e-15)
        assert d2 == pytest.approx(float(mpmath.besselj(0, r)) / (2 * math.pi), abs=1e-15)
        sinc = math.sin(r) / r if r else 1.0
        assert d3 == pytest.approx(4 * math.pi * sinc / (2 * math.pi) ** 3, abs=1e-15)

    @given(st.integers(1, 4), st.lists(st.floats(-2, 2), min_size=8, max_size=8))
    def test_equals_twice_E(self, d, raw):
        zeta = np.array(raw[:d]) + 1j * np.array(raw[4 : 4 + d])
        lhs = cm.sphere_average_e(d, zeta)
        rhs = 2 * cm.E_entire(cm.Signature(d, 0), complex(np.sum(zeta**2)))
        assert abs(lhs - rhs) < 1e-11

    def test_batch_shape(self):
        out = cm.sphere_average_e(2, np.ones((3, 4, 2)))
        assert out.shape == (3, 4)


class TestF:
    @given(signatures, st.floats(0.3, 1.5), st.floats(-0.5, 0.5), small, small)
    def test_symmetries(self, sig, sr, si, z1, z2):
        s = cm.Signature(*sig)
        sigma = complex(sr, si)
        zeta = np.linspace(z1, z2, s.d) + 0.2j
        for sign, other in (("plus", "minus"), ("minus", "plus")):
            f = cm.f_pm(s, sign, sigma, zeta)
            assert abs(cm.f_pm(s, sign, -sigma, zeta) - (-1) ** s.d * f) < 1e-12
            assert abs(cm.f_pm(s, sign, sigma, -zeta) - f) < 1e-12
            rot = cm.f_pm(s, sign, 1j * sigma, zeta)
            assert abs(rot - cm.i_power(s.d - 2) * cm.f_pm(s, other, sigma, 1j * zeta)) < 1e-12

    def test_needs_hyperbolic(self):
        with pytest.raises(DomainError):
            cm.f_pm((2, 0), "plus", 1.0, [0.1, 0.2])
        with pytest.raises(DomainError):
            cm.f_pm((1, 1), "plus", 0.0, [0.1, 0.2])
        with pytest.raises(ValueError):
            cm.f_pm((1, 1), "up", 1.0, [0.1, 0.2])


class TestPhiPsi:
    @pytest.mark.parametrize("sig", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
    def test_closed_vs_contour(self, sig):
        s = cm.Signature(*sig)
        zeta = np.linspace(-0.6, 0.8, s.d) + 0.3j
        for sign in ("plus", "minus"):
            for fn in (cm.phi_pm, cm.psi_pm):
                a = fn(s, sign, zeta)
                b = fn(s, sign, zeta, method="contour")
                assert abs(a - b) < 1e-10

    def test_exclusivity(self):
        zeta = [0.3, 0.2]
        assert cm.psi_pm((1, 1), "plus", zeta) == 0
        assert cm.phi_pm((1, 1), "plus", zeta) != 0
        assert cm.phi_pm((2, 1), "minus", zeta + [0.1]) == 0


class TestKernel:
    @pytest.mark.parametrize("sig,z,x,ref", KERNEL_ORACLES)
    def test_frozen_oracles(self, sig, z, x, ref):
        val, err = cm.continuum_kernel(sig, z, x, return_error=True)
        assert abs(val - ref) < 1e-11
        assert err < 1e-9

    def test_triangle_matches_hyperbolic(self):
        sig, z, x, ref = KERNEL_ORACLES[3]
        assert abs(cm.continuum_kernel(sig, z, x, method="triangle") - ref) < 1e-10

    def test_gamma_scaling(self):
        # k_gamma(z, x) = gamma^{d-2} k_1(z / gamma^2, gamma x)
        g = 1.7
        a = cm.continuum_kernel((1, 1), 0.5 + 0.7j, [0.2, 0.1], gamma=g)
        b = g**0 * cm.continuum_kernel((1, 1), (0.5 + 0.7j) / g**2, [0.2 * g, 0.1 * g])
        assert abs(a - b) < 1e-11

    def test_reflection(self):
        x = [0.3, -0.2]
        a = cm.continuum_kernel((1, 1), 0.3 - 0.4j, x)
        b = cm.continuum_kernel((1, 1), 0.3 + 0.4j, x)
        assert abs(a - b.conjugate()) < 1e-15

    def test_real_axis_rejected(self):
        with pytest.raises(DomainError):
            cm.continuum_kernel((1, 0), 0.5, [0.0])

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            cm.continuum_kernel((1, 1), 1j, [0, 0], method="bogus")

    def test_decompose(self):
        dec = cm.decompose_continuum((2, 1), 0.01 + 0.02j, [0.1, 0.0, 0.2])
        assert dec.form == "sqrt_branch"
        assert abs(dec.branching_value + dec.remainder_value - dec.kernel_value) < 1e-15
        with pytest.raises(DomainError):
            cm.decompose_continuum((2, 1), 0.01 - 0.02j, [0.1, 0.0, 0.2])

    @pytest.mark.parametrize("d", [1, 3])
    def test_semicircle_remainder(self, d):
        sig = cm.Signature(d, 0)
        x = [0.4] + [0.1] * (d - 1)
        z = 0.05 + 0.1j
        dec = cm.decompose_continuum(sig, z, x)
        assert abs(dec.remainder_value - cm._semicircle_remainder(sig, z, x)) < 1e-10

    def test_remainder_bounded_near_threshold(self):
        # the log singularity sits entirely in the branching term
        rems = [cm.decompose_continuum((1, 1), r * 1j, [0.0, 0.0]).remainder_value for r in (1e-2, 1e-3, 1e-4)]
        assert abs(rems[0] - rems[2]) < 0.05
        kern = [cm.continuum_kernel((1, 1), r * 1j, [0.0, 0.0]) for r in (1e-2, 1e-4)]
        assert abs(kern[1] - kern[0]) > 0.3
