"""Distribution functions: normal and Student-t marginals, product specs."""

import math

import mpmath
import numpy as np
import pytest

from gaussqmc import (
    Normal,
    StudentT,
    ValidationError,
    map_inverse,
    normal_pdf,
    normal_spec,
    phi_inv,
    student_t_spec,
    t_inv,
    t_pdf,
)
from gaussqmc.dist import DistributionSpec, normal_cdf, t_cdf

mpmath.mp.dps = 40


def phi_inv_oracle(p: float) -> float:
    """Bisection on the erfc-based normal CDF at 40 digits (erfc keeps
    full precision in the far tail where 1 + erf would cancel)."""
    cdf = lambda x: 0.5 * mpmath.erfc(-x / mpmath.sqrt(2))
    lo, hi = mpmath.mpf(-50), mpmath.mpf(50)
    for _ in range(200):
        mid = (lo + hi) / 2
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def t_cdf_oracle(x, nu):
    """Student-t CDF via the regularized incomplete beta at 40 digits."""
    x = mpmath.mpf(x)
    z = nu / (nu + x * x)
    ib = mpmath.betainc(nu / 2, mpmath.mpf(1) / 2, 0, z, regularized=True)
    half = ib / 2
    return half if x < 0 else 1 - half


def t_inv_oracle(p: float, nu: float) -> float:
    lo, hi = mpmath.mpf(-1e9), mpmath.mpf(1e9)
    for _ in range(300):
        mid = (lo + hi) / 2
        if t_cdf_oracle(mid, nu) < p:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


class TestPhiInv:
    def test_median(self):
        assert phi_inv(0.5) == 0.0

    def test_freeze_0975(self):
        # oracle value: phi_inv_oracle(0.975) = 1.959963984540054
        assert phi_inv_oracle(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
        assert float(phi_inv(0.975)) == pytest.approx(1.959964, abs=1e-6)

    def test_against_oracle_grid(self):
        for p in (1e-300, 1e-12, 0.2, 0.7, 1 - 1e-12, 1 - 1e-16):
            assert float(phi_inv(p)) == pytest.approx(phi_inv_oracle(p), abs=1e-9)

    def test_symmetry(self):
        p = np.linspace(0.01, 0.49, 25)
        np.testing.assert_allclose(phi_inv(1 - p), -phi_inv(p), atol=1e-12)

    def test_endpoints_and_domain(self):
        assert phi_inv(0.0) == -np.inf and phi_inv(1.0) == np.inf
        with pytest.raises(ValidationError):
            phi_inv(1.5)
        with pytest.raises(ValidationError):
            phi_inv(-0.1)


class TestNormalPdf:
    def test_at_zero(self):
        assert float(normal_pdf(0.0)) == pytest.approx(0.39894228, abs=1e-8)

    def test_symmetry(self):
        x = np.linspace(0, 6, 50)
        np.testing.assert_array_equal(normal_pdf(x), normal_pdf(-x))

    def test_integrates_to_one(self):
        # independent Gauss-Legendre oracle on [-8, 8]
        nodes, weights = np.polynomial.legendre.leggauss(220)
        x = 8.0 * nodes
        assert float(8.0 * weights @ normal_pdf(x)) == pytest.approx(1.0, abs=1e-12)


class TestStudentT:
    def test_pdf_at_zero_nu3(self):
        exact = float(2 / (mpmath.pi * mpmath.sqrt(3)))
        assert float(t_pdf(0.0, 3)) == pytest.approx(exact, abs=1e-12)
        assert float(t_pdf(0.0, 3)) == pytest.approx(0.3675526, abs=1e-6)

    def test_pdf_symmetry(self):
        x = np.linspace(0, 20, 41)
        np.testing.assert_array_equal(t_pdf(x, 3), t_pdf(-x, 3))

    def test_pdf_integrates_to_one(self):
        val = mpmath.quad(lambda x: mpmath.mpf(float(t_pdf(float(x), 3))), [-1e4, 0, 1e4])
        assert float(val) == pytest.approx(1.0, abs=1e-6)

    def test_pdf_domain(self):
        with pytest.raises(ValidationError):
            t_pdf(0.0, 0.5)

    def test_inv_median(self):
        assert t_inv(0.5, 3) == 0.0

    def test_inv_freeze_0975(self):
        # oracle: t_inv_oracle(0.975, 3) = 3.182446305284263
        assert t_inv_oracle(0.975, 3) == pytest.approx(3.182446305284263, abs=1e-10)
        assert float(t_inv(0.975, 3)) == pytest.approx(3.182446, abs=1e-5)

    @pytest.mark.parametrize("nu", [3.0, 5.0, 1.5])
    def test_inv_accuracy_against_oracle(self, nu):
        for p in (1e-12, 1e-6, 0.013, 0.4, 0.985, 1 - 1e-9):
            mine = float(t_inv(p, nu))
            ref = t_inv_oracle(p, nu)
            assert mine == pytest.approx(ref, abs=1e-9, rel=1e-9)

    def test_inv_monotone(self):
        p = np.unique(np.concatenate([np.geomspace(1e-12, 0.5, 400),
                                      1 - np.geomspace(0.5, 1e-12, 400)]))
        x = np.asarray(t_inv(p, 3))
        assert np.all(np.diff(x) > 0)

    def test_inv_endpoints(self):
        assert t_inv(0.0, 3) == -np.inf and t_inv(1.0, 3) == np.inf

    def test_round_trip_both_families(self):
        p = np.geomspace(1e-10, 0.5, 60)
        p = np.concatenate([p, 1 - p])
        np.testing.assert_allclose(normal_cdf(phi_inv(p)), p, atol=1e-8)
        np.testing.assert_allclose(t_cdf(t_inv(p, 3), 3), p, atol=1e-8)
        np.testing.assert_allclose(t_cdf(t_inv(p, 7), 7), p, atol=1e-8)

    def test_large_nu_approaches_normal(self):
        p = np.linspace(0.01, 0.99, 99)
        gap = np.abs(np.asarray(t_inv(p, 200)) - np.asarray(phi_inv(p)))
        assert gap.max() <= 0.02


class TestSpecAndMapInverse:
    def test_center_maps_to_origin(self):
        spec = normal_spec(3)
        np.testing.assert_array_equal(map_inverse(np.full((1, 3), 0.5), spec), 0.0)

    def test_boundary_convention(self):
        spec = normal_spec(2)
        out = map_inverse(np.array([[0.0, 0.3]]), spec)
        assert out[0, 0] == -np.inf and np.isfinite(out[0, 1])

    def test_mixed_spec_components(self):
        spec = DistributionSpec((Normal(), StudentT(3.0)))
        out = map_inverse(np.array([[0.975, 0.975]]), spec)
        assert out[0, 0] == pytest.approx(1.959964, abs=1e-6)
        assert out[0, 1] == pytest.approx(3.182446, abs=1e-5)

    def test_product_density(self):
        spec = DistributionSpec((Normal(), StudentT(3.0)))
        x = np.array([[0.5, -1.0]])
        expected = float(normal_pdf(0.5)) * float(t_pdf(-1.0, 3))
        assert float(spec.pdf(x)[0]) == pytest.approx(expected, rel=1e-12)

    def test_second_moment(self):
        assert student_t_spec(3.0, 4).second_moment() == pytest.approx(12.0)
        assert normal_spec(2).second_moment() == pytest.approx(2.0)
        assert math.isinf(student_t_spec(2.0, 1).second_moment())

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            map_inverse(np.zeros((2, 3)), normal_spec(2))
