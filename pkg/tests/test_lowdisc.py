"""Point-set generation, randomization, and quality checks."""

import numpy as np
import pytest
from scipy.stats import kstest

from gaussqmc import (
    BudgetExceededError,
    NetParams,
    PointSet,
    UnsupportedDimensionError,
    ValidationError,
    check_net,
    digital_shift,
    dump_points_csv,
    owen_scramble,
    sobol_points,
    star_discrepancy,
)
from gaussqmc.lowdisc import _apply_digital_shift, owen_scramble_batch


def radical_inverse_base2(j: int, bits: int = 32) -> float:
    """Independent oracle: bit-reversal of j."""
    value, denom = 0.0, 2.0
    for _ in range(bits):
        value += (j & 1) / denom
        j >>= 1
        denom *= 2.0
    return value


def van_der_corput(m: int) -> PointSet:
    pts = np.array([[radical_inverse_base2(j)] for j in range(1 << m)])
    return PointSet(pts, generator="vdc")


class TestSobol:
    def test_first_dimension_is_radical_inverse(self):
        pts = sobol_points(3, 1).points.ravel()
        oracle = [radical_inverse_base2(j) for j in range(8)]
        np.testing.assert_array_equal(pts, oracle)
        np.testing.assert_array_equal(pts, [0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875])

    def test_single_point_prefix(self):
        pts = sobol_points(0, 1)
        assert pts.n == 1 and pts.points[0, 0] == 0.0

    def test_2d_prefix_is_net(self):
        pts = sobol_points(4, 2)
        assert check_net(pts, NetParams(b=2, lam=1, t=0, m=4, d=2))

    def test_deterministic(self):
        a = sobol_points(6, 8).points
        b = sobol_points(6, 8).points
        np.testing.assert_array_equal(a, b)

    def test_dimension_limit(self):
        assert sobol_points(2, 64).d == 64
        with pytest.raises(UnsupportedDimensionError):
            sobol_points(2, 65)

    def test_coordinates_in_unit_interval(self):
        pts = sobol_points(8, 16).points
        assert pts.min() >= 0.0 and pts.max() < 1.0


class TestOwenScramble:
    def test_preserves_net_property(self):
        base = sobol_points(6, 2)
        params = NetParams(b=2, lam=1, t=0, m=6, d=2)
        for seed in range(8):
            assert check_net(owen_scramble(base, seed), params)

    def test_scrambled_point_uniform(self):
        # scramble of the single point 0.5 averaged over 1e4 seeds
        single = PointSet(np.array([[0.5]]), generator="fixed")
        vals = owen_scramble_batch(single, list(range(10_000))).ravel()
        tol = 3.0 * (1.0 / np.sqrt(12.0)) / 100.0
        assert abs(vals.mean() - 0.5) <= tol

    def test_seed_determinism(self):
        base = sobol_points(5, 3)
        a = owen_scramble(base, seed=99).points
        b = owen_scramble(base, seed=99).points
        np.testing.assert_array_equal(a, b)

    def test_no_double_randomization(self):
        scrambled = owen_scramble(sobol_points(4, 1), 1)
        with pytest.raises(ValidationError):
            owen_scramble(scrambled, 2)

    def test_batch_matches_single_calls(self):
        base = sobol_points(6, 2)
        batch = owen_scramble_batch(base, [3, 17, 4242])
        for i, seed in enumerate([3, 17, 4242]):
            np.testing.assert_array_equal(batch[i], owen_scramble(base, seed).points)

    def test_metadata(self):
        out = owen_scramble(sobol_points(4, 2), 5)
        assert out.randomization == "owen-scramble"
        assert out.seed == 5
        assert out.net == sobol_points(4, 2).net


class TestDigitalShift:
    def test_zero_shift_is_identity(self):
        pts = sobol_points(5, 2).points
        out = _apply_digital_shift(pts, np.zeros(2, dtype=np.uint64))
        np.testing.assert_array_equal(out, pts)

    def test_preserves_net_property(self):
        base = sobol_points(6, 2)
        params = NetParams(b=2, lam=1, t=0, m=6, d=2)
        for seed in range(8):
            assert check_net(digital_shift(base, seed), params)

    def test_marginal_uniformity_ks(self):
        # one fixed point shifted under many seeds
        base = PointSet(np.array([[0.3]]), generator="fixed")
        vals = np.array(
            [digital_shift(base, seed).points[0, 0] for seed in range(2000)]
        )
        assert kstest(vals, "uniform").pvalue > 0.01

    def test_seed_determinism(self):
        base = sobol_points(5, 2)
        np.testing.assert_array_equal(
            digital_shift(base, 7).points, digital_shift(base, 7).points
        )


class TestCheckNet:
    @pytest.mark.parametrize("m", range(1, 11))
    def test_van_der_corput_is_net(self, m):
        assert check_net(van_der_corput(m), NetParams(2, 1, 0, m, 1))

    def test_wrong_resolution_claim_fails(self):
        pts = van_der_corput(4)
        assert not check_net(pts, NetParams(2, 1, 0, 5, 1))

    def test_scrambled_sobol_2d(self):
        pts = owen_scramble(sobol_points(5, 2), 123)
        assert check_net(pts, NetParams(2, 1, 0, 5, 2))

    def test_non_net_detected(self):
        rng = np.random.default_rng(0)
        pts = PointSet(rng.random((16, 1)), generator="iid")
        assert not check_net(pts, NetParams(2, 1, 0, 4, 1))

    def test_budget(self):
        pts = sobol_points(10, 2)
        with pytest.raises(BudgetExceededError):
            check_net(pts, NetParams(2, 1, 0, 10, 2), budget=100)


class TestStarDiscrepancy:
    def test_quarter_grid(self):
        pts = PointSet(np.array([[0.0], [0.25], [0.5], [0.75]]), generator="grid")
        assert star_discrepancy(pts) == pytest.approx(0.25, abs=0)

    def test_single_point(self):
        pts = PointSet(np.array([[0.5]]), generator="fixed")
        assert star_discrepancy(pts) == pytest.approx(0.5, abs=0)

    @pytest.mark.parametrize("m", range(1, 11))
    def test_van_der_corput_exact(self, m):
        assert star_discrepancy(van_der_corput(m)) == 2.0**-m

    def test_2d_single_point(self):
        # sup over boxes just containing / excluding (0.5, 0.5) gives 0.75
        pts = PointSet(np.array([[0.5, 0.5]]), generator="fixed")
        assert star_discrepancy(pts) == pytest.approx(0.75, abs=1e-15)

    def test_2d_lower_bound_oracle(self):
        # exact value dominates any sampled anchored box's deviation
        rng = np.random.default_rng(3)
        pts = PointSet(rng.random((32, 2)), generator="iid")
        exact = star_discrepancy(pts)
        corners = rng.random((4000, 2))
        counts = (
            (pts.points[None, :, 0] < corners[:, None, 0])
            & (pts.points[None, :, 1] < corners[:, None, 1])
        ).sum(axis=1)
        sampled = np.abs(counts / pts.n - corners[:, 0] * corners[:, 1]).max()
        assert exact >= sampled - 1e-12

    def test_unsupported_dimension(self):
        pts = sobol_points(3, 3)
        with pytest.raises(UnsupportedDimensionError):
            star_discrepancy(pts)


class TestInvariantsAndDumps:
    def test_scrambled_projections_ks_uniform(self):
        base = sobol_points(7, 2)
        batch = owen_scramble_batch(base, list(range(79)))  # ~1e4 pooled per coord
        for j in range(2):
            pooled = batch[..., j].ravel()
            assert pooled.shape[0] >= 10_000 - 256
            assert kstest(pooled, "uniform").pvalue > 0.01

    def test_point_set_validation(self):
        with pytest.raises(ValidationError):
            PointSet(np.array([[1.0]]), generator="bad")  # 1.0 not in [0,1)
        with pytest.raises(ValidationError):
            PointSet(np.zeros((0, 1)), generator="bad")

    def test_dump_csv(self, tmp_path):
        pts = owen_scramble(sobol_points(3, 2), 1)
        path = tmp_path / "points.csv"
        dump_points_csv(pts, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "dim0,dim1"
        redo = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        np.testing.assert_array_equal(redo, pts.points)  # 17 digits round-trip
