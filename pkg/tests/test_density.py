import math

import numpy as np
import pytest

from simcal.density import (
    DensityGrid2D,
    curve_to_csv,
    curves_svg,
    default_grid,
    gaussian_smooth,
    grid_to_csvs,
    heatmap_svg,
    joint_histogram,
    kde_1d,
    silverman_bandwidth,
)


def kde_double_loop(xs, grid, h):
    """Naive quadratic-time oracle for the vectorized evaluator."""
    out = []
    for g in grid:
        total = 0.0
        for x in xs:
            total += math.exp(-0.5 * ((g - x) / h) ** 2)
        out.append(total / (len(xs) * h * math.sqrt(2 * math.pi)))
    return np.array(out)


class TestSilverman:
    def test_direct_formula_value(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(0, 1, 100)
        xs = (xs - xs.mean()) / xs.std(ddof=1)  # sample std exactly 1
        assert silverman_bandwidth(xs) == pytest.approx(1.06 * 100 ** (-0.2), abs=1e-12)
        assert silverman_bandwidth(xs) == pytest.approx(0.421993, abs=1e-6)

    def test_linear_in_sigma(self):
        rng = np.random.default_rng(1)
        xs = rng.normal(0, 1, 50)
        assert silverman_bandwidth(0.5 * xs) == pytest.approx(
            0.5 * silverman_bandwidth(xs), abs=1e-12
        )

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            silverman_bandwidth(np.full(10, 0.3))

    def test_matches_formula_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            xs = rng.uniform(0, 1, int(rng.integers(2, 200)))
            expected = 1.06 * np.std(xs, ddof=1) * xs.size ** (-0.2)
            assert silverman_bandwidth(xs) == pytest.approx(expected, abs=1e-12)


class TestKde:
    def test_single_point_peak(self):
        h = 0.1
        curve = kde_1d([0.5], np.array([0.5]), h)
        assert curve.values[0] == pytest.approx(1.0 / (h * math.sqrt(2 * math.pi)), abs=1e-12)

    def test_symmetry(self):
        grid = np.linspace(0, 1, 101)
        curve = kde_1d([0.4, 0.6], grid, 0.08)
        np.testing.assert_allclose(curve.values, curve.values[::-1], atol=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            xs = rng.uniform(0, 1, int(rng.integers(1, 200)))
            grid = np.sort(rng.uniform(-0.2, 1.2, 40))
            grid = np.unique(grid)
            h = float(rng.uniform(0.02, 0.3))
            got = kde_1d(xs, grid, h)
            np.testing.assert_allclose(got.values, kde_double_loop(xs, grid, h), atol=1e-12)

    def test_mass_on_extended_grid(self):
        rng = np.random.default_rng(4)
        xs = rng.uniform(0, 1, 500)
        h = silverman_bandwidth(xs)
        grid = np.linspace(-3 * h, 1 + 3 * h, 2048)
        curve = kde_1d(xs, grid, h)
        assert curve.trapezoid_mass() == pytest.approx(1.0, abs=1e-3)
        assert np.all(curve.values >= 0)

    def test_default_grid_mass_band(self):
        rng = np.random.default_rng(5)
        xs = np.clip(rng.normal(0.6, 0.2, 2000), 0, 1)
        curve = kde_1d(xs, default_grid(), silverman_bandwidth(xs))
        assert 0.8 <= curve.trapezoid_mass() <= 1.05

    def test_validation(self):
        with pytest.raises(ValueError):
            kde_1d([], np.array([0.5]), 0.1)
        with pytest.raises(ValueError):
            kde_1d([0.5], np.array([0.5]), 0.0)
        with pytest.raises(ValueError):
            kde_1d([0.5], np.array([0.5, 0.4]), 0.1)


class TestJointHistogram:
    def test_point_mass(self):
        pairs = np.column_stack([np.full(7, 0.5), np.full(7, 0.5)])
        grid = joint_histogram(pairs, 10, 10)
        dens = grid.densities
        assert dens[5, 5] == pytest.approx(100.0)
        assert np.count_nonzero(dens) == 1

    def test_normalization_exact(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(1, 400))
            pairs = np.column_stack([rng.uniform(-1, 1, n), rng.uniform(0, 1, n)])
            grid = joint_histogram(pairs, int(rng.integers(1, 30)), int(rng.integers(1, 30)))
            assert grid.total_mass() == pytest.approx(1.0, abs=1e-9)

    def test_uniform_cells_near_one(self):
        rng = np.random.default_rng(7)
        n = 100_000
        pairs = np.column_stack([rng.uniform(0, 1, n), rng.uniform(0, 1, n)])
        grid = joint_histogram(pairs, 5, 5)
        # density per cell ~ 1; 5 standard errors of the cell count
        p = 1 / 25
        se = math.sqrt(n * p * (1 - p)) / (n * p)
        np.testing.assert_allclose(grid.densities, 1.0, atol=5 * se)

    def test_edge_inclusion(self):
        pairs = np.column_stack([[1.0, 0.0], [1.0, 0.0]])
        grid = joint_histogram(pairs, 4, 4)
        assert grid.total_mass() == pytest.approx(1.0, abs=1e-12)
        assert grid.densities[3, 3] > 0 and grid.densities[0, 0] > 0


class TestGaussianSmooth:
    def test_sigma_zero_identity(self):
        rng = np.random.default_rng(8)
        pairs = np.column_stack([rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)])
        grid = joint_histogram(pairs, 10, 10)
        out = gaussian_smooth(grid, 0.0)
        np.testing.assert_array_equal(out.densities, grid.densities)
        assert out.smoothed

    def test_point_mass_blur_symmetric_and_conserving(self):
        pairs = np.column_stack([np.full(3, 0.5), np.full(3, 0.5)])
        grid = joint_histogram(pairs, 11, 11)
        out = gaussian_smooth(grid, 1.0)
        dens = out.densities
        assert out.total_mass() == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(dens, dens[::-1, :], atol=1e-12)
        np.testing.assert_allclose(dens, dens[:, ::-1], atol=1e-12)
        assert np.all(dens >= 0)

    def test_mass_conserved_near_edges(self):
        pairs = np.column_stack([[0.01, 0.99], [0.01, 0.99]])
        grid = joint_histogram(pairs, 20, 20)
        out = gaussian_smooth(grid, 2.5)
        assert out.total_mass() == pytest.approx(1.0, abs=1e-9)

    def test_semigroup_property(self):
        rng = np.random.default_rng(9)
        pairs = np.column_stack([rng.uniform(0, 1, 2000), rng.beta(2, 2, 2000)])
        grid = joint_histogram(pairs, 50, 50)
        twice = gaussian_smooth(gaussian_smooth(grid, 1.0), 1.0)
        once = gaussian_smooth(grid, math.sqrt(2.0))
        scale = math.sqrt(np.mean(once.densities**2))
        rms_diff = math.sqrt(np.mean((twice.densities - once.densities) ** 2))
        assert rms_diff <= 0.02 * scale

    def test_negative_sigma_rejected(self):
        grid = joint_histogram(np.column_stack([[0.5], [0.5]]), 5, 5)
        with pytest.raises(ValueError):
            gaussian_smooth(grid, -1.0)


class TestExport:
    def test_curve_csv_shape_and_round_trip(self):
        curve = kde_1d([0.2, 0.5, 0.9], np.array([0.0, 0.5, 1.0]), 0.1)
        text = curve_to_csv(curve)
        lines = text.strip().splitlines()
        assert lines[0] == "x,density"
        assert len(lines) == 4
        for line, x, v in zip(lines[1:], curve.grid, curve.values):
            sx, sv = line.split(",")
            assert float(sx) == x and float(sv) == v  # repr round-trip is exact

    def test_grid_csvs(self):
        pairs = np.column_stack([np.linspace(0, 1, 30), np.linspace(0, 1, 30)])
        grid = joint_histogram(pairs, 10, 10)
        csvs = grid_to_csvs(grid)
        assert len(csvs["matrix"].strip().splitlines()) == 11  # header + 10 rows
        assert len(csvs["x_edges"].strip().splitlines()) == 12
        matrix_back = np.array(
            [[float(v) for v in line.split(",")] for line in csvs["matrix"].strip().splitlines()[1:]]
        )
        np.testing.assert_array_equal(matrix_back, grid.densities)

    def test_svg_documents(self):
        curve = kde_1d([0.3, 0.7], default_grid(64), 0.1)
        svg = curves_svg({"model": curve}, {"tau": 0.72})
        assert svg.startswith("<svg") and "polyline" in svg and "green" in svg
        grid = joint_histogram(np.column_stack([[0.5], [0.8]]), 8, 8)
        heat = heatmap_svg(grid)
        assert "<rect" in heat and "stroke-dasharray" in heat  # cells + diagonal
