import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vnumra import (
    Domain,
    Grid,
    LctParams,
    SampledVectorFunction,
    lct_forward,
    lct_forward_fast,
    lct_inverse,
    lct_kernel,
    validate_params,
)
from vnumra.exceptions import (
    ChannelMismatch,
    DegenerateB,
    EmptyGrid,
    GridError,
    NotUnimodular,
)


def gaussian(grid: Grid) -> SampledVectorFunction:
    return SampledVectorFunction.from_function(grid, lambda t: np.exp(-(t**2) / 2))


class TestLctParams:
    def test_validate_params_with_fourier_return_params(self):
        params = validate_params(0, 1, -1, 0)
        assert params.is_fourier
        assert params.determinant == 1

    def test_validate_params_with_singular_matrix_raise_not_unimodular(self):
        with pytest.raises(NotUnimodular) as info:
            validate_params(1, 1, 1, 1)

        assert info.value.determinant == 0

    def test_validate_params_with_b_zero_raise_degenerate_b(self):
        with pytest.raises(DegenerateB):
            validate_params(1, 0, 0, 1)

    def test_normalization_with_positive_and_negative_b(self):
        expected = cmath.exp(-1j * math.pi / 4) / math.sqrt(2 * math.pi)
        assert LctParams.fourier().normalization == pytest.approx(expected)
        flipped = LctParams(0, -1, 1, 0).normalization
        assert flipped == pytest.approx(expected.conjugate())

    def test_inverse_with_any_params_return_matrix_inverse(self):
        params = LctParams(2.0, 0.5, 0.0, 0.5)
        product = params.inverse().matrix @ params.matrix
        assert_allclose(product, np.eye(2), atol=1e-15)

    def test_compose_with_shears_return_product(self):
        shear = LctParams(1.0, 1.0, 0.0, 1.0)
        composed = shear @ shear
        assert (composed.a, composed.b, composed.c, composed.d) == (1, 2, 0, 1)

    def test_compose_with_fourier_twice_raise_degenerate_b(self):
        with pytest.raises(DegenerateB):
            LctParams.fourier() @ LctParams.fourier()


class TestGrid:
    def test_grid_with_no_points_raise_empty_grid(self):
        with pytest.raises(EmptyGrid):
            Grid(0.0, 1.0, 0)

    def test_grid_with_zero_step_raise_grid_error(self):
        with pytest.raises(GridError):
            Grid(0.0, 0.0, 4)

    def test_parse_with_text_return_grid(self):
        assert Grid.parse("-1,0.5,8") == Grid(-1.0, 0.5, 8)

    def test_parse_with_garbage_raise_grid_error(self):
        with pytest.raises(GridError):
            Grid.parse("1;2;3")

    def test_dual_with_any_b_return_unitary_step(self):
        grid = Grid(-4.0, 1 / 32, 256)
        dual = grid.dual(-3.0)
        assert dual.count == grid.count
        assert grid.step * dual.step == pytest.approx(2 * math.pi * 3 / 256)

    def test_sampled_function_with_wrong_length_raise_channel_mismatch(self):
        with pytest.raises(ChannelMismatch):
            SampledVectorFunction(Grid(0.0, 1.0, 4), np.zeros(3))


class TestLctForward:
    def test_lct_kernel_at_origin_return_normalization(self):
        params = LctParams(1.0, 2.0, 0.0, 1.0)
        assert lct_kernel(0.0, 0.0, params) == pytest.approx(params.normalization)

    def test_lct_forward_with_fourier_return_direct_quadrature(self, signals):
        grid = Grid.from_bounds(-4.0, 4.0, 300)
        out = Grid.from_bounds(-6.0, 6.0, 200)
        f = signals.random(grid, 2)
        params = LctParams.fourier()
        direct = np.exp(-1j * np.outer(out.points, grid.points)) @ f.values
        direct *= params.normalization * grid.step

        result = lct_forward(f, out, params)
        assert result.domain == Domain.OMEGA
        assert_allclose(result.values, direct, rtol=0, atol=1e-9)

    def test_lct_forward_with_gaussian_and_fourier_return_closed_form(self):
        grid = Grid.from_bounds(-10.0, 10.0, 1024)
        out = Grid.from_bounds(-5.0, 5.0, 257, endpoint=True)
        result = lct_forward(gaussian(grid), out, LctParams.fourier())
        xi = out.points
        expected = cmath.exp(-1j * math.pi / 4) * np.exp(-(xi**2) / 2)
        assert_allclose(result.values[:, 0], expected, rtol=0, atol=1e-6)

    def test_lct_forward_with_gaussian_and_shear_return_closed_form(self):
        params = LctParams(1.0, 1.0, 0.0, 1.0)
        grid = Grid.from_bounds(-12.0, 12.0, 2048)
        out = Grid.from_bounds(-4.0, 4.0, 129, endpoint=True)
        result = lct_forward(gaussian(grid), out, params)
        xi = out.points
        alpha = 0.5 - 0.5j * params.a / params.b
        expected = (
            params.normalization
            * np.exp(1j * params.d * xi**2 / (2 * params.b))
            * np.sqrt(np.pi / alpha)
            * np.exp(-((xi / params.b) ** 2) / (4 * alpha))
        )
        assert_allclose(result.values[:, 0], expected, rtol=0, atol=1e-6)

    def test_lct_forward_with_non_finite_samples_raise_grid_error(self):
        grid = Grid(0.0, 1.0, 3)
        f = SampledVectorFunction(grid, np.array([1.0, np.nan, 0.0]))

        with pytest.raises(GridError):
            lct_forward(f, grid, LctParams.fourier())

    def test_lct_inverse_with_dual_grid_return_signal(self, signals):
        params = LctParams(2.0, 0.5, 0.0, 0.5)
        grid = Grid(-8.0, 16 / 1024, 1024)
        dual = grid.dual(params.b)

        for _ in range(100):
            f = signals.random(grid, 3)
            restored = lct_inverse(lct_forward(f, dual, params), grid, params)
            error = np.linalg.norm(restored.values - f.values)
            assert error / np.linalg.norm(f.values) < 1e-8
            assert restored.domain == Domain.TIME

    def test_lct_inverse_with_matrix_samples_keep_shape(self, signals):
        grid = Grid(-2.0, 1 / 16, 64)
        values = signals.coefficients(64, 4).reshape(64, 2, 2)
        f = SampledVectorFunction(grid, values)
        result = lct_forward(f, grid.dual(1.0), LctParams.fourier())
        assert result.values.shape == (64, 2, 2)


class TestLctForwardFast:
    @pytest.mark.parametrize(
        "abcd",
        [(0.0, 1.0, -1.0, 0.0), (0.0, -1.0, 1.0, 0.0), (1.0, 1.0, 0.0, 1.0)],
    )
    def test_lct_forward_fast_with_params_return_dense_result(self, signals, abcd):
        params = LctParams(*abcd)
        grid = Grid(-3.0, 6 / 512, 512)
        f = signals.random(grid, 2)
        fast = lct_forward_fast(f, params)
        dense = lct_forward(f, grid.dual(params.b), params)
        assert fast.grid == dense.grid
        assert_allclose(fast.values, dense.values, rtol=0, atol=1e-9)


def random_params(rng: np.random.Generator) -> LctParams:
    a = rng.uniform(0.5, 2.0)
    b = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
    c = rng.uniform(-1.0, 1.0)
    return LctParams(a, b, c, (1.0 + b * c) / a)


class TestLctInvariants:
    def test_lct_kernel_at_random_points_has_constant_modulus(self):
        rng = np.random.default_rng(7)

        for _ in range(100):
            params = random_params(rng)
            t, xi = rng.uniform(-10.0, 10.0, 2)
            expected = 1 / math.sqrt(2 * math.pi * abs(params.b))
            assert abs(lct_kernel(t, xi, params)) == pytest.approx(expected, rel=1e-12)

    def test_compose_with_random_params_stay_unimodular(self):
        rng = np.random.default_rng(11)

        for _ in range(100):
            composed = random_params(rng) @ random_params(rng)
            assert abs(composed.determinant - 1.0) <= 1e-10

    def test_lct_forward_with_combination_return_combination(self, signals):
        params = LctParams(1.0, -2.0, 0.5, 0.0)
        grid = Grid.from_bounds(-4.0, 4.0, 256)
        out = Grid.from_bounds(-6.0, 6.0, 128)
        f, g = signals.random(grid, 2), signals.random(grid, 2)
        alpha, beta = 0.3 - 1.2j, -2.0 + 0.5j
        combined = f.with_values(alpha * f.values + beta * g.values)

        expected = (
            alpha * lct_forward(f, out, params).values
            + beta * lct_forward(g, out, params).values
        )
        assert_allclose(lct_forward(combined, out, params).values, expected, rtol=0, atol=1e-9)

    @pytest.mark.parametrize(
        "abcd",
        [(0.0, 1.0, -1.0, 0.0), (2.0, 0.5, 0.0, 0.5), (1.0, -1.0, 0.0, 1.0)],
    )
    def test_lct_forward_with_dual_grid_keep_energy(self, signals, abcd):
        params = LctParams(*abcd)
        grid = Grid(-8.0, 16 / 512, 512)
        f = signals.random(grid, 2)
        spectrum = lct_forward(f, grid.dual(params.b), params)
        assert spectrum.norm() == pytest.approx(f.norm(), rel=1e-3)

    def test_lct_inverse_with_spectrum_return_direct_quadrature(self, signals):
        params = LctParams(2.0, 0.5, 0.0, 0.5)
        spectrum_grid = Grid.from_bounds(-6.0, 6.0, 200)
        out = Grid.from_bounds(-4.0, 4.0, 150)
        spectrum = signals.random(spectrum_grid, 2)
        kernel = lct_kernel(
            out.points[:, np.newaxis],
            spectrum_grid.points[np.newaxis, :],
            params,
        )
        direct = np.conj(kernel) @ spectrum.values * spectrum_grid.step

        result = lct_inverse(spectrum, out, params)
        assert_allclose(result.values, direct, rtol=0, atol=1e-9)

    def test_lct_forward_with_fourier_and_unit_box_return_closed_form(self):
        count = 4096
        grid = Grid(0.5 / count, 1 / count, count)
        box = SampledVectorFunction(grid, np.ones(count))
        out = Grid(-9.95, 0.1, 200)
        params = LctParams.fourier()
        xi = out.points
        expected = params.normalization * (1 - np.exp(-1j * xi)) / (1j * xi)

        result = lct_forward(box, out, params)
        assert_allclose(result.values[:, 0], expected, rtol=0, atol=1e-6)
