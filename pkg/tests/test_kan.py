import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aasist3.kan import (
    BSplineBasis,
    KanLayer,
    SplineGrid,
    basis_transform,
    bspline_basis,
    build_grid,
    cox_de_boor,
    kan_forward,
    phi_edge,
)
from aasist3.numerics import Tensor, grad_check


class TestGrid:
    def test_defaults(self):
        grid = build_grid()
        assert grid.n_knots == 25 == grid.knots.size
        assert grid.h == 0.125
        assert grid.knots[0] == -1.5 and grid.knots[-1] == 1.5
        assert grid.n_basis == 20
        np.testing.assert_allclose(np.diff(grid.knots), 0.125, atol=1e-15)

    @pytest.mark.parametrize("size, order", [(1, 1), (5, 2), (16, 4), (7, 3)])
    def test_knot_count(self, size, order):
        grid = SplineGrid(-2.0, 3.0, size, order)
        assert grid.knots.size == 2 * order + size + 1
        assert np.all(np.diff(grid.knots) > 0)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            SplineGrid(1.0, 1.0)
        with pytest.raises(ValueError):
            SplineGrid(grid_size=0)


class TestBasis:
    grid = SplineGrid()

    def test_partition_of_unity(self):
        x = np.linspace(-1.0, 1.0, 100)
        values = bspline_basis(x, self.grid)
        assert np.max(np.abs(values.sum(axis=1) - 1.0)) < 1e-9
        assert np.all(values >= 0)

    def test_at_most_order_plus_one_nonzero(self):
        x = np.random.default_rng(0).uniform(-1.6, 1.6, 500)
        values = bspline_basis(x, self.grid)
        assert np.all((values != 0).sum(axis=1) <= self.grid.order + 1)

    def test_zero_outside_knot_span(self):
        values = bspline_basis(np.array([-1.5 - 1e-9, -3.0, 1.5, 1.7, 10.0]), self.grid)
        assert np.all(values == 0.0)

    def test_compact_support(self):
        x = np.linspace(-1.6, 1.6, 2001)
        values = bspline_basis(x, self.grid)
        knots = self.grid.knots
        for i in range(self.grid.n_basis):
            outside = (x < knots[i]) | (x >= knots[i + self.grid.order + 1])
            assert np.all(values[outside, i] == 0.0)

    def test_degree_zero_is_indicator(self):
        x = np.array([-1.3, 0.0, 0.49])
        level0 = cox_de_boor(x, self.grid.knots, 4)[0]
        for row, xv in zip(level0, x):
            k = int(np.floor((xv + 1.5) / 0.125))
            assert row[k] == 1.0 and row.sum() == 1.0

    def test_fast_path_matches_recursion(self):
        x = np.random.default_rng(1).uniform(-1.7, 1.7, 3000)
        fast = bspline_basis(x, self.grid)
        ref = cox_de_boor(x, self.grid.knots, 4)[-1]
        np.testing.assert_allclose(fast, ref, atol=1e-13)

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_derivative_against_differences(self, order):
        grid = SplineGrid(order=order, grid_size=6)
        x = np.random.default_rng(2).uniform(-1.2, 1.2, 200)
        _, deriv = BSplineBasis(grid).evaluate(x)
        step = 1e-6
        fd = (bspline_basis(x + step, grid) - bspline_basis(x - step, grid)) / (2 * step)
        tol = 1e-5 if order > 1 else 1e-3
        # degree 1 is only piecewise differentiable; skip points near knots
        near = np.min(np.abs(x[:, None] - grid.knots[None, :]), axis=1) < 1e-5
        np.testing.assert_allclose(deriv[~near], fd[~near], atol=tol)

    def test_basis_transform_gradient(self):
        x = Tensor(np.random.default_rng(3).uniform(-1, 1, (4, 3)), requires_grad=True)
        w = Tensor(np.random.default_rng(4).normal(size=(4, 3, 20)))
        assert grad_check(lambda x: (basis_transform(x, BSplineBasis(SplineGrid())) * w).sum(), x) < 1e-7


class TestPhi:
    grid = SplineGrid()

    def test_prelu_only(self):
        assert phi_edge(-2.0, 1.0, 0.0, np.zeros(20), 0.25, self.grid) == -0.5

    def test_zero_weights(self):
        x = np.linspace(-2, 2, 11)
        assert np.all(phi_edge(x, 0.0, 0.0, np.ones(20), 0.25, self.grid) == 0.0)

    def test_constant_spline(self):
        x = np.linspace(-1, 1, 50)
        np.testing.assert_allclose(phi_edge(x, 0.0, 1.0, np.ones(20), 0.25, self.grid), 1.0, atol=1e-9)

    def test_local_support_of_coefficients(self):
        x = np.linspace(-1.4, 1.4, 300)
        c = np.random.default_rng(5).normal(size=20)
        base = phi_edge(x, 0.3, 0.7, c, 0.25, self.grid)
        c2 = c.copy()
        c2[7] += 1.0
        changed = phi_edge(x, 0.3, 0.7, c2, 0.25, self.grid) != base
        lo, hi = self.grid.knots[7], self.grid.knots[12]
        assert np.all((x[changed] >= lo) & (x[changed] < hi))


class TestKanLayer:
    def test_parameter_shapes_and_init(self):
        layer = KanLayer(4, 3, np.random.default_rng(0))
        assert layer.coeffs.shape == (3, 4, 20)
        assert layer.w_b.shape == layer.w_s.shape == (3, 4)
        assert np.all(layer.slope.data == 0.25)
        assert len(layer.parameters()) == 4

    def test_single_edge_reduces_to_phi(self):
        layer = KanLayer(1, 1, np.random.default_rng(1))
        x = np.linspace(-1.8, 1.8, 25)
        out = layer(Tensor(x[:, None])).data[:, 0]
        np.testing.assert_allclose(out, layer.phi(x, 0, 0), atol=1e-12)

    def test_sum_over_inputs(self):
        layer = KanLayer(2, 3, np.random.default_rng(2))
        x = np.random.default_rng(3).uniform(-1, 1, (6, 2))
        out = kan_forward(layer, Tensor(x)).data
        ref = np.array([[layer.phi(x[b, 0], q, 0) + layer.phi(x[b, 1], q, 1) for q in range(3)] for b in range(6)])
        np.testing.assert_allclose(out, ref, atol=1e-12)

    def test_linear_in_weights(self):
        layer = KanLayer(3, 2, np.random.default_rng(4))
        x = Tensor(np.random.default_rng(5).uniform(-1, 1, (5, 3)))
        out = layer(x).data
        layer.w_b.data = 2.0 * layer.w_b.data
        layer.w_s.data = 2.0 * layer.w_s.data
        np.testing.assert_allclose(layer(x).data, 2.0 * out, atol=1e-12)

    def test_leading_axes_and_mismatch(self):
        layer = KanLayer(3, 2, np.random.default_rng(6))
        assert layer(Tensor(np.zeros((2, 4, 5, 3)))).shape == (2, 4, 5, 2)
        with pytest.raises(ValueError):
            layer(Tensor(np.zeros((2, 4))))

    def test_gradient_all_parameters(self):
        rng = np.random.default_rng(7)
        layer = KanLayer(4, 3, rng)
        x = Tensor(rng.uniform(-1.2, 1.2, (6, 4)), requires_grad=True)
        w = Tensor(rng.normal(size=(6, 3)))
        assert grad_check(lambda x, *p: (layer(x) * w).sum(), x, *layer.parameters()) < 1e-4

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10_000))
    def test_output_finite_for_any_shape(self, n_in, n_out, seed):
        rng = np.random.default_rng(seed)
        layer = KanLayer(n_in, n_out, rng)
        out = layer(Tensor(rng.normal(scale=3.0, size=(3, n_in)))).data
        assert out.shape == (3, n_out) and np.all(np.isfinite(out))
