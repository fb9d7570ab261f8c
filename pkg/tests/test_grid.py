import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rswfv.grid import (
    BC,
    GHOST,
    Grid,
    avg_edge,
    ddx_centered,
    ddx_dual,
    ddy_centered,
    ddy_dual,
    ghost_closure,
    jump_edge,
)

ROW = np.array([0.0, 1.0, 2.0, 3.0])


def row_grid(bc=BC.PERIODIC):
    # 4 cells of unit width in x, 3 rows carrying the same data
    return Grid(4, 3, 0.0, 4.0, 0.0, 3.0, bc)


def rows(z, ny=3):
    return np.tile(z, (ny, 1))


def test_spacing_and_centres():
    g = Grid(4, 5, -1.0, 1.0, 0.0, 10.0)
    assert g.dx == pytest.approx(0.5)
    assert g.dy == pytest.approx(2.0)
    X, Y = g.centers()
    assert X.shape == (5, 4)
    assert X[0, 0] == pytest.approx(-0.75)
    assert Y[2, 0] == pytest.approx(5.0)


@pytest.mark.parametrize("nx,ny", [(2, 5), (5, 2), (0, 4)])
def test_too_few_cells_rejected(nx, ny):
    with pytest.raises(ValueError):
        Grid(nx, ny)


def test_bad_bounds_rejected():
    with pytest.raises(ValueError):
        Grid(4, 4, 1.0, 0.0)


def test_project_constant():
    g = Grid(5, 4)
    assert np.all(g.project(lambda x, y: 3.5 + 0 * x) == 3.5)


def test_project_linear_midpoints():
    g = Grid(4, 3)
    z = g.project(lambda x, y: x)
    np.testing.assert_allclose(z, np.tile([0.125, 0.375, 0.625, 0.875], (3, 1)))


def test_project_sine_midpoints():
    g = Grid(4, 3)
    z = g.project(lambda x, y: np.sin(2 * np.pi * x))
    expected = np.sin(np.pi / 4 * np.array([1, 3, 5, 7]))
    np.testing.assert_allclose(z[1], expected, atol=1e-15)


def test_project_rejects_nonfinite():
    with pytest.raises(ValueError), np.errstate(divide="ignore", invalid="ignore"):
        Grid(3, 3).project(lambda x, y: 1 / (x - x))


def test_avg_edge_periodic_row():
    ex, _ = avg_edge(rows(ROW), row_grid())
    # edges 1/2, 3/2, 5/2 and the wrapped 7/2 (== -1/2)
    np.testing.assert_allclose(ex[0], [0.5, 1.5, 2.5, 1.5])


def test_avg_edge_constant_and_single_cell():
    g = row_grid()
    ex, ey = avg_edge(np.full(g.shape, 2.0), g)
    assert np.all(ex == 2.0) and np.all(ey == 2.0)
    z = np.zeros(g.shape)
    z[1, 2] = 2.0
    ex, _ = avg_edge(z, g)
    assert ex[1, 1] == 1.0 and ex[1, 2] == 1.0
    assert np.count_nonzero(ex) == 2


def test_jump_edge_periodic_row():
    ex, _ = jump_edge(rows(ROW), row_grid())
    np.testing.assert_allclose(ex[0], [1, 1, 1, -3])
    ex_neg, _ = jump_edge(-rows(ROW), row_grid())
    np.testing.assert_allclose(ex_neg, -ex)


def test_jump_edge_constant():
    g = row_grid()
    ex, ey = jump_edge(np.full(g.shape, 7.0), g)
    assert not ex.any() and not ey.any()


def test_edge_counts_depend_on_closure():
    z = rows(ROW)
    ex, ey = avg_edge(z, row_grid(BC.EXTRAPOLATION))
    assert ex.shape == (3, 5) and ey.shape == (4, 4)
    ex, ey = avg_edge(z, row_grid(BC.PERIODIC))
    assert ex.shape == (3, 4) and ey.shape == (3, 4)


def test_centered_derivative_periodic_row():
    d = ddx_centered(rows(ROW), row_grid())
    np.testing.assert_allclose(d[0], [-1, 1, 1, -1])


def test_centered_derivative_constant_zero():
    g = Grid(6, 5, bc=BC.EXTRAPOLATION)
    c = np.full(g.shape, 4.2)
    assert not ddx_centered(c, g).any()
    assert not ddy_centered(c, g).any()


def test_centered_derivative_linear_extrapolation_interior():
    g = Grid(8, 4, 0.0, 2.0, 0.0, 1.0, BC.EXTRAPOLATION)
    d = ddx_centered(g.project(lambda x, y: x), g)
    np.testing.assert_allclose(d[:, 1:-1], 1.0, rtol=1e-13)
    # zero-gradient ghosts halve the boundary slope
    np.testing.assert_allclose(d[:, 0], 0.5, rtol=1e-13)


def test_dual_derivative_row():
    dx = ddx_dual(rows(ROW), row_grid())
    np.testing.assert_allclose(dx[0], [1, 1, 1, -3])


def test_ghost_closure_modes():
    z = rows(ROW)
    P = ghost_closure(z, row_grid(BC.PERIODIC))
    assert P[GHOST, GHOST - 1] == 3.0
    P = ghost_closure(z, row_grid(BC.EXTRAPOLATION))
    assert P[GHOST, GHOST - 1] == 0.0
    g = row_grid(BC.EQUILIBRIUM_HOLD)
    frozen = np.full((3 + 2 * GHOST, 4 + 2 * GHOST), 9.0)
    P = ghost_closure(z, g, frozen)
    assert P[GHOST, GHOST - 1] == 9.0
    np.testing.assert_array_equal(P[GHOST:-GHOST, GHOST:-GHOST], z)


def test_hold_requires_frozen():
    with pytest.raises(ValueError):
        ghost_closure(rows(ROW), row_grid(BC.EQUILIBRIUM_HOLD))


def test_per_axis_closure():
    g = Grid(4, 3, bc=BC.EXTRAPOLATION, bc_y=BC.PERIODIC)
    z = np.arange(12.0).reshape(3, 4)
    P = g.pad(z)
    assert P[GHOST, GHOST - 1] == z[0, 0]
    np.testing.assert_array_equal(P[GHOST - 1, GHOST:-GHOST], z[-1])


field_pairs = st.integers(3, 9).flatmap(
    lambda n: st.tuples(
        st.just(n),
        arrays(np.float64, (n, n + 1), elements=st.floats(-10, 10)),
        arrays(np.float64, (n, n + 1), elements=st.floats(-10, 10)),
    )
)


@settings(max_examples=60, deadline=None)
@given(field_pairs)
def test_duality_and_telescoping(data):
    n, w, z = data
    g = Grid(n + 1, n, 0.0, 1.3, 0.0, 0.7)
    a = g.cell_area
    scale = 1.0 + np.sum(np.abs(w)) * np.sum(np.abs(z))
    dual_x = np.sum(a * (w * ddx_centered(z, g) + z * ddx_centered(w, g)))
    dual_y = np.sum(a * (w * ddy_centered(z, g) + z * ddy_centered(w, g)))
    assert abs(dual_x) <= 1e-12 * scale / g.dx
    assert abs(dual_y) <= 1e-12 * scale / g.dy
    assert abs(np.sum(ddx_centered(z, g))) <= 1e-12 * (1 + np.abs(z).sum()) / g.dx
    assert abs(np.sum(ddy_centered(z, g))) <= 1e-12 * (1 + np.abs(z).sum()) / g.dy


@settings(max_examples=60, deadline=None)
@given(field_pairs, st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(list(BC)[:2]))
def test_operators_linear(data, alpha, beta, bc):
    n, w, z = data
    g = Grid(n + 1, n, bc=bc)
    for op in (ddx_centered, ddy_centered, ddx_dual, ddy_dual):
        lhs = op(alpha * z + beta * w, g)
        rhs = alpha * op(z, g) + beta * op(w, g)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(rhs).max()))


@settings(max_examples=40, deadline=None)
@given(field_pairs)
def test_centered_is_edge_average_difference(data):
    n, w, _ = data
    g = Grid(n + 1, n, 0.0, 2.0, 0.0, 1.0, BC.EXTRAPOLATION)
    ex, ey = avg_edge(w, g)
    np.testing.assert_allclose(ddx_centered(w, g), (ex[:, 1:] - ex[:, :-1]) / g.dx, atol=1e-12 * (1 + abs(w).max()) / g.dx)
    np.testing.assert_allclose(ddy_centered(w, g), (ey[1:] - ey[:-1]) / g.dy, atol=1e-12 * (1 + abs(w).max()) / g.dy)
