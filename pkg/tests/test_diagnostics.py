import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rswfv import build, step
from rswfv.diagnostics import (
    LEDGER_COLUMNS,
    RunLedger,
    eoc,
    l1_norm,
    l2_error,
    potential_vorticity,
    restrict,
    total_energy,
    total_mass,
    total_momentum,
    wb_residuals,
)
from rswfv.errors import GridMismatch, IndivisibleDims, NonpositiveError
from rswfv.grid import BC, Grid
from rswfv.state import Bathymetry, Params, State


def unit(n=4, bc=BC.PERIODIC):
    return Grid(n, n, 0.0, 1.0, 0.0, 1.0, bc)


def rest(grid, h=1.0):
    z = np.zeros(grid.shape)
    return State(np.full(grid.shape, h), z, z.copy())


def test_energy_examples():
    grid = unit()
    s = rest(grid)
    zero = Bathymetry(np.zeros(grid.shape))
    assert total_energy(s, zero, 1.0, grid) == pytest.approx(0.5)
    shifted = Bathymetry(np.full(grid.shape, 0.3))
    assert total_energy(s, shifted, 2.0, grid) - total_energy(s, zero, 2.0, grid) == pytest.approx(
        0.3 * 2.0 * total_mass(s, grid)
    )
    moving = State(s.h, np.ones(grid.shape), np.zeros(grid.shape))
    assert total_energy(moving, zero, 1.0, grid) > total_energy(s, zero, 1.0, grid)


def test_mass_and_momentum():
    grid = unit()
    s = State(np.full(grid.shape, 2.0), np.full(grid.shape, 0.5), np.full(grid.shape, -1.0))
    assert total_mass(s, grid) == pytest.approx(2.0)
    assert total_momentum(s, grid) == pytest.approx((1.0, -2.0))


def test_pv_at_rest():
    grid = unit()
    assert np.allclose(potential_vorticity(rest(grid, 2.0), 3.0, grid), 1.5)


def test_pv_rigid_rotation():
    grid = Grid(10, 10, -1.0, 1.0, -1.0, 1.0, BC.EXTRAPOLATION)
    big = 0.7
    u = grid.project(lambda x, y: -big * y)
    v = grid.project(lambda x, y: big * x)
    s = State(np.ones(grid.shape), u, v)
    pv = potential_vorticity(s, 2.0, grid)
    np.testing.assert_allclose(pv[1:-1, 1:-1], 2.0 + 2 * big, rtol=1e-13)
    s2 = State(2 * s.h, u, v)
    np.testing.assert_allclose(potential_vorticity(s2, 2.0, grid), pv / 2)


def test_l2_examples():
    grid = unit()
    a = np.random.default_rng(0).normal(size=grid.shape)
    assert l2_error(a, a, grid) == 0.0
    assert l2_error(a + 1, a, grid) == pytest.approx(1.0)
    assert l2_error(a + 3, a, grid) == pytest.approx(3 * l2_error(a + 1, a, grid))
    with pytest.raises(GridMismatch):
        l2_error(a, np.zeros((3, 3)), grid)


def test_l1_norm():
    assert l1_norm(np.array([[1.0, -2.0]]), 0.5) == pytest.approx(1.5)


def test_restrict_examples():
    assert np.all(restrict(np.full((4, 6), 2.5), 2) == 2.5)
    np.testing.assert_array_equal(restrict(np.array([[0.0, 1.0], [2.0, 3.0]]), 2), [[1.5]])
    with pytest.raises(IndivisibleDims):
        restrict(np.zeros((4, 6)), 4)
    strip = np.arange(12.0).reshape(3, 4)
    assert restrict(strip, 2, 1).shape == (3, 2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1, 2, 3]), arrays(np.float64, (6, 6), elements=st.floats(-5, 5)))
def test_restrict_preserves_mass(f, fine):
    dx = 0.1
    coarse = restrict(fine, f)
    assert np.sum(coarse) * (f * dx) ** 2 == pytest.approx(np.sum(fine) * dx * dx, abs=1e-12)


def test_eoc_examples():
    assert eoc([1.0, 0.5, 0.25], [8, 16, 32]) == pytest.approx([1.0, 1.0])
    assert eoc([0.3, 0.3], [8, 16]) == pytest.approx([0.0])
    # five-level error sequence with orders known to two digits
    orders = eoc([0.2038, 0.0897, 0.0368, 0.0147, 0.0047], [32, 64, 128, 256, 512])
    assert orders[:3] == pytest.approx([1.18, 1.28, 1.32], abs=0.01)
    assert orders[3] == pytest.approx(1.64, abs=0.01)
    with pytest.raises(NonpositiveError):
        eoc([1.0, 0.0], [8, 16])
    with pytest.raises(ValueError):
        eoc([1.0], [8])


def test_wb_residuals():
    grid, s, bath, params = build("wb_test2", nx=64)
    assert max(wb_residuals(s, bath, params, grid)) <= 1e-12
    grid = unit(6)
    lake = rest(grid)
    p = Params(g=1.0, omega=1.0, eta=3.0)
    zero = Bathymetry(np.zeros(grid.shape))
    assert wb_residuals(lake, zero, p, grid) == (0.0, 0.0, 0.0, 0.0)
    lake.h[3, 3] += 0.1
    hP = grid.pad(lake.h)
    from rswfv.grid import centered_x

    rx = np.abs(centered_x(hP, grid.dx))
    assert set(map(tuple, np.argwhere(rx > 0))) == {(3, 2), (3, 4)}
    assert wb_residuals(lake, zero, p, grid)[0] > 0


def test_ledger_records_and_writes(tmp_path):
    grid, s, bath, params = build("geostrophic_adjustment", nx=16, bc="periodic")
    ledger = RunLedger()
    ledger.record(s, bath, params.g, grid)
    for _ in range(5):
        s, rep = step(s, bath, params, grid)
        ledger.record(s, bath, params.g, grid, rep)
    assert ledger.energy_nonincreasing()
    assert ledger.global_estimate_ok()
    assert len(ledger.column("t")) == 6
    path = tmp_path / "ledger.csv"
    ledger.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == LEDGER_COLUMNS
    assert len(rows) == 7
    assert float(rows[-1][0]) == s.t
    with pytest.raises(ValueError):
        ledger.record(rest(grid), bath, params.g, grid)


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_energy_converges_to_continuum(n):
    # E = 1/2 int h^2 with h = 1 + sin(2 pi x)/2 on the unit square: 1/2 (1 + 1/8)
    grid = unit(n)
    h = grid.project(lambda x, y: 1 + 0.5 * np.sin(2 * np.pi * x))
    z = np.zeros(grid.shape)
    e = total_energy(State(h, z, z), Bathymetry(z), 1.0, grid)
    assert abs(e - 0.5625) <= 1.0 / n
