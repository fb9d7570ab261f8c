import numpy as np
import pytest

from rswfv.state import ETA_HEIGHT_RATIO, Bathymetry, Params, State, momenta, potential


def make_state(h=1.0, u=0.0, v=0.0, shape=(3, 4)):
    return State(np.full(shape, h), np.full(shape, u), np.full(shape, v))


def test_potential_examples():
    s = make_state(1.0)
    b = Bathymetry(np.zeros((3, 4)))
    assert np.all(potential(s, b, 1.0) == 1.0)
    rng = np.random.default_rng(0)
    bump = rng.uniform(0, 5, (3, 4))
    lake = State(10.0 - bump, np.zeros((3, 4)), np.zeros((3, 4)))
    np.testing.assert_allclose(potential(lake, Bathymetry(bump), 1.0), 10.0, rtol=1e-15)
    np.testing.assert_allclose(potential(lake, Bathymetry(bump), 2.0), 2 * potential(lake, Bathymetry(bump), 1.0))


def test_momenta_examples():
    mx, my = momenta(make_state(1.0))
    assert not mx.any() and not my.any()
    mx, _ = momenta(make_state(2.0, 3.0))
    assert np.all(mx == 6.0)
    rng = np.random.default_rng(1)
    s = State(rng.uniform(1, 2, (3, 4)), rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
    mx, my = momenta(s)
    assert mx[1, 2] == s.h[1, 2] * s.u[1, 2] and my[2, 3] == s.h[2, 3] * s.v[2, 3]


def test_params_validation():
    with pytest.raises(ValueError):
        Params(g=0.0, omega=1.0)
    with pytest.raises(ValueError):
        Params(g=1.0, omega=1.0, zeta=1.0)
    with pytest.raises(ValueError):
        Params(g=1.0, omega=1.0, alpha=-1.0)
    with pytest.raises(ValueError):
        Params(g=1.0, omega=1.0, cfl_safety=0.0)
    with pytest.raises(ValueError):
        Params(g=1.0, omega=1.0, eta=-2.0)


def test_eta_default_resolution():
    p = Params(g=1.0, omega=1.0).resolved(np.array([[1.0, 2.0]]))
    assert p.eta == pytest.approx(3.8)
    assert p.eta > ETA_HEIGHT_RATIO * 2.0
    fixed = Params(g=1.0, omega=1.0, eta=5.0)
    assert fixed.resolved(np.ones(3)) is fixed


def test_state_check():
    make_state(1.0).check()
    with pytest.raises(ValueError):
        make_state(0.0).check()
    s = make_state(1.0)
    s.u[0, 0] = np.nan
    with pytest.raises(ValueError):
        s.check()


def test_copy_is_independent():
    s = make_state(1.0)
    c = s.copy()
    c.h[0, 0] = 5.0
    assert s.h[0, 0] == 1.0
