"""Catalogue of the benchmark problems as initial-data builders.

One-dimensional problems are run as strips of ``ny = 3`` cells with a
periodic y closure and y-invariant data; the strip width equals the
domain length so that ``dy`` never limits the time step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import UnknownCase
from .grid import BC, GHOST, Grid, centered_x
from .state import Bathymetry, Params, State

DAY = 86400.0
STRIP_CELLS = 3


def _zero(x, y):
    return np.zeros_like(x)


def _one(x, y):
    return np.ones_like(x)


@dataclass(frozen=True)
class CaseSpec:
    """Definition of a benchmark problem.

    ``h``, ``u``, ``v``, ``b`` map centre coordinates ``(x, y)`` to values.
    ``exact(t, x, y)`` returns ``(h, u, v)`` when a closed-form solution is
    known.  With ``balanced_v`` the meridional velocity is replaced by the
    discrete geostrophic velocity ``v = d_x phi / omega`` of the projected
    depth, so that the projected data are an exact discrete jet.
    """

    name: str
    description: str
    x_range: tuple[float, float]
    y_range: Optional[tuple[float, float]]
    resolution: int
    bc: BC
    g: float
    omega: float
    t_final: float
    h: Callable
    u: Callable = _zero
    v: Callable = _zero
    b: Callable = _zero
    alpha: float = 0.0
    eta_factor: float = 1.9
    eta: Optional[float] = None
    exact: Optional[Callable] = None
    balanced_v: bool = False
    steady: bool = False

    @property
    def strip(self) -> bool:
        return self.y_range is None

    def grid(self, nx: Optional[int] = None, ny: Optional[int] = None, bc=None) -> Grid:
        bc = self.bc if bc is None else BC(bc)
        x0, x1 = self.x_range
        nx = self.resolution if nx is None else int(nx)
        if self.strip:
            return Grid(nx, STRIP_CELLS, x0, x1, 0.0, x1 - x0, bc, BC.PERIODIC)
        y0, y1 = self.y_range
        ny = nx if ny is None else int(ny)
        return Grid(nx, ny, x0, x1, y0, y1, bc)


def _fields(spec: CaseSpec, grid: Grid, ghost: int):
    h = grid.project(spec.h, ghost)
    u = grid.project(spec.u, ghost)
    b = grid.project(spec.b, ghost)
    if spec.balanced_v:
        # one extra layer so the centred difference reaches the outer ghosts
        phi = spec.g * (grid.project(spec.h, ghost + 1) + grid.project(spec.b, ghost + 1))
        v = (phi[1:-1, 2:] - phi[1:-1, :-2]) / (2 * grid.dx * spec.omega)
    else:
        v = grid.project(spec.v, ghost)
    return h, u, v, b


def build(name: str, nx: Optional[int] = None, ny: Optional[int] = None, bc=None, **overrides):
    """Grid, initial state, fixed data and parameters of a catalogue case.

    ``overrides`` may replace any :class:`Params` field (``g``, ``omega``,
    ``eta``, ``zeta``, ``alpha``, ``cfl_safety``, ``eta_factor``).  The
    returned parameters have ``eta`` resolved from the initial depth.
    """
    spec = get_case(name)
    grid = spec.grid(nx, ny, bc)
    if "g" in overrides or "omega" in overrides:
        spec = replace(spec, **{k: overrides[k] for k in ("g", "omega") if k in overrides})
    hold = None
    if grid.needs_hold:
        hP, uP, vP, bP = _fields(spec, grid, GHOST)
        s = slice(GHOST, -GHOST)
        h, u, v, b = hP[s, s], uP[s, s], vP[s, s], bP[s, s]
        hold = {"h": hP, "u": uP, "v": vP, "b": bP}
    else:
        h, u, v, b = _fields(spec, grid, 0)
        if spec.balanced_v:
            phi = spec.g * (h + b)
            v = centered_x(grid.pad(phi), grid.dx) / spec.omega
    state = State(h.copy(), u.copy(), v.copy(), 0.0)
    state.check()
    kwargs = dict(g=spec.g, omega=spec.omega, alpha=spec.alpha, eta=spec.eta, eta_factor=spec.eta_factor)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    params = Params(**kwargs).resolved(state.h)
    return grid, state, Bathymetry(b.copy(), hold), params


# ---------------------------------------------------------------------------
# case data

def _wb1_b(x, y):
    return 5.0 * np.exp(-0.4 * ((x - 5.0) ** 2 + (y - 5.0) ** 2))


def _rossby_v(x, y):
    return 2 * (1 + np.tanh(2 * x + 2)) * (1 - np.tanh(2 * x - 2)) / (1 + np.tanh(2.0)) ** 2


def _rotation_exact(t, x, y):
    c, s = np.cos(t), np.sin(t)
    one = np.ones_like(x)
    return one, (c + s) * one, (c - s) * one


_TWO_PI = 2 * np.pi


def _eoc_h(x, y):
    return 10 + np.exp(np.sin(_TWO_PI * x)) * np.cos(_TWO_PI * y)


def _eoc_b(x, y):
    return np.sin(_TWO_PI * x) + np.cos(_TWO_PI * y)


def _eoc_u(x, y):
    return np.sin(np.cos(_TWO_PI * x)) * np.sin(_TWO_PI * y) / _eoc_h(x, y)


def _eoc_v(x, y):
    return np.cos(_TWO_PI * x) * np.cos(np.sin(_TWO_PI * y)) / _eoc_h(x, y)


EPS = 0.05


def _vortex_gamma(r):
    return np.where(r < 0.2, 5.0, np.where(r < 0.4, 2 / np.maximum(r, 0.2) - 5, 0.0))


def _vortex_h(x, y):
    e2 = EPS**2
    r = np.hypot(x, y)
    rs = np.clip(r, 0.2, 0.4)
    delta = 2 * rs - 0.3 - 2.5 * rs**2
    kappa = 4 * np.log(5 * rs) + 3.5 - 20 * rs + 12.5 * rs**2
    inner = 2.5 * (1 + 5 * e2) * r**2
    ring = 0.1 * (1 + 5 * e2) + delta + e2 * kappa
    outer = 0.2 * (1 - 10 * e2 + 20 * e2 * np.log(2.0))
    return 1 + e2 * np.where(r < 0.2, inner, np.where(r < 0.4, ring, outer))


def _vortex_u(x, y):
    return -EPS * y * _vortex_gamma(np.hypot(x, y))


def _vortex_v(x, y):
    return EPS * x * _vortex_gamma(np.hypot(x, y))


def _geo_h(x, y):
    return 1 + 0.25 * (1 - np.tanh(10 * (np.sqrt(2.5 * x**2 + 0.4 * y**2) - 1)))


# large-scale atmospheric-like flows on a doubly periodic square
GEO_L = 5.0e6
GEO_G = 9.80616
GEO_OMEGA = 6.147e-5


class _Shear:
    h0, hp, lam, sigma, kappa = 1076.0, 30.0, 0.5, 1.0 / 12.0, 0.1

    @classmethod
    def _parts(cls, x, y):
        L = GEO_L
        xp = x / L
        theta = np.pi / L * (y - L / 2)
        yp = np.sin(theta) / np.pi
        ypp = np.sin(2 * theta) / (2 * np.pi)
        env = np.exp(-(yp**2) / (2 * cls.sigma**2) + 0.5)
        return xp, theta, ypp, env

    @classmethod
    def h(cls, x, y):
        xp, _, ypp, env = cls._parts(x, y)
        wave = 1 + cls.kappa * np.sin(2 * np.pi * xp / cls.lam)
        return cls.h0 - cls.hp * ypp / cls.sigma * env * wave

    @classmethod
    def u(cls, x, y):
        xp, theta, ypp, env = cls._parts(x, y)
        c = np.cos(2 * theta)
        wave = 1 + cls.kappa * np.sin(2 * np.pi * xp / cls.lam)
        k = GEO_G * cls.hp / (GEO_OMEGA * cls.sigma * GEO_L)
        return k * (c - ypp**2 / cls.sigma**2) * env * wave

    @classmethod
    def v(cls, x, y):
        # geostrophic velocity (g / omega) d_x h of the height above
        xp, _, ypp, env = cls._parts(x, y)
        k = GEO_G * cls.hp * cls.kappa / (GEO_OMEGA * GEO_L) * 2 * np.pi / cls.lam
        return -k * ypp / cls.sigma * env * np.cos(2 * np.pi * xp / cls.lam)


class _Pair:
    h0, hp = 750.0, 75.0
    sigma = 3.0 / 40.0 * GEO_L
    centres = (0.4 * GEO_L, 0.6 * GEO_L)

    @classmethod
    def _bump(cls, x, y, c):
        L, s = GEO_L, cls.sigma
        xp = L / (np.pi * s) * np.sin(np.pi / L * (x - c))
        yp = L / (np.pi * s) * np.sin(np.pi / L * (y - c))
        xpp = L / (2 * np.pi * s) * np.sin(2 * np.pi / L * (x - c))
        ypp = L / (2 * np.pi * s) * np.sin(2 * np.pi / L * (y - c))
        return np.exp(-0.5 * (xp**2 + yp**2)), xpp, ypp

    @classmethod
    def h(cls, x, y):
        e1, _, _ = cls._bump(x, y, cls.centres[0])
        e2, _, _ = cls._bump(x, y, cls.centres[1])
        return cls.h0 - cls.hp * (e1 + e2 - 4 * np.pi * cls.sigma**2 / GEO_L**2)

    @classmethod
    def u(cls, x, y):
        out = 0.0
        for c in cls.centres:
            e, _, ypp = cls._bump(x, y, c)
            out = out + ypp * e
        return -GEO_G * cls.hp / GEO_OMEGA / cls.sigma * out

    @classmethod
    def v(cls, x, y):
        out = 0.0
        for c in cls.centres:
            e, xpp, _ = cls._bump(x, y, c)
            out = out + xpp * e
        return GEO_G * cls.hp / GEO_OMEGA / cls.sigma * out


CATALOG: dict[str, CaseSpec] = {}


def _register(spec: CaseSpec) -> None:
    CATALOG[spec.name] = spec


_register(CaseSpec(
    name="wb_test1",
    description="lake at rest over a Gaussian bump, 2D",
    x_range=(0.0, 10.0), y_range=(0.0, 10.0), resolution=100,
    bc=BC.EXTRAPOLATION, g=1.0, omega=1.0, t_final=10.0,
    h=lambda x, y: 10.0 - _wb1_b(x, y), b=_wb1_b, steady=True,
))
_register(CaseSpec(
    name="wb_test2",
    description="geostrophic jet with linear depth and uniform v, 1D",
    x_range=(-0.5, 0.5), y_range=None, resolution=1000,
    bc=BC.EQUILIBRIUM_HOLD, g=9.81, omega=2.0, t_final=10.0,
    h=lambda x, y: 4 / 9.81 + (2.0 / 9.81) * x, v=_one, steady=True,
))
_register(CaseSpec(
    name="wb_test3",
    description="geostrophic jet with Gaussian depth dip, 1D",
    x_range=(-5.0, 5.0), y_range=None, resolution=1000,
    bc=BC.EQUILIBRIUM_HOLD, g=1.0, omega=10.0, t_final=10.0,
    h=lambda x, y: 2.0 - np.exp(-(x**2)),
    v=lambda x, y: (2.0 / 10.0) * x * np.exp(-(x**2)),
    balanced_v=True, steady=True,
))
_register(CaseSpec(
    name="wb_test4",
    description="geostrophic jet over sinusoidal topography, 1D periodic",
    x_range=(-5.0, 5.0), y_range=None, resolution=1000,
    bc=BC.PERIODIC, g=1.0, omega=1.0, t_final=10.0,
    h=_one, b=lambda x, y: np.sin(np.pi * x / 5),
    v=lambda x, y: np.pi / 5 * np.cos(np.pi * x / 5),
    balanced_v=True, steady=True,
))
_register(CaseSpec(
    name="rossby_adjustment",
    description="Rossby adjustment of a v-velocity jet, 1D open domain",
    x_range=(-8.0, 12.0), y_range=None, resolution=1000,
    bc=BC.EXTRAPOLATION, g=1.0, omega=1.0, t_final=5.0,
    # the depth more than doubles behind the fronts, so eta is fixed well
    # above 15/8 of the largest depth reached rather than of the initial one
    h=_one, v=_rossby_v, alpha=1.0, eta=4.5,
))
_register(CaseSpec(
    name="constant_rotation",
    description="spatially constant inertial oscillation, 1D periodic",
    x_range=(0.0, 1.0), y_range=None, resolution=1000,
    bc=BC.PERIODIC, g=1.0, omega=1.0, t_final=1.0,
    h=_one, u=_one, v=_one, exact=_rotation_exact,
))
_register(CaseSpec(
    name="eoc_convergence",
    description="smooth periodic flow for convergence studies, 2D",
    x_range=(0.0, 1.0), y_range=(0.0, 1.0), resolution=64,
    bc=BC.PERIODIC, g=9.8, omega=1.0, t_final=0.05,
    h=_eoc_h, u=_eoc_u, v=_eoc_v, b=_eoc_b, eta_factor=2.5,
))
_register(CaseSpec(
    name="stationary_vortex",
    description="low-Froude stationary vortex, 2D",
    x_range=(-1.0, 1.0), y_range=(-1.0, 1.0), resolution=200,
    bc=BC.EXTRAPOLATION, g=1 / EPS**2, omega=1 / EPS, t_final=10.0,
    h=_vortex_h, u=_vortex_u, v=_vortex_v,
))
_register(CaseSpec(
    name="geostrophic_adjustment",
    description="elliptic depth perturbation of a lake at rest, 2D",
    x_range=(-10.0, 10.0), y_range=(-10.0, 10.0), resolution=200,
    bc=BC.EXTRAPOLATION, g=1.0, omega=1.0, t_final=4.0,
    h=_geo_h,
))
_register(CaseSpec(
    name="shear_flow",
    description="perturbed zonal shear flow, 5000 km doubly periodic (SI units)",
    x_range=(0.0, GEO_L), y_range=(0.0, GEO_L), resolution=512,
    bc=BC.PERIODIC, g=GEO_G, omega=GEO_OMEGA, t_final=15 * DAY,
    h=_Shear.h, u=_Shear.u, v=_Shear.v,
))
_register(CaseSpec(
    name="vortex_pair",
    description="interacting geostrophic vortex pair, 5000 km doubly periodic (SI units)",
    x_range=(0.0, GEO_L), y_range=(0.0, GEO_L), resolution=512,
    bc=BC.PERIODIC, g=GEO_G, omega=GEO_OMEGA, t_final=15 * DAY,
    # the depth peaks grow by more than the 1.3 % headroom of the default
    # eta on fine grids
    h=_Pair.h, u=_Pair.u, v=_Pair.v, eta_factor=2.5,
))

def get_case(name: str) -> CaseSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownCase(f"unknown case {name!r}; available: {', '.join(CATALOG)}") from None


def case_names() -> list[str]:
    return list(CATALOG)
