"""One semi-implicit time step of the stabilised rotating shallow water scheme.

Sequence per step:

1. ``compute_dt``: explicit sufficient time step from the current state;
2. ``assemble_phi_system`` + :func:`rswfv.linear.solve`: implicit
   geopotential ``phi^{n+1}``;
3. ``stabilisation_fields``: ``q, r`` proportional to the geostrophic
   residuals of ``phi^{n+1}``;
4. ``mass_fluxes`` and ``mass_update``: new depth in flux form;
5. ``upwind_edge_velocity`` and ``momentum_update``: explicit velocities.

Edge arrays inside this module always cover the full edge range
``-1/2 .. n-1/2`` (``n + 1`` edges per row or column), regardless of the
closure.  On periodic grids the two end edges carry identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linear
from .errors import (
    BracketViolation,
    EnergyIncrease,
    MismatchBeyondTolerance,
    NonpositiveDt,
    PositivityFailure,
)
from .grid import Grid, centered_x, centered_y, edges_x, edges_y, xcells, ycells
from .state import ETA_HEIGHT_RATIO, Bathymetry, Params, State

ENERGY_SLACK = 1e-10
MAX_RETRIES = 3


@dataclass
class StepReport:
    dt: float
    iterations: int
    residual: float
    margin: float
    q2: float
    r2: float
    energy_before: float
    energy_after: float
    min_h: float
    max_h: float
    bracket_ok: bool
    conditions_ok: bool
    retries: int
    mass_mismatch: float
    momx_residual: float
    momy_residual: float
    dh2: float
    stab_dissipation: float

    @property
    def q_norm(self) -> float:
        return math.sqrt(self.q2)

    @property
    def r_norm(self) -> float:
        return math.sqrt(self.r2)


# ---------------------------------------------------------------------------
# padding helpers

def _padded(grid: Grid, bath: Bathymetry, name: str, z: np.ndarray) -> np.ndarray:
    return grid.pad(z, bath.frozen(name))


def _phi_padded(grid, bath, h, g):
    return g * (_padded(grid, bath, "h", h) + _padded(grid, bath, "b", bath.b))


def total_energy(state: State, bath: Bathymetry, g: float, grid: Grid) -> float:
    h, u, v, b = state.h, state.u, state.v, bath.b
    e = 0.5 * g * h * h + g * b * h + 0.5 * h * (u * u + v * v)
    return float(np.sum(e) * grid.cell_area)


# ---------------------------------------------------------------------------
# time step selection

def _geostrophic_residuals(phiP, uP, vP, omega, grid, ext=1):
    gx = centered_x(phiP, grid.dx, ext) - omega * xcells(vP, 0, ext)
    gy = centered_y(phiP, grid.dy, ext) + omega * ycells(uP, 0, ext)
    return gx, gy


def _directional_dt(hL, hR, wL, wR, resL, resR, eta, coef):
    """Largest dt meeting one direction of the sufficient condition.

    The unknown new depth enters through the one-step bracket
    ``3/4 h^n <= h^{n+1} <= 5/4 h^n``, each end taken where it is adverse.
    """
    hmax = np.maximum(hL, hR)
    hmin = np.minimum(hL, hR)
    lam = np.sqrt(np.maximum(np.abs(resL), np.abs(resR)))
    speed = np.maximum(np.abs(wL), np.abs(wR)) + np.sqrt(eta / (0.75 * hmax)) * lam
    limit = np.minimum(1.0, hmin / (1.25 * hmax))
    with np.errstate(divide="ignore", over="ignore"):
        bound = np.where(speed > 0, limit / (coef * speed), np.inf)
    return float(bound.min())


def auxiliary_dt(h: np.ndarray, params: Params) -> float:
    """Explicit Coriolis restriction on dt (infinite without rotation)."""
    eta, omega = params.eta, params.omega
    if omega == 0:
        return math.inf
    with np.errstate(divide="ignore", over="ignore"):
        bound = params.zeta * h / (2 * omega**2 * eta**2) * (eta - ETA_HEIGHT_RATIO * h)
    return math.sqrt(max(float(bound.min()), 0.0))


def diffusion_dt(h: np.ndarray, params: Params, grid: Grid) -> float:
    """Explicit-diffusion restriction for the momentum smoothing term.

    The smoothing acts like an explicit diffusion of ``h u`` with
    coefficient ``g alpha dt / beta``; its per-direction diffusion number,
    evaluated with the bracketed new depth ``5/4 max h``, is kept at 1/4.
    """
    if params.alpha == 0:
        return math.inf
    beta = 1.0 / (2.0 / grid.dx + 2.0 / grid.dy)
    hmax = 1.25 * float(h.max())
    return math.sqrt(beta / (4 * params.g * params.alpha * hmax * (1 / grid.dx**2 + 1 / grid.dy**2)))


def compute_dt(state: State, bath: Bathymetry, params: Params, grid: Grid) -> float:
    eta = params.eta
    hmax = float(state.h.max())
    if not eta > ETA_HEIGHT_RATIO * hmax:
        raise NonpositiveDt(
            f"eta = {eta:.6g} does not exceed {ETA_HEIGHT_RATIO} * max h = {ETA_HEIGHT_RATIO * hmax:.6g}"
        )
    hP = _padded(grid, bath, "h", state.h)
    uP = _padded(grid, bath, "u", state.u)
    vP = _padded(grid, bath, "v", state.v)
    phiP = _phi_padded(grid, bath, state.h, params.g)
    gx, gy = _geostrophic_residuals(phiP, uP, vP, params.omega, grid)
    coef = 2.0 / grid.dx + 2.0 / grid.dy
    hL, hR = edges_x(hP)
    uL, uR = edges_x(uP)
    dt_x = _directional_dt(hL, hR, uL, uR, gx[:, :-1], gx[:, 1:], eta, coef)
    hB, hT = edges_y(hP)
    vB, vT = edges_y(vP)
    dt_y = _directional_dt(hB, hT, vB, vT, gy[:-1, :], gy[1:, :], eta, coef)
    dt = params.cfl_safety * min(
        dt_x, dt_y, auxiliary_dt(state.h, params), diffusion_dt(state.h, params, grid)
    )
    if not dt > 0:
        raise NonpositiveDt(f"time step bound is not positive: {dt}")
    return dt


# ---------------------------------------------------------------------------
# implicit geopotential

def assemble_phi_system(state: State, bath: Bathymetry, dt: float, params: Params, grid: Grid):
    g, eta, omega = params.g, params.eta, params.omega
    dx, dy = grid.dx, grid.dy
    uP = _padded(grid, bath, "u", state.u)
    vP = _padded(grid, bath, "v", state.v)
    bP = _padded(grid, bath, "b", bath.b)
    phiP = _phi_padded(grid, bath, state.h, g)
    cx = g * eta * dt**2 / (4 * dx**2)
    cy = g * eta * dt**2 / (4 * dy**2)
    coeffs = {
        (0, 0): np.full(grid.shape, 1.0 + 2 * cx + 2 * cy),
        (1, 0): dt * xcells(uP, 1) / (2 * dx),
        (-1, 0): -dt * xcells(uP, -1) / (2 * dx),
        (2, 0): np.full(grid.shape, -cx),
        (-2, 0): np.full(grid.shape, -cx),
        (0, 1): dt * ycells(vP, 1) / (2 * dy),
        (0, -1): -dt * ycells(vP, -1) / (2 * dy),
        (0, 2): np.full(grid.shape, -cy),
        (0, -2): np.full(grid.shape, -cy),
    }
    rhs = (
        xcells(phiP)
        + g * dt * centered_x(bP * uP, dx)
        + g * dt * centered_y(bP * vP, dy)
        - g * omega * eta * dt**2 * centered_x(vP, dx)
        + g * omega * eta * dt**2 * centered_y(uP, dy)
    )
    return linear.StencilSystem(grid, coeffs, rhs, frozen=phiP)


def recover_height(phi_next: np.ndarray, bath: Bathymetry, g: float) -> np.ndarray:
    h = phi_next / g - bath.b
    bad = np.argwhere(~(h > 0))
    if bad.size:
        raise PositivityFailure(f"non-positive depth in {len(bad)} cells", cells=[tuple(c) for c in bad])
    return h


def _stabilisation_ext(phiP, uP, vP, dt, params, grid):
    """``q`` on cells -1..nx (x-extended) and ``r`` on cells -1..ny."""
    gx, gy = _geostrophic_residuals(phiP, uP, vP, params.omega, grid)
    k = params.eta * dt
    return k * gx, k * gy


def stabilisation_fields(phi_next, state, bath, dt, params, grid):
    """Stabilisation terms ``q, r`` on the interior cells."""
    phiP = grid.pad(phi_next, None if bath.hold is None else params.g * (bath.hold["h"] + bath.hold["b"]))
    uP = _padded(grid, bath, "u", state.u)
    vP = _padded(grid, bath, "v", state.v)
    q, r = _stabilisation_ext(phiP, uP, vP, dt, params, grid)
    return q[:, 1:-1], r[1:-1, :]


def _fluxes(hP_next, uP, vP, q_ext, r_ext):
    hL, hR = edges_x(hP_next)
    uL, uR = edges_x(uP)
    F = 0.5 * (hL * uL + hR * uR) - 0.5 * (q_ext[:, :-1] + q_ext[:, 1:])
    hB, hT = edges_y(hP_next)
    vB, vT = edges_y(vP)
    G = 0.5 * (hB * vB + hT * vT) - 0.5 * (r_ext[:-1, :] + r_ext[1:, :])
    return F, G


def mass_fluxes(h_next, state, bath, q_ext, r_ext, grid):
    """Mass fluxes on all vertical (``F``) and horizontal (``G``) edges.

    ``q_ext`` / ``r_ext`` include one ghost cell per side along their
    flux direction, as returned by the internal stabilisation helper.
    """
    return _fluxes(
        _padded(grid, bath, "h", h_next),
        _padded(grid, bath, "u", state.u),
        _padded(grid, bath, "v", state.v),
        q_ext,
        r_ext,
    )


def mass_update(h_n, F, G, dt, grid):
    return h_n - dt / grid.dx * (F[:, 1:] - F[:, :-1]) - dt / grid.dy * (G[1:, :] - G[:-1, :])


def upwind_edge_velocity(wP, F, G):
    """Upwinded edge values of a padded cell field; ties go to the left/bottom cell."""
    wL, wR = edges_x(wP)
    wB, wT = edges_y(wP)
    return np.where(F >= 0, wL, wR), np.where(G >= 0, wB, wT)


def diffusion_edges(hP_next, uP, vP, dt, params, grid):
    """Momentum diffusion fluxes on vertical (x) and horizontal (y) edges."""
    beta = 1.0 / (2.0 / grid.dx + 2.0 / grid.dy)
    k = params.g * params.alpha * dt / beta
    mL, mR = edges_x(hP_next * uP)
    nB, nT = edges_y(hP_next * vP)
    return k * (mR - mL) / grid.dx, k * (nT - nB) / grid.dy


def momentum_update(state, h_next, phiP_next, hP_next, F, G, q, r, dt, params, grid, bath):
    """Explicit velocity update from the conservative momentum balances."""
    omega = params.omega
    dx, dy = grid.dx, grid.dy
    uP = _padded(grid, bath, "u", state.u)
    vP = _padded(grid, bath, "v", state.v)
    dphix = centered_x(phiP_next, dx)
    dphiy = centered_y(phiP_next, dy)
    if params.alpha > 0:
        lam, theta = diffusion_edges(hP_next, uP, vP, dt, params, grid)
        dphix = dphix - (lam[:, 1:] - lam[:, :-1]) / dx
        dphiy = dphiy - (theta[1:, :] - theta[:-1, :]) / dy

    def advect(wP):
        wx, wy = upwind_edge_velocity(wP, F, G)
        fx = F * wx
        fy = G * wy
        return (fx[:, 1:] - fx[:, :-1]) / dx + (fy[1:, :] - fy[:-1, :]) / dy

    mu = state.h * state.u - dt * advect(uP) - dt * h_next * dphix + dt * omega * (h_next * state.v - r)
    mv = state.h * state.v - dt * advect(vP) - dt * h_next * dphiy - dt * omega * (h_next * state.u - q)
    return mu / h_next, mv / h_next


# ---------------------------------------------------------------------------
# ledgers and checks

def _stability_conditions(h_next, F, G, dt, params, grid):
    """A posteriori check of the energy-stability hypotheses on the new depth."""
    eta, omega = params.eta, params.omega
    Fm = np.minimum(F, 0.0)
    Fp = np.maximum(F, 0.0)
    Gm = np.minimum(G, 0.0)
    Gp = np.maximum(G, 0.0)
    upwind = (Fm[:, 1:] - Fp[:, :-1]) / grid.dx + (Gm[1:, :] - Gp[:-1, :]) / grid.dy
    cfl_ok = np.all(1.0 + 3.0 * dt / h_next * upwind >= 0.0)
    eta_ok = np.all(eta > 1.5 * h_next)
    if omega == 0:
        aux_ok = True
    else:
        with np.errstate(divide="ignore", over="ignore"):
            aux = params.zeta * 2 * h_next / (3 * omega**2 * eta**2) * (eta - 1.5 * h_next)
        aux_ok = np.all(dt**2 <= aux * (1 + 1e-12))
    return bool(cfl_ok and eta_ok and aux_ok)


def _momentum_ledger(state, h_next, u_next, v_next, q, r, lam_div, bath, dt, params, grid):
    """Residuals of the discrete total momentum balances, relative to term size."""
    g, omega = params.g, params.omega
    bP = _padded(grid, bath, "b", bath.b)
    dbx = centered_x(bP, grid.dx)
    dby = centered_y(bP, grid.dy)
    ax, ay = lam_div
    terms_x = [
        h_next * u_next,
        -state.h * state.u,
        dt * g * h_next * dbx,
        -dt * omega * (h_next * state.v - r),
        -dt * h_next * ax,
    ]
    terms_y = [
        h_next * v_next,
        -state.h * state.v,
        dt * g * h_next * dby,
        dt * omega * (h_next * state.u - q),
        -dt * h_next * ay,
    ]
    out = []
    for terms in (terms_x, terms_y):
        total = sum(float(np.sum(t)) for t in terms)
        scale = sum(float(np.sum(np.abs(t))) for t in terms)
        out.append(abs(total) / scale if scale > 0 else 0.0)
    return tuple(out)


def _attempt(state, bath, params, grid, dt, tol):
    g = params.g
    system = assemble_phi_system(state, bath, dt, params, grid)
    margin = linear.dominance_margin(system)
    if not margin > 0:
        raise linear.DominanceViolation(f"dominance margin {margin:.3e} at dt = {dt:.3e}")
    phi0 = g * (state.h + bath.b)
    sol = linear.solve(system, tol=tol, x0=phi0, check_dominance=False)
    h_solved = recover_height(sol.phi, bath, g)

    hold_phi = None if bath.hold is None else g * (bath.hold["h"] + bath.hold["b"])
    phiP_solved = grid.pad(sol.phi, hold_phi)
    uP = _padded(grid, bath, "u", state.u)
    vP = _padded(grid, bath, "v", state.v)
    q_ext, r_ext = _stabilisation_ext(phiP_solved, uP, vP, dt, params, grid)
    hP_solved = _padded(grid, bath, "h", h_solved)
    F, G = _fluxes(hP_solved, uP, vP, q_ext, r_ext)
    h_next = mass_update(state.h, F, G, dt, grid)

    scale = float(np.max(np.abs(system.rhs_closed))) / g
    mismatch = float(np.max(np.abs(h_next - h_solved)))
    if mismatch > 100 * tol * max(scale, 1e-300):
        raise MismatchBeyondTolerance(
            f"flux-form depth differs from the elliptic solution by {mismatch:.3e}"
        )
    h_next = recover_height(g * (h_next + bath.b), bath, g)
    return system, sol, margin, q_ext, r_ext, F, G, h_next, mismatch


def step(
    state: State,
    bath: Bathymetry,
    params: Params,
    grid: Grid,
    dt: Optional[float] = None,
    tol: float = linear.DEFAULT_TOL,
    check_energy: Optional[bool] = None,
) -> tuple[State, StepReport]:
    """Advance ``state`` by one step.

    ``dt`` may only shrink the sufficient time step (it is capped by
    :func:`compute_dt`).  The step is retried with a halved ``dt`` (at most
    ``MAX_RETRIES`` times) if the new depth leaves the bracket
    ``[3/4 h^n, 5/4 h^n]`` or violates an energy-stability hypothesis.
    """
    if params.eta is None:
        raise ValueError("params.eta must be resolved before stepping")
    if check_energy is None:
        check_energy = grid.periodic
    g = params.g
    dt_max = compute_dt(state, bath, params, grid)
    dt = dt_max if dt is None else min(dt, dt_max)

    for retry in range(MAX_RETRIES + 1):
        system, sol, margin, q_ext, r_ext, F, G, h_next, mismatch = _attempt(
            state, bath, params, grid, dt, tol
        )
        bracket_ok = bool(np.all(h_next >= 0.75 * state.h) and np.all(h_next <= 1.25 * state.h))
        conditions_ok = _stability_conditions(h_next, F, G, dt, params, grid)
        if bracket_ok and conditions_ok:
            break
        if retry == MAX_RETRIES:
            raise BracketViolation(
                f"depth bracket or stability conditions still violated after {MAX_RETRIES} halvings"
                f" (bracket_ok={bracket_ok}, conditions_ok={conditions_ok})"
            )
        dt *= 0.5

    q = q_ext[:, 1:-1]
    r = r_ext[1:-1, :]
    hP_next = _padded(grid, bath, "h", h_next)
    phiP_next = g * (hP_next + _padded(grid, bath, "b", bath.b))
    u_next, v_next = momentum_update(state, h_next, phiP_next, hP_next, F, G, q, r, dt, params, grid, bath)
    new = State(h_next, u_next, v_next, state.t + dt)

    e0 = total_energy(state, bath, g, grid)
    e1 = total_energy(new, bath, g, grid)
    if check_energy and e1 > e0 + ENERGY_SLACK * abs(e0):
        raise EnergyIncrease(f"energy grew from {e0:.17g} to {e1:.17g} at t = {state.t:.6g}")

    if params.alpha > 0:
        uP = _padded(grid, bath, "u", state.u)
        vP = _padded(grid, bath, "v", state.v)
        lam, theta = diffusion_edges(hP_next, uP, vP, dt, params, grid)
        lam_div = ((lam[:, 1:] - lam[:, :-1]) / grid.dx, (theta[1:, :] - theta[:-1, :]) / grid.dy)
    else:
        lam_div = (0.0, 0.0)
    if grid.periodic:
        momx_res, momy_res = _momentum_ledger(state, h_next, u_next, v_next, q, r, lam_div, bath, dt, params, grid)
    else:
        momx_res = momy_res = float("nan")

    area = grid.cell_area
    eta, zeta = params.eta, params.zeta
    report = StepReport(
        dt=dt,
        iterations=sol.iterations,
        residual=sol.residual,
        margin=margin,
        q2=float(np.sum(q * q) * area),
        r2=float(np.sum(r * r) * area),
        energy_before=e0,
        energy_after=e1,
        min_h=float(h_next.min()),
        max_h=float(h_next.max()),
        bracket_ok=bracket_ok,
        conditions_ok=conditions_ok,
        retries=retry,
        mass_mismatch=mismatch,
        momx_residual=momx_res,
        momy_residual=momy_res,
        dh2=float(0.5 * g * np.sum((h_next - state.h) ** 2) * area),
        stab_dissipation=float(
            np.sum((1 - zeta) / eta**2 * (eta - 1.5 * h_next) * (q * q + r * r)) * area
        ),
    )
    return new, report
