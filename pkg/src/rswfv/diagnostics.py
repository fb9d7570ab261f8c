"""Scalar and field diagnostics of a run."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, IndivisibleDims, NonpositiveError
from .grid import Grid, centered_x, centered_y
from .scheme import StepReport, total_energy
from .state import Bathymetry, Params, State

LEDGER_COLUMNS = ("t", "dt", "energy", "mass", "momx", "momy", "minh", "maxh", "q2", "r2", "iters")

__all__ = [
    "LEDGER_COLUMNS",
    "RunLedger",
    "total_energy",
    "total_mass",
    "total_momentum",
    "potential_vorticity",
    "l2_error",
    "l1_norm",
    "restrict",
    "eoc",
    "wb_residuals",
]


def total_mass(state: State, grid: Grid) -> float:
    return float(np.sum(state.h) * grid.cell_area)


def total_momentum(state: State, grid: Grid) -> tuple[float, float]:
    a = grid.cell_area
    return float(np.sum(state.h * state.u) * a), float(np.sum(state.h * state.v) * a)


def potential_vorticity(state: State, omega: float, grid: Grid, frozen_u=None, frozen_v=None) -> np.ndarray:
    """``(omega + d_x v - d_y u) / h`` with centred differences."""
    curl = centered_x(grid.pad(state.v, frozen_v), grid.dx) - centered_y(grid.pad(state.u, frozen_u), grid.dy)
    return (omega + curl) / state.h


def _check_same(a, b):
    if np.shape(a) != np.shape(b):
        raise GridMismatch(f"field shapes differ: {np.shape(a)} vs {np.shape(b)}")


def l2_error(a: np.ndarray, ref: np.ndarray, grid: Grid) -> float:
    """Area-weighted discrete L2 distance ``sqrt(sum dx dy (a - ref)^2)``."""
    _check_same(a, ref)
    if np.shape(a) != grid.shape:
        raise GridMismatch(f"fields of shape {np.shape(a)} do not live on a {grid.shape} grid")
    d = np.asarray(a, dtype=float) - ref
    return math.sqrt(float(np.sum(d * d)) * grid.cell_area)


def l1_norm(a: np.ndarray, cell_area: float) -> float:
    return float(np.sum(np.abs(a)) * cell_area)


def restrict(fine: np.ndarray, factor: int, factor_y: int | None = None) -> np.ndarray:
    """Average over ``factor_y x factor`` blocks (area-weighted, so mass preserving).

    ``factor_y`` defaults to ``factor``; strips pass ``1`` to keep their rows.
    """
    fx = int(factor)
    fy = fx if factor_y is None else int(factor_y)
    ny, nx = fine.shape
    if fx < 1 or fy < 1 or nx % fx or ny % fy:
        raise IndivisibleDims(f"shape {fine.shape} is not divisible into {fy}x{fx} blocks")
    return fine.reshape(ny // fy, fy, nx // fx, fx).mean(axis=(1, 3))


def eoc(errors, resolutions) -> list[float]:
    """Experimental orders ``log(e_{k-1}/e_k) / log(n_k/n_{k-1})``."""
    errors = [float(e) for e in errors]
    resolutions = [float(n) for n in resolutions]
    if len(errors) != len(resolutions) or len(errors) < 2:
        raise ValueError("need matching lists of at least two errors and resolutions")
    if min(errors) <= 0:
        raise NonpositiveError("errors must be positive to compute orders")
    return [
        math.log(errors[k - 1] / errors[k]) / math.log(resolutions[k] / resolutions[k - 1])
        for k in range(1, len(errors))
    ]


def wb_residuals(state: State, bath: Bathymetry, params: Params, grid: Grid) -> tuple[float, float, float, float]:
    """Discrete jet residuals ``max|d_x phi - omega v|``, ``max|d_y phi + omega u|``,
    ``max|d_y h|`` and ``max|u|``."""
    g, omega = params.g, params.omega
    hP = grid.pad(state.h, bath.frozen("h"))
    phiP = g * (hP + grid.pad(bath.b, bath.frozen("b")))
    rx = centered_x(phiP, grid.dx) - omega * state.v
    ry = centered_y(phiP, grid.dy) + omega * state.u
    dyh = centered_y(hP, grid.dy)
    return (
        float(np.max(np.abs(rx))),
        float(np.max(np.abs(ry))),
        float(np.max(np.abs(dyh))),
        float(np.max(np.abs(state.u))),
    )


@dataclass
class RunLedger:
    """Per-step time series of global quantities.

    Row 0 describes the initial state.  ``dh2_sum`` and ``stab_sum`` are the
    running sums of ``g/2 sum (h^{k+1}-h^k)^2 dx dy`` and of the weighted
    stabilisation dissipation; together with the energy they make up the
    global energy estimate checked by :meth:`global_estimate_ok`.
    """

    rows: list = field(default_factory=list)
    dh2_sum: list = field(default_factory=list)
    stab_sum: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    def record(self, state: State, bath: Bathymetry, g: float, grid: Grid, report: StepReport | None = None) -> None:
        if self.rows and not state.t >= self.rows[-1][0]:
            raise ValueError("ledger times must be non-decreasing")
        mx, my = total_momentum(state, grid)
        if report is None:
            dt = q2 = r2 = 0.0
            iters = 0
            dh2 = stab = 0.0
        else:
            dt, q2, r2, iters = report.dt, report.q2, report.r2, report.iterations
            dh2, stab = report.dh2, report.stab_dissipation
            self.reports.append(report)
        prev_dh2 = self.dh2_sum[-1] if self.dh2_sum else 0.0
        prev_stab = self.stab_sum[-1] if self.stab_sum else 0.0
        self.dh2_sum.append(prev_dh2 + dh2)
        self.stab_sum.append(prev_stab + stab)
        self.rows.append((
            state.t, dt, total_energy(state, bath, g, grid), total_mass(state, grid), mx, my,
            float(state.h.min()), float(state.h.max()), q2, r2, int(iters),
        ))

    def column(self, name: str) -> np.ndarray:
        k = LEDGER_COLUMNS.index(name)
        return np.array([row[k] for row in self.rows])

    def energy_nonincreasing(self, slack: float = 1e-10) -> bool:
        e = self.column("energy")
        return bool(np.all(e[1:] <= e[:-1] + slack * np.abs(e[:-1])))

    def global_estimate_terms(self) -> np.ndarray:
        """``E^n + dh2_sum^n + stab_sum^n`` for every recorded step."""
        return self.column("energy") + np.array(self.dh2_sum) + np.array(self.stab_sum)

    def global_estimate_ok(self, slack: float = 1e-10) -> bool:
        e0 = self.rows[0][2]
        return bool(np.all(self.global_estimate_terms() <= e0 + slack * abs(e0)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(LEDGER_COLUMNS)
            for row in self.rows:
                w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
