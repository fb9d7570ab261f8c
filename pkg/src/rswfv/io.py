"""Field output: snapshot CSV, legacy VTK and small tables."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .diagnostics import potential_vorticity
from .grid import Grid
from .state import Bathymetry, Params, State

SNAPSHOT_COLUMNS = ("x", "y", "h", "u", "v", "b", "phi", "pv")


def snapshot_columns(grid: Grid, state: State, bath: Bathymetry, params: Params) -> dict:
    X, Y = grid.centers()
    pv = potential_vorticity(state, params.omega, grid, bath.frozen("u"), bath.frozen("v"))
    return {
        "x": X, "y": Y, "h": state.h, "u": state.u, "v": state.v, "b": bath.b,
        "phi": params.g * (state.h + bath.b), "pv": pv,
    }


def write_snapshot_csv(path, grid: Grid, state: State, bath: Bathymetry, params: Params) -> None:
    """Cell values, one row per cell in j-major order, 17 significant digits."""
    cols = snapshot_columns(grid, state, bath, params)
    data = np.column_stack([np.ravel(cols[c]) for c in SNAPSHOT_COLUMNS])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(SNAPSHOT_COLUMNS), comments="")


def read_snapshot_csv(path, grid: Grid) -> dict:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: data[:, k].reshape(grid.shape) for k, c in enumerate(SNAPSHOT_COLUMNS)}


def write_vtk(path, grid: Grid, state: State, bath: Bathymetry, params: Params, title: str = "rswfv") -> None:
    """Legacy ASCII structured-points file with one cell-data scalar per field."""
    cols = snapshot_columns(grid, state, bath, params)
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} 1",
        f"ORIGIN {grid.x0!r} {grid.y0!r} 0",
        f"SPACING {grid.dx!r} {grid.dy!r} 1",
        f"CELL_DATA {grid.nx * grid.ny}",
    ]
    for name in ("h", "u", "v", "b", "phi", "pv"):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend("%.17g" % x for x in np.ravel(cols[name]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["%.17g" % x if isinstance(x, float) else x for x in row])


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
