"""Uniform rectangular mesh, ghost-cell closure and discrete operators.

Cell fields are numpy arrays of shape ``(ny, nx)`` indexed ``z[j, i]``,
i.e. j-major: one row per fixed ``j`` with ``i`` running fastest.  Edge
fields are arrays as well:

* vertical edges ``i+1/2`` have shape ``(ny, nx)`` under a periodic x
  closure (edge ``nx-1/2`` wraps onto ``-1/2``) and ``(ny, nx + 1)``
  otherwise, ordered from the left boundary edge ``-1/2`` to ``nx-1/2``;
* horizontal edges ``j+1/2`` follow the same convention along axis 0.

Operators take interior cell fields and close them with
:meth:`Grid.pad`, which adds ``GHOST`` layers per side.  Two layers are
needed because the stabilisation terms live on the cells adjacent to a
boundary edge and themselves use a centred difference.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

GHOST = 2


class BC(str, enum.Enum):
    PERIODIC = "periodic"
    EXTRAPOLATION = "extrapolation"
    EQUILIBRIUM_HOLD = "equilibrium_hold"


def _as_bc(value) -> BC:
    return value if isinstance(value, BC) else BC(str(value).lower())


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred mesh on ``[x0, x1] x [y0, y1]``.

    ``bc`` closes the x direction; ``bc_y`` closes y and defaults to
    ``bc``.  Quasi-1D problems use ``ny = 3`` with a periodic y closure.
    """

    nx: int
    ny: int
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0
    bc: BC = BC.PERIODIC
    bc_y: Optional[BC] = None
    dx: float = field(init=False)
    dy: float = field(init=False)

    def __post_init__(self):
        if int(self.nx) < 3 or int(self.ny) < 3:
            raise ValueError(f"need at least 3 cells per direction, got {(self.nx, self.ny)}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "bc", _as_bc(self.bc))
        object.__setattr__(self, "bc_y", _as_bc(self.bc if self.bc_y is None else self.bc_y))
        dx = (self.x1 - self.x0) / self.nx
        dy = (self.y1 - self.y0) / self.ny
        if not (dx > 0 and dy > 0):
            raise ValueError("domain bounds must be increasing")
        object.__setattr__(self, "dx", float(dx))
        object.__setattr__(self, "dy", float(dy))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def lx(self) -> float:
        return self.x1 - self.x0

    @property
    def ly(self) -> float:
        return self.y1 - self.y0

    @property
    def periodic(self) -> bool:
        """True when both directions are periodic (closed domain)."""
        return self.bc is BC.PERIODIC and self.bc_y is BC.PERIODIC

    @property
    def needs_hold(self) -> bool:
        return BC.EQUILIBRIUM_HOLD in (self.bc, self.bc_y)

    def with_resolution(self, nx: int, ny: int) -> "Grid":
        return Grid(nx, ny, self.x0, self.x1, self.y0, self.y1, self.bc, self.bc_y)

    def centers(self, ghost: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """2D arrays ``(X, Y)`` of cell centres, optionally with ghost layers."""
        i = np.arange(-ghost, self.nx + ghost)
        j = np.arange(-ghost, self.ny + ghost)
        x = self.x0 + (i + 0.5) * self.dx
        y = self.y0 + (j + 0.5) * self.dy
        return np.meshgrid(x, y)

    def project(self, f: Callable, ghost: int = 0) -> np.ndarray:
        """Cell averages of ``f(x, y)`` by the midpoint rule."""
        X, Y = self.centers(ghost)
        out = np.asarray(f(X, Y), dtype=float)
        out = np.broadcast_to(out, X.shape).copy()
        if not np.all(np.isfinite(out)):
            raise ValueError("projected field has non-finite values")
        return out

    def pad(self, z: np.ndarray, frozen: Optional[np.ndarray] = None) -> np.ndarray:
        """Return ``z`` with ``GHOST`` layers filled according to the closure.

        ``frozen`` is a padded array holding the ghost values used by
        ``EQUILIBRIUM_HOLD`` directions; it is required iff one is used.
        """
        g = GHOST
        ny, nx = self.shape
        if z.shape != (ny, nx):
            raise ValueError(f"expected shape {(ny, nx)}, got {z.shape}")
        if self.needs_hold and frozen is None:
            raise ValueError("equilibrium-hold closure needs frozen ghost values")
        out = np.empty((ny + 2 * g, nx + 2 * g))
        out[g:-g, g:-g] = z
        rows = slice(g, g + ny)
        if self.bc is BC.PERIODIC:
            out[rows, :g] = z[:, nx - g:]
            out[rows, g + nx:] = z[:, :g]
        elif self.bc is BC.EXTRAPOLATION:
            out[rows, :g] = z[:, :1]
            out[rows, g + nx:] = z[:, -1:]
        else:
            out[rows, :g] = frozen[rows, :g]
            out[rows, g + nx:] = frozen[rows, g + nx:]
        # y closure acts on whole rows; corners are never read by the stencils
        if self.bc_y is BC.PERIODIC:
            out[:g] = out[ny:ny + g]
            out[g + ny:] = out[g:2 * g]
        elif self.bc_y is BC.EXTRAPOLATION:
            out[:g] = out[g]
            out[g + ny:] = out[g + ny - 1]
        else:
            out[:g] = frozen[:g]
            out[g + ny:] = frozen[g + ny:]
        return out


# ---------------------------------------------------------------------------
# Slicing helpers on padded arrays.  ``ext`` widens the returned cell range by
# that many ghost cells on each side of the differentiated axis.

def xcells(P: np.ndarray, shift: int = 0, ext: int = 0) -> np.ndarray:
    """Cells ``i = -ext .. nx-1+ext`` shifted by ``shift`` in x, interior rows."""
    g = GHOST
    ny = P.shape[0] - 2 * g
    nx = P.shape[1] - 2 * g
    return P[g:g + ny, g - ext + shift:g + nx + ext + shift]


def ycells(P: np.ndarray, shift: int = 0, ext: int = 0) -> np.ndarray:
    g = GHOST
    ny = P.shape[0] - 2 * g
    nx = P.shape[1] - 2 * g
    return P[g - ext + shift:g + ny + ext + shift, g:g + nx]


def centered_x(P: np.ndarray, dx: float, ext: int = 0) -> np.ndarray:
    """Centred x-derivative on cells ``-ext .. nx-1+ext`` (``ext <= 1``)."""
    return (xcells(P, 1, ext) - xcells(P, -1, ext)) / (2.0 * dx)


def centered_y(P: np.ndarray, dy: float, ext: int = 0) -> np.ndarray:
    return (ycells(P, 1, ext) - ycells(P, -1, ext)) / (2.0 * dy)


def edges_x(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left and right cell values of all vertical edges ``-1/2 .. nx-1/2``."""
    g = GHOST
    ny = P.shape[0] - 2 * g
    nx = P.shape[1] - 2 * g
    rows = slice(g, g + ny)
    return P[rows, g - 1:g + nx], P[rows, g:g + nx + 1]


def edges_y(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = GHOST
    ny = P.shape[0] - 2 * g
    nx = P.shape[1] - 2 * g
    cols = slice(g, g + nx)
    return P[g - 1:g + ny, cols], P[g:g + ny + 1, cols]


def _trim_x(grid: Grid, e: np.ndarray) -> np.ndarray:
    return e[:, 1:] if grid.bc is BC.PERIODIC else e


def _trim_y(grid: Grid, e: np.ndarray) -> np.ndarray:
    return e[1:, :] if grid.bc_y is BC.PERIODIC else e


# ---------------------------------------------------------------------------
# Public operators on interior fields.

def ghost_closure(z: np.ndarray, grid: Grid, frozen: Optional[np.ndarray] = None) -> np.ndarray:
    """Padded copy of ``z``; see :meth:`Grid.pad`."""
    return grid.pad(z, frozen)


def avg_edge(z, grid, frozen=None):
    """Edge averages ``{{z}}`` on vertical and horizontal edges."""
    P = grid.pad(z, frozen)
    lx, rx = edges_x(P)
    ly, ry = edges_y(P)
    return _trim_x(grid, 0.5 * (lx + rx)), _trim_y(grid, 0.5 * (ly + ry))


def jump_edge(z, grid, frozen=None):
    """Edge jumps ``[[z]] = z_right - z_left``."""
    P = grid.pad(z, frozen)
    lx, rx = edges_x(P)
    ly, ry = edges_y(P)
    return _trim_x(grid, rx - lx), _trim_y(grid, ry - ly)


def ddx_centered(z, grid, frozen=None):
    return centered_x(grid.pad(z, frozen), grid.dx)


def ddy_centered(z, grid, frozen=None):
    return centered_y(grid.pad(z, frozen), grid.dy)


def ddx_dual(z, grid, frozen=None):
    """Difference quotient across vertical edges."""
    jx, _ = jump_edge(z, grid, frozen)
    return jx / grid.dx


def ddy_dual(z, grid, frozen=None):
    _, jy = jump_edge(z, grid, frozen)
    return jy / grid.dy
