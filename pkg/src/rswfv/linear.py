"""Stencil systems for the geopotential and their iterative solution.

A system is given by per-cell coefficients at integer offsets
``(di, dj)`` (offset ``(0, 0)`` is the diagonal) plus a right-hand side.
Offsets that leave the grid are resolved through the grid's closure:
periodic directions wrap, extrapolated ones fold onto the boundary cell
and held ones move the frozen ghost value to the right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numba import njit

from .errors import DominanceViolation, NonConvergence
from .grid import BC, GHOST, Grid

DEFAULT_TOL = 1e-12


@dataclass
class StencilSystem:
    grid: Grid
    coeffs: dict
    rhs: np.ndarray
    frozen: Optional[np.ndarray] = None
    matrix: sp.csr_matrix = field(init=False, repr=False)
    rhs_closed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ny, nx = self.grid.shape
        if self.grid.needs_hold and self.frozen is None:
            raise ValueError("held boundaries need frozen ghost values for the unknown")
        offsets = tuple(self.coeffs)
        pattern = _pattern(self.grid, offsets)
        vals = []
        b = np.array(self.rhs, dtype=float).copy()
        for off, (keep, held) in zip(offsets, pattern.masks):
            c = np.broadcast_to(np.asarray(self.coeffs[off], dtype=float), (ny, nx))
            if not np.all(np.isfinite(c)):
                raise ValueError(f"non-finite coefficient at offset {off}")
            if held is not None:
                mask, gj, gi = held
                b[mask] -= c[mask] * self.frozen[gj, gi]
            vals.append(c[keep])
        data = np.bincount(pattern.pos, weights=np.concatenate(vals), minlength=len(pattern.indices))
        n = nx * ny
        self.matrix = sp.csr_matrix((data, pattern.indices, pattern.indptr), shape=(n, n))
        self.rhs_closed = b

    def apply(self, phi: np.ndarray) -> np.ndarray:
        """Closed operator applied to ``phi`` (interior values)."""
        return (self.matrix @ phi.ravel()).reshape(self.grid.shape)

    def residual(self, phi: np.ndarray) -> np.ndarray:
        return self.rhs_closed - self.apply(phi)


@dataclass(frozen=True)
class _Pattern:
    masks: list
    indptr: np.ndarray
    indices: np.ndarray
    pos: np.ndarray


_PATTERNS: dict = {}


def _pattern(grid: Grid, offsets: tuple) -> _Pattern:
    """Sparsity pattern of a stencil on a closed grid, cached per grid."""
    key = (grid, offsets)
    if key in _PATTERNS:
        return _PATTERNS[key]
    ny, nx = grid.shape
    n = nx * ny
    jj, ii = np.mgrid[0:ny, 0:nx]
    masks, rows, cols = [], [], []
    for di, dj in offsets:
        held = np.zeros((ny, nx), dtype=bool)
        I, held = _close(ii + di, nx, grid.bc, held)
        J, held = _close(jj + dj, ny, grid.bc_y, held)
        held_info = None
        if held.any():
            # offsets are axis aligned, so the frozen lookup is unambiguous
            gj = np.clip(jj + dj, -GHOST, ny + GHOST - 1) + GHOST
            gi = np.clip(ii + di, -GHOST, nx + GHOST - 1) + GHOST
            held_info = (held, gj[held], gi[held])
        keep = ~held
        masks.append((keep, held_info))
        rows.append((jj * nx + ii)[keep])
        cols.append((J * nx + I)[keep])
    flat = np.concatenate(rows).astype(np.int64) * n + np.concatenate(cols)
    uniq, pos = np.unique(flat, return_inverse=True)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(uniq // n, minlength=n), out=indptr[1:])
    pattern = _Pattern(masks, indptr, (uniq % n).astype(np.int64), pos.ravel())
    if len(_PATTERNS) > 32:
        _PATTERNS.clear()
    _PATTERNS[key] = pattern
    return pattern


def _close(idx, n, bc, held):
    out = idx >= n
    under = idx < 0
    if bc is BC.PERIODIC:
        idx = np.mod(idx, n)
    elif bc is BC.EXTRAPOLATION:
        idx = np.clip(idx, 0, n - 1)
    else:
        held = held | out | under
        idx = np.clip(idx, 0, n - 1)
    return idx, held


def dominance_margin(system: StencilSystem) -> float:
    """``min_k (|a_kk| - sum_{l != k} |a_kl|) / |a_kk|``; positive iff strictly dominant."""
    A = system.matrix
    diag = np.abs(A.diagonal())
    off = np.asarray(abs(A).sum(axis=1)).ravel() - diag
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(diag > 0, (diag - off) / diag, -np.inf)
    return float(margin.min())


@dataclass
class SolveResult:
    phi: np.ndarray
    iterations: int
    residual: float
    history: list


@njit(cache=True)
def _sweep(indptr, indices, data, order, rhs, x):
    for k in order:
        s = rhs[k]
        d = 0.0
        for p in range(indptr[k], indptr[k + 1]):
            c = indices[p]
            if c == k:
                d += data[p]
            else:
                s -= data[p] * x[c]
        x[k] = s / d


@njit(cache=True)
def _residual_inf(indptr, indices, data, rhs, x):
    worst = 0.0
    for k in range(rhs.shape[0]):
        s = rhs[k]
        for p in range(indptr[k], indptr[k + 1]):
            s -= data[p] * x[indices[p]]
        if abs(s) > worst:
            worst = abs(s)
    return worst


def red_black_order(grid: Grid) -> np.ndarray:
    ny, nx = grid.shape
    jj, ii = np.mgrid[0:ny, 0:nx]
    flat = (jj * nx + ii).ravel()
    red = ((ii + jj) % 2 == 0).ravel()
    return np.concatenate([flat[red], flat[~red]]).astype(np.int64)


def solve(
    system: StencilSystem,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
    check_dominance: bool = True,
) -> SolveResult:
    """Red-black ordered Gauss-Seidel until ``|A x - b|_inf <= tol |b|_inf``.

    The residual is tested before the first sweep, so an initial guess
    that already solves the system is returned unchanged.
    """
    grid = system.grid
    if max_iter is None:
        max_iter = 20 * (grid.nx + grid.ny)
    if check_dominance:
        margin = dominance_margin(system)
        if not margin > 0:
            raise DominanceViolation(f"system is not strictly diagonally dominant (margin {margin:.3e})")
    A = system.matrix
    indptr = A.indptr.astype(np.int64)
    indices = A.indices.astype(np.int64)
    data = A.data.astype(float)
    rhs = np.ascontiguousarray(system.rhs_closed.ravel(), dtype=float)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float).ravel().copy()
    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        scale = 1.0
    order = red_black_order(grid)

    res = _residual_inf(indptr, indices, data, rhs, x)
    history = [res]
    it = 0
    while res > tol * scale:
        if it >= max_iter:
            raise NonConvergence(
                f"Gauss-Seidel did not converge in {max_iter} sweeps (residual {res / scale:.3e})",
                residual=res / scale,
                iterations=it,
            )
        _sweep(indptr, indices, data, order, rhs, x)
        it += 1
        res = _residual_inf(indptr, indices, data, rhs, x)
        history.append(res)
    return SolveResult(x.reshape(grid.shape), it, res / scale, history)
