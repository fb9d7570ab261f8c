"""K-convergence diagnostics for sequences of numerical solutions.

Solutions on successively refined grids are restricted to a common coarse
grid, then compared through their Cesaro means, first variances and the
pointwise 1-Wasserstein distance between the empirical measures they
define.  Each solution is the triple ``U = (h, m_x, m_y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import restrict
from .errors import EmptyEnsemble, EmptyList, GridMismatch

COMPONENTS = ("h", "mx", "my")


@dataclass(frozen=True)
class Snapshot:
    """Conserved variables of one run at a fixed time, on its native grid."""

    h: np.ndarray
    mx: np.ndarray
    my: np.ndarray

    @property
    def resolution(self) -> int:
        return self.h.shape[1]

    def stacked(self) -> np.ndarray:
        return np.stack([self.h, self.mx, self.my])

    @classmethod
    def from_state(cls, state) -> "Snapshot":
        return cls(state.h.copy(), state.h * state.u, state.h * state.v)


@dataclass
class SolutionEnsemble:
    """Ordered snapshots compared on a grid with ``target`` cells per row."""

    members: list
    target: int

    def __post_init__(self):
        if not self.members:
            raise EmptyEnsemble("an ensemble needs at least one member")
        for m in self.members:
            ny, nx = m.h.shape
            factor = nx // self.target
            if factor < 1 or nx % self.target or ny % factor:
                raise GridMismatch(f"member of shape {m.h.shape} cannot be restricted to {self.target} cells")

    def restricted(self) -> np.ndarray:
        """Array of shape ``(k, 3, ny_c, nx_c)``."""
        return np.stack([restrict_snapshot(m, m.resolution // self.target) for m in self.members])

    def __len__(self) -> int:
        return len(self.members)


def restrict_snapshot(snap: Snapshot, factor: int) -> np.ndarray:
    return np.stack([restrict(c, factor) for c in (snap.h, snap.mx, snap.my)])


def cesaro_mean(ens: SolutionEnsemble) -> np.ndarray:
    """Arithmetic mean of the restricted members, shape ``(3, ny_c, nx_c)``."""
    return ens.restricted().mean(axis=0)


def first_variance(ens: SolutionEnsemble) -> np.ndarray:
    """Mean absolute deviation of the restricted members from their mean."""
    U = ens.restricted()
    return np.abs(U - U.mean(axis=0)).mean(axis=0)


def _w1_sorted(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """W1 between empirical measures along axis 0 of sorted sample arrays.

    Both quantile functions are piecewise constant with jumps at ``i/k``
    and ``j/m``; on the merged partition the integral is a finite sum.
    """
    k, m = A.shape[0], B.shape[0]
    if k == m:
        return np.abs(A - B).mean(axis=0)
    # breakpoints in units of 1/(k m)
    points = np.union1d(np.arange(k + 1) * m, np.arange(m + 1) * k)
    left, right = points[:-1], points[1:]
    weights = (right - left) / (k * m)
    ia = left // m
    ib = left // k
    diff = np.abs(A[ia] - B[ib])
    return np.tensordot(weights, diff, axes=(0, 0))


def wasserstein1_point(a, b) -> float:
    """1-Wasserstein distance between the empirical measures of two samples."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptyList("both sample lists must be nonempty")
    return float(_w1_sorted(a, b))


def wasserstein1_field(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pointwise W1 between sample stacks ``A`` (k, ...) and ``B`` (m, ...)."""
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptyList("both sample stacks must be nonempty")
    if A.shape[1:] != B.shape[1:]:
        raise GridMismatch(f"sample fields differ in shape: {A.shape[1:]} vs {B.shape[1:]}")
    return _w1_sorted(np.sort(A, axis=0), np.sort(B, axis=0))


@dataclass(frozen=True)
class LadderRow:
    k: int
    component: str
    E1: float
    E2: float
    E3: float
    E4: float


def error_ladder(runs: list, ref: SolutionEnsemble, cell_area: float = 1.0) -> list[LadderRow]:
    """E1-E4 errors for each prefix of ``runs`` (ordered by resolution).

    The ensemble at level ``k`` holds the runs at all resolutions up to
    ``k``.  ``E1`` compares the single finest member with the finest member
    of ``ref``; ``E2``-``E4`` compare Cesaro means, first variances and the
    empirical measures.  L1 norms use ``cell_area`` of the comparison grid.
    Rows are emitted per component plus a ``total`` row summing them.
    """
    if not runs:
        raise EmptyEnsemble("the ladder needs at least one run")
    target = ref.target
    R = ref.restricted()
    ref_last = R[-1]
    ref_mean = R.mean(axis=0)
    ref_var = np.abs(R - ref_mean).mean(axis=0)
    rows = []
    for n in range(1, len(runs) + 1):
        ens = SolutionEnsemble(list(runs[:n]), target)
        U = ens.restricted()
        mean = U.mean(axis=0)
        var = np.abs(U - mean).mean(axis=0)
        w1 = wasserstein1_field(U, R)
        k = runs[n - 1].resolution
        errs = []
        for c, name in enumerate(COMPONENTS):
            e = (
                float(np.sum(np.abs(U[-1][c] - ref_last[c])) * cell_area),
                float(np.sum(np.abs(mean[c] - ref_mean[c])) * cell_area),
                float(np.sum(np.abs(var[c] - ref_var[c])) * cell_area),
                float(np.sum(w1[c]) * cell_area),
            )
            errs.append(e)
            rows.append(LadderRow(k, name, *e))
        rows.append(LadderRow(k, "total", *(float(sum(col)) for col in zip(*errs))))
    return rows
