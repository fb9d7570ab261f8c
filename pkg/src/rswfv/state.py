"""State container, fixed run data and physical parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

# eta must exceed this multiple of the water height for the explicit
# energy-stability conditions to hold under the one-step height bracket
ETA_HEIGHT_RATIO = 15.0 / 8.0


@dataclass(frozen=True)
class Params:
    """Physical and numerical parameters of a run.

    ``eta`` is the stabilisation strength (a height); ``None`` means
    "pick ``eta_factor * max(h0)`` when the run is set up".
    """

    g: float
    omega: float
    eta: Optional[float] = None
    zeta: float = 0.9
    alpha: float = 0.0
    cfl_safety: float = 0.9
    eta_factor: float = 1.9

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("g must be positive")
        if not 0 < self.zeta < 1:
            raise ValueError("zeta must lie in (0, 1)")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.eta is not None and not self.eta > 0:
            raise ValueError("eta must be positive")

    def resolved(self, h0: np.ndarray) -> "Params":
        """Copy with ``eta`` fixed from the initial height if unset."""
        if self.eta is not None:
            return self
        return replace(self, eta=float(self.eta_factor * np.max(h0)))


@dataclass
class State:
    """Water depth and velocities on the cells at time ``t``."""

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.h.copy(), self.u.copy(), self.v.copy(), self.t)

    def check(self) -> None:
        for name in ("h", "u", "v"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        if not np.all(self.h > 0):
            raise ValueError("water depth must be strictly positive")


@dataclass
class Bathymetry:
    """Fields that stay fixed during a run.

    ``b`` is the bottom topography.  ``hold`` maps ``"h"``, ``"u"``,
    ``"v"``, ``"b"`` to padded arrays whose ghost layers supply the
    frozen boundary values of an equilibrium-hold closure.
    """

    b: np.ndarray
    hold: Optional[dict] = field(default=None)

    def frozen(self, name: str) -> Optional[np.ndarray]:
        return None if self.hold is None else self.hold[name]


def potential(state: State, bath: Bathymetry, g: float) -> np.ndarray:
    """Geopotential ``g (h + b)``."""
    return g * (state.h + bath.b)


def momenta(state: State) -> tuple[np.ndarray, np.ndarray]:
    return state.h * state.u, state.h * state.v
