"""Time loop: steps a state to a final time, landing exactly on output times."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import linear
from .diagnostics import RunLedger
from .grid import Grid
from .scheme import StepReport, step
from .state import Bathymetry, Params, State


@dataclass
class RunResult:
    state: State
    ledger: RunLedger
    snapshots: list = field(default_factory=list)
    steps: int = 0


def simulate(
    grid: Grid,
    state: State,
    bath: Bathymetry,
    params: Params,
    t_final: float,
    snapshot_times: Sequence[float] = (),
    every: Optional[int] = None,
    tol: float = linear.DEFAULT_TOL,
    on_step: Optional[Callable[[State, StepReport], None]] = None,
    max_steps: Optional[int] = None,
) -> RunResult:
    """Advance ``state`` to ``t_final``.

    The time step is the sufficient step of the scheme, shortened where
    needed so that every entry of ``snapshot_times`` and ``t_final`` is hit
    exactly.  ``every`` additionally snapshots each ``every``-th step.  The
    initial and final states are always part of ``snapshots``.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    targets = sorted({float(t) for t in snapshot_times if state.t < t < t_final} | {float(t_final)})
    ledger = RunLedger()
    ledger.record(state, bath, params.g, grid)
    result = RunResult(state, ledger, [state.copy()])
    n = 0
    for target in targets:
        while state.t < target:
            if max_steps is not None and n >= max_steps:
                raise RuntimeError(f"step limit {max_steps} reached at t = {state.t}")
            cap = target - state.t
            new, report = step(state, bath, params, grid, dt=cap, tol=tol)
            if report.dt == cap or math.isclose(new.t, target, rel_tol=0, abs_tol=1e-14 * max(1.0, abs(target))):
                new.t = target
            state = new
            n += 1
            ledger.record(state, bath, params.g, grid, report)
            if on_step is not None:
                on_step(state, report)
            if every and n % every == 0 and state.t < target:
                result.snapshots.append(state.copy())
        if result.snapshots[-1].t != state.t:
            result.snapshots.append(state.copy())
    result.state = state
    result.steps = n
    return result
