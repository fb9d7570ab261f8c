"""Command line driver: ``rswfv run | sweep | kconv | list-cases``.

Configuration files are YAML mappings that only override catalogue
defaults::

    case: geostrophic_adjustment
    nx: 100
    bc: periodic
    t_final: 2.0
    params: {eta: 3.0, cfl_safety: 0.5}
    snapshots: {times: [1.0], every: 50}
    output: {dir: runs/geo, formats: [csv, vtk]}

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import dataclasses
import os
import subprocess
import sys
import time
from pathlib import Path
from typing import Optional

import click
import yaml

from . import __version__
from .cases import CATALOG, build, get_case
from .diagnostics import eoc, l2_error, restrict
from .errors import ConfigError, NumericalFailure
from .io import write_snapshot_csv, write_table, write_vtk
from .kconv import Snapshot, SolutionEnsemble, error_ladder
from .runner import simulate

OUTPUT_ROOT_ENV = "RSWFV_OUTPUT_ROOT"
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
PARAM_KEYS = ("g", "omega", "eta", "zeta", "alpha", "cfl_safety", "eta_factor")
FORMATS = ("csv", "vtk")


@dataclasses.dataclass
class RunConfig:
    case: str
    nx: Optional[int] = None
    ny: Optional[int] = None
    bc: Optional[str] = None
    t_final: Optional[float] = None
    params: dict = dataclasses.field(default_factory=dict)
    snapshot_times: list = dataclasses.field(default_factory=list)
    every: Optional[int] = None
    out: Optional[str] = None
    formats: list = dataclasses.field(default_factory=lambda: ["csv"])
    tol: float = 1e-12

    def validate(self) -> "RunConfig":
        spec = get_case(self.case)
        if self.t_final is None:
            self.t_final = spec.t_final
        if not self.t_final >= 0:
            raise ConfigError(f"t_final must be non-negative, got {self.t_final}")
        bad = set(self.params) - set(PARAM_KEYS)
        if bad:
            raise ConfigError(f"unknown parameter(s): {', '.join(sorted(bad))}")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_final:
                raise ConfigError(f"snapshot time {t} lies outside [0, {self.t_final}]")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output format(s): {', '.join(sorted(bad))}")
        if self.every is not None and self.every < 1:
            raise ConfigError("snapshot interval must be a positive number of steps")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path) -> dict:
    """Read a YAML config; a run manifest is accepted as well."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    flat = dict(data)
    snaps = flat.pop("snapshots", None) or {}
    if snaps:
        flat.setdefault("snapshot_times", snaps.get("times", []))
        flat.setdefault("every", snaps.get("every"))
    output = flat.pop("output", None) or {}
    if output:
        flat.setdefault("out", output.get("dir"))
        flat.setdefault("formats", output.get("formats", ["csv"]))
    known = {f.name for f in dataclasses.fields(RunConfig)}
    bad = set(flat) - known
    if bad:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(bad))}")
    return flat


def make_config(config_path, **cli) -> RunConfig:
    data = load_config(config_path) if config_path else {}
    for key, value in cli.items():
        if value is not None:
            data[key] = value
    if "case" not in data or data["case"] is None:
        raise ConfigError("no case given (use --case or a config file)")
    try:
        cfg = RunConfig(**data)
        cfg.params = {k: float(v) for k, v in (cfg.params or {}).items()}
        cfg.snapshot_times = [float(t) for t in cfg.snapshot_times or []]
        if cfg.t_final is not None:
            cfg.t_final = float(cfg.t_final)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def output_dir(out: Optional[str], default: str) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    path = Path(out if out else default)
    if root and not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _setup(cfg: RunConfig, nx=None):
    try:
        return build(cfg.case, nx=cfg.nx if nx is None else nx, ny=cfg.ny if nx is None else None,
                     bc=cfg.bc, **cfg.params)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def execute(cfg: RunConfig, out: Path, write_fields: bool = True):
    """Run one configuration, writing snapshots, ledger and manifest to ``out``."""
    grid, state, bath, params = _setup(cfg)
    start = time.perf_counter()
    status = "ok"
    try:
        result = simulate(grid, state, bath, params, cfg.t_final, cfg.snapshot_times, cfg.every, tol=cfg.tol)
    except NumericalFailure as exc:
        status = f"{type(exc).__name__}: {exc}"
        _write_manifest(out, cfg, params, time.perf_counter() - start, status)
        raise
    wall = time.perf_counter() - start
    if write_fields:
        for k, snap in enumerate(result.snapshots):
            stem = out / f"snapshot_{k:04d}"
            if "csv" in cfg.formats:
                write_snapshot_csv(f"{stem}.csv", grid, snap, bath, params)
            if "vtk" in cfg.formats:
                write_vtk(f"{stem}.vtk", grid, snap, bath, params, title=f"{cfg.case} t={snap.t!r}")
    result.ledger.write_csv(out / "ledger.csv")
    _write_manifest(out, cfg, params, wall, status, steps=result.steps,
                    snapshot_times=[s.t for s in result.snapshots])
    return grid, result


def _write_manifest(out: Path, cfg: RunConfig, params, wall: float, status: str, **extra) -> None:
    manifest = {
        "config": cfg.to_dict(),
        "resolved_params": dataclasses.asdict(params),
        "version": version_string(),
        "wall_time_s": wall,
        "status": status,
    }
    manifest.update(extra)
    with open(out / "manifest.yaml", "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=False)


def _parse_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse resolution list {text!r}") from exc
    if not values:
        raise ConfigError("empty resolution list")
    return values


def _check_ladder(resolutions: list[int], ref: int, minimum: int) -> None:
    if len(resolutions) < minimum:
        raise ConfigError(f"need at least {minimum} resolutions, got {len(resolutions)}")
    if len(set(resolutions)) != len(resolutions):
        raise ConfigError("resolutions must be distinct")
    if resolutions != sorted(resolutions):
        raise ConfigError("resolutions must be ascending")
    for n in resolutions:
        if ref % n:
            raise ConfigError(f"reference resolution {ref} is not a multiple of {n}")
    if ref <= resolutions[-1]:
        raise ConfigError("reference resolution must exceed the finest run")


def sweep_errors(cfg: RunConfig, resolutions: list[int], ref: int, out: Optional[Path] = None):
    """L2 errors of ``h, u, v`` against the restricted reference, plus orders."""
    _check_ladder(resolutions, ref, 1)
    strip = get_case(cfg.case).strip

    def solve(n):
        grid, state, bath, params = _setup(cfg, nx=n)
        return grid, simulate(grid, state, bath, params, cfg.t_final, tol=cfg.tol).state

    _, ref_state = solve(ref)
    errors = {c: [] for c in "huv"}
    for n in resolutions:
        grid, state = solve(n)
        f = ref // n
        for c in "huv":
            coarse = restrict(getattr(ref_state, c), f, 1 if strip else f)
            errors[c].append(l2_error(getattr(state, c), coarse, grid))
    orders = {c: ([float("nan")] + eoc(errors[c], resolutions) if len(resolutions) > 1 else None) for c in "huv"}
    if out is not None:
        if len(resolutions) > 1:
            header = ["k", "err_h", "eoc_h", "err_u", "eoc_u", "err_v", "eoc_v"]
            rows = [[n] + [x for c in "huv" for x in (errors[c][i], orders[c][i])] for i, n in enumerate(resolutions)]
        else:
            header = ["k", "err_h", "err_u", "err_v"]
            rows = [[resolutions[0]] + [errors[c][0] for c in "huv"]]
        write_table(out / "errors.csv", header, rows)
    return errors, orders


def kconv_ladder(cfg: RunConfig, resolutions: list[int], ref: int, out: Optional[Path] = None):
    """E1-E4 ladder of ``cfg.case`` on ``resolutions`` against a finer self-run."""
    _check_ladder(resolutions, ref, 3)
    if get_case(cfg.case).strip:
        raise ConfigError("the K-convergence ladder needs a 2D case")
    target = resolutions[0]
    runs = []
    cell_area = None
    for n in resolutions + [ref]:
        grid, state, bath, params = _setup(cfg, nx=n)
        final = simulate(grid, state, bath, params, cfg.t_final, tol=cfg.tol).state
        runs.append(Snapshot.from_state(final))
        if n == target:
            cell_area = grid.cell_area
        if out is not None:
            write_snapshot_csv(out / f"final_{n}.csv", grid, final, bath, params)
    rows = error_ladder(runs[:-1], SolutionEnsemble([runs[-1]], target), cell_area)
    if out is not None:
        write_table(out / "ladder.csv", ["k", "component", "E1", "E2", "E3", "E4"],
                    [[r.k, r.component, r.E1, r.E2, r.E3, r.E4] for r in rows])
    return rows


def _guard(fn):
    """Map failures onto the documented exit codes."""
    try:
        fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NumericalFailure as exc:
        click.echo(f"numerical failure ({type(exc).__name__}): {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


@click.group()
@click.version_option(__version__, prog_name="rswfv")
def main():
    """Rotating shallow water finite volume solver."""


@main.command()
@click.option("--case", "case", default=None, help="catalogue case name")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--bc", type=click.Choice(["periodic", "extrapolation", "equilibrium_hold"]), default=None)
@click.option("--tfinal", "t_final", type=float, default=None)
@click.option("--out", default=None, help="output directory")
@click.option("--format", "formats", default=None, help="comma separated subset of csv,vtk")
def run(case, config_path, nx, ny, bc, t_final, out, formats):
    """Run one case and write snapshots, ledger and manifest."""

    def go():
        cfg = make_config(config_path, case=case, nx=nx, ny=ny, bc=bc, t_final=t_final, out=out,
                          formats=formats.split(",") if formats else None)
        target = output_dir(cfg.out, f"runs/{cfg.case}")
        grid, result = execute(cfg, target)
        click.echo(f"{cfg.case}: {result.steps} steps to t = {result.state.t:.6g}, output in {target}")

    _guard(go)


@main.command()
@click.option("--case", "case", default=None)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--resolutions", required=True, help="e.g. 16,32,64,128")
@click.option("--ref", type=int, required=True, help="reference resolution")
@click.option("--tfinal", "t_final", type=float, default=None)
@click.option("--out", default=None)
def sweep(case, config_path, resolutions, ref, t_final, out):
    """Resolution sweep with errors and orders against a finer self-run."""

    def go():
        cfg = make_config(config_path, case=case, t_final=t_final, out=out)
        res = _parse_list(resolutions)
        target = output_dir(cfg.out, f"runs/{cfg.case}_sweep")
        errors, orders = sweep_errors(cfg, res, ref, target)
        for i, n in enumerate(res):
            parts = [f"{c}: {errors[c][i]:.4e}" + (f" ({orders[c][i]:.2f})" if orders[c] and i else "") for c in "huv"]
            click.echo(f"{n:6d}  " + "  ".join(parts))

    _guard(go)


@main.command()
@click.option("--case", "case", default="vortex_pair", show_default=True)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--resolutions", required=True, help="e.g. 32,64,128")
@click.option("--ref", type=int, default=None, help="reference resolution (default: twice the finest)")
@click.option("--tfinal", "t_final", type=float, default=None)
@click.option("--out", default=None)
def kconv(case, config_path, resolutions, ref, t_final, out):
    """K-convergence ladder (E1-E4) over successive resolutions."""

    def go():
        cfg = make_config(config_path, case=case, t_final=t_final, out=out)
        res = _parse_list(resolutions)
        target = output_dir(cfg.out, f"runs/{cfg.case}_kconv")
        rows = kconv_ladder(cfg, res, ref if ref else 2 * max(res), target)
        for r in rows:
            click.echo(f"{r.k:6d} {r.component:>5s}  E1={r.E1:.4e} E2={r.E2:.4e} E3={r.E3:.4e} E4={r.E4:.4e}")

    _guard(go)


@main.command("list-cases")
def list_cases():
    """Print the case catalogue with its default parameters."""
    for name, spec in CATALOG.items():
        res = f"{spec.resolution}" if spec.strip else f"{spec.resolution}x{spec.resolution}"
        extras = f" alpha={spec.alpha:g}" if spec.alpha else ""
        click.echo(
            f"{name:24s} {res:>9s}  bc={spec.bc.value:16s} g={spec.g:g} omega={spec.omega:g} "
            f"T={spec.t_final:g}{extras}  {spec.description}"
        )


if __name__ == "__main__":
    main()
