"""Simulation driver: configuration, presets, the per-step loop
(mesh step, predictor, corrector), snapshots, and timing artifacts.
"""

from __future__ import annotations

import time as _time
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

from .adaptation import MeshingParams, advance_mesh, build_monitor, two_level_cycle
from .errors import ConfigError
from .grid import (
    MeshMotion,
    MovingMesh,
    ReferenceGrid,
    jacobian_field,
    refine_uniform,
    uniform_mesh,
)
from .io import (
    read_manifest,
    write_cutoff_log,
    write_manifest,
    write_snapshot_csv,
    write_timing_csv,
    write_vtk,
)
from .physics import (
    PRESET_NAMES,
    BoundarySpec,
    MaterialMap,
    PhysicsParams,
    StateFields,
    initial_state,
    material_map_for_preset,
)
from .linalg import FactorizationCache
from .stepping import CutoffPolicy, StepSchedule, apply_cutoff, predictor_corrector_step

__all__ = [
    "SimulationConfig",
    "RunArtifacts",
    "preset",
    "parse_config_file",
    "run_simulation",
    "write_snapshot",
    "timing_report",
]

_PRESET_SETTINGS = {
    "example1": dict(
        bc_kind="marshak",
        t_end=3.0,
        snapshot_times=(1.0, 1.5, 2.0, 2.4, 2.8, 3.0),
    ),
    "example2": dict(
        bc_kind="marshak",
        t_end=5.0,
        snapshot_times=(1.0, 1.5, 2.0, 2.4, 2.8, 3.0, 3.5, 4.0, 5.0),
    ),
    "example3": dict(
        bc_kind="insulated",
        t_end=3.0,
        snapshot_times=(0.5, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0, 2.5, 3.0),
    ),
}


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one run needs; build via preset() and dataclasses.replace."""

    preset: str
    material: MaterialMap
    bc_kind: str
    M: int = 41
    N: int = 41
    mesh_mode: str = "moving"  # or "fixed-uniform"
    two_level: bool = False
    refine_factor: int = 1
    coarse_M: int = 0
    coarse_N: int = 0
    kappa: float = 0.01
    tau: float = 0.01
    theta: float = 0.1
    smoothing_sweeps: int = 4
    mesh_substeps: int = 1
    pre_adapt_cycles: int = 5
    dt: float = 1e-3
    dt_init: float = 1e-5
    ramp_steps: int = 20
    ramp: bool = True
    t_end: float = 3.0
    snapshot_times: tuple = ()
    out_dir: str = "run_out"

    def __post_init__(self):
        if self.mesh_mode not in ("moving", "fixed-uniform"):
            raise ConfigError(f"unknown mesh mode {self.mesh_mode!r}")
        if self.t_end < 0.0:
            raise ConfigError("t_end must be nonnegative")
        if self.two_level:
            if self.refine_factor < 1 or self.coarse_M < 3 or self.coarse_N < 3:
                raise ConfigError("two-level runs need a factor and a coarse mesh")
            r = self.refine_factor
            if self.M != r * (self.coarse_M - 1) + 1 or self.N != r * (self.coarse_N - 1) + 1:
                raise ConfigError(
                    f"fine mesh {self.M}x{self.N} is not the {r}-fold refinement of "
                    f"{self.coarse_M}x{self.coarse_N}"
                )

    @property
    def mode_label(self) -> str:
        if self.mesh_mode == "fixed-uniform":
            return "fixed-mesh"
        return "two-level-mm" if self.two_level else "one-level-mm"


def preset(name: str, **overrides) -> SimulationConfig:
    """Configuration for one of the built-in experiments."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    base = dict(_PRESET_SETTINGS[name])
    cfg = SimulationConfig(preset=name, material=material_map_for_preset(name), **base)
    return replace(cfg, **overrides) if overrides else cfg


def _parse_mesh_size(text: str) -> tuple[int, int]:
    try:
        m, n = text.lower().split("x")
        return int(m), int(n)
    except Exception as exc:
        raise ConfigError(f"mesh size must look like 41x41, got {text!r}") from exc


_CONFIG_KEYS = {
    "preset": str,
    "mesh": _parse_mesh_size,
    "coarse": _parse_mesh_size,
    "two_level_factor": int,
    "mesh_mode": str,
    "t_end": float,
    "dt": float,
    "dt_init": float,
    "ramp_steps": int,
    "ramp": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "tau": float,
    "theta": float,
    "smoothing_sweeps": int,
    "mesh_substeps": int,
    "pre_adapt_cycles": int,
    "snapshot_times": lambda s: tuple(float(v) for v in s.split(",") if v.strip()),
    "out_dir": str,
    "kappa": float,
    "bc": str,
    "material": str,
    "background_z": float,
}


def parse_config_file(path) -> dict:
    """Flat key = value file; '#' starts a comment; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected KEY = VALUE, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](val)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return values


def _parse_material(text: str, background: float) -> MaterialMap:
    regions = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        nums = [float(v) for v in part.split(",")]
        if len(nums) != 5:
            raise ConfigError(f"material region needs x0,x1,y0,y1,z, got {part!r}")
        regions.append(tuple(nums))
    return MaterialMap(tuple(regions), background)


def config_from_sources(file_values: dict | None = None, **flag_overrides) -> SimulationConfig:
    """Build a config: preset defaults, then file values, then explicit flags."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in flag_overrides.items() if v is not None})
    name = merged.pop("preset", None)
    if name is None:
        raise ConfigError("a preset must be given (preset = example1|example2|example3)")
    cfg = preset(name)
    updates = {}
    if "mesh" in merged:
        updates["M"], updates["N"] = merged.pop("mesh")
    if "coarse" in merged:
        updates["coarse_M"], updates["coarse_N"] = merged.pop("coarse")
    if "two_level_factor" in merged:
        r = merged.pop("two_level_factor")
        updates["two_level"] = True
        updates["refine_factor"] = r
    if "bc" in merged:
        updates["bc_kind"] = merged.pop("bc")
    background = merged.pop("background_z", 1.0)
    if "material" in merged:
        updates["material"] = _parse_material(merged.pop("material"), background)
    updates.update(merged)
    if updates.get("two_level") and "M" not in updates and "coarse_M" in updates:
        r = updates["refine_factor"]
        updates["M"] = r * (updates["coarse_M"] - 1) + 1
        updates["N"] = r * (updates["coarse_N"] - 1) + 1
    return replace(cfg, **updates)


@dataclass
class RunArtifacts:
    """Everything a run leaves behind, in memory and on disk."""

    config: SimulationConfig
    times: list = field(default_factory=list)
    snapshot_paths: list = field(default_factory=list)
    cutoff_events: list = field(default_factory=list)
    step_records: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    out_dir: str = ""
    manifest_path: str = ""

    def manifest(self) -> dict:
        return {
            "preset": self.config.preset,
            "mode": self.config.mode_label,
            "fine_mesh": f"{self.config.M}x{self.config.N}",
            "coarse_mesh": (
                f"{self.config.coarse_M}x{self.config.coarse_N}"
                if self.config.two_level
                else "n/a"
            ),
            "t_end": self.config.t_end,
            "dt": self.config.dt,
            "times": list(self.times),
            "snapshots": [list(p) for p in self.snapshot_paths],
            "cutoff_log": str(Path(self.out_dir) / "cutoff_log.csv"),
            "timings": dict(self.timings),
        }


def write_snapshot(state: StateFields, mesh: MovingMesh, t: float, directory) -> tuple[str, str]:
    """Write one snapshot as CSV and VTK; file names embed the time."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"snapshot_t{t:.4f}"
    csv_path = write_snapshot_csv(mesh, state.E, state.T, directory / f"{stem}.csv")
    vtk_path = write_vtk(mesh, {"E": state.E, "T": state.T}, directory / f"{stem}.vtk")
    return str(csv_path), str(vtk_path)


def _interp_state(s0: StateFields, s1: StateFields, t: float) -> StateFields:
    th = (t - s0.t) / (s1.t - s0.t)
    return StateFields((1 - th) * s0.E + th * s1.E, (1 - th) * s0.T + th * s1.T, t)


def _interp_mesh(m0: MovingMesh, m1: MovingMesh, t0: float, t1: float, t: float) -> MovingMesh:
    th = (t - t0) / (t1 - t0)
    return MovingMesh(m0.grid, (1 - th) * m0.x + th * m1.x, (1 - th) * m0.y + th * m1.y, t)


def run_simulation(config: SimulationConfig, hooks=None) -> RunArtifacts:
    """Run one experiment: init, (optional) mesh pre-adaptation, then the
    three-phase loop of mesh step, predictor, and corrector, with snapshots
    at the scheduled times (linear interpolation inside the covering step).
    """
    wall_start = _time.perf_counter()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timers = {"mesh": 0.0, "assembly": 0.0, "solve": 0.0, "io": 0.0}

    mesh_params = MeshingParams(
        config.tau, config.theta, config.smoothing_sweeps, config.mesh_substeps
    )
    phys = PhysicsParams(config.kappa)
    bc = BoundarySpec(config.bc_kind)
    moving = config.mesh_mode == "moving"

    if config.two_level and moving:
        coarse = uniform_mesh(ReferenceGrid(config.coarse_M, config.coarse_N))
        mesh = (
            refine_uniform(coarse, config.refine_factor)
            if config.refine_factor > 1
            else coarse
        )
    else:
        coarse = None
        mesh = uniform_mesh(ReferenceGrid(config.M, config.N))

    policy = CutoffPolicy.for_grid(config.M, config.N)
    state = apply_cutoff(initial_state(config.preset, mesh), policy, step=0)
    solver_cache = FactorizationCache()

    if moving and config.pre_adapt_cycles > 0:
        tic = _time.perf_counter()
        for _ in range(config.pre_adapt_cycles):
            if coarse is not None:
                coarse, mesh = two_level_cycle(
                    coarse, state.E, config.refine_factor, mesh_params, config.dt
                )
            else:
                mon = build_monitor(state.E, mesh, mesh_params)
                mesh = advance_mesh(mesh, mon, mesh_params, config.dt)
            state = apply_cutoff(initial_state(config.preset, mesh), policy, step=0)
        timers["mesh"] += _time.perf_counter() - tic

    artifacts = RunArtifacts(config=config, out_dir=str(out_dir))

    def emit(s: StateFields, msh: MovingMesh, t: float):
        tic = _time.perf_counter()
        paths = write_snapshot(s, msh, t, out_dir)
        timers["io"] += _time.perf_counter() - tic
        artifacts.times.append(t)
        artifacts.snapshot_paths.append(paths)

    emit(state, mesh, 0.0)
    pending = deque(sorted(t for t in config.snapshot_times if 0.0 < t <= config.t_end))

    schedule = StepSchedule(
        config.t_end, config.dt, config.dt_init, config.ramp_steps, config.ramp
    ).steps()

    for k, dt in enumerate(schedule, start=1):
        t_n = state.t
        t_np1 = t_n + dt
        old_mesh = mesh.with_time(t_n)

        if moving:
            tic = _time.perf_counter()
            if coarse is not None:
                coarse, new_mesh = two_level_cycle(
                    coarse, state.E, config.refine_factor, mesh_params, dt
                )
            else:
                mon = build_monitor(state.E, old_mesh, mesh_params)
                new_mesh = advance_mesh(old_mesh, mon, mesh_params, dt)
            timers["mesh"] += _time.perf_counter() - tic
        else:
            new_mesh = old_mesh
        if hooks is not None and hasattr(hooks, "on_mesh_step"):
            hooks.on_mesh_step(k, state, old_mesh, new_mesh)

        motion = MeshMotion(old_mesh, new_mesh.with_time(t_np1), dt)
        E, T = predictor_corrector_step(
            state.E, state.T, motion, config.material, bc, dt, policy, phys,
            step=k, timers=timers, solver_cache=solver_cache,
        )
        new_state = StateFields(E, T, t_np1)
        if hooks is not None and hasattr(hooks, "on_physics_step"):
            hooks.on_physics_step(k, state, new_state, motion)

        artifacts.step_records.append(
            {
                "step": k,
                "t": t_np1,
                "dt": dt,
                "min_E": float(E.min()),
                "min_T": float(T.min()),
                "min_jac": float(jacobian_field(new_mesh).min()),
                "clipped": sum(e.count for e in policy.events_at_step(k)),
            }
        )

        while pending and pending[0] <= t_np1 + 1e-12:
            ts = pending.popleft()
            if abs(ts - t_np1) <= 1e-12:
                emit(new_state, new_mesh.with_time(ts), ts)
            else:
                s = _interp_state(state, new_state, ts)
                msh = _interp_mesh(old_mesh, new_mesh, t_n, t_np1, ts)
                emit(s, msh, ts)

        state, mesh = new_state, new_mesh

    timers["total"] = _time.perf_counter() - wall_start
    artifacts.timings = timers
    artifacts.cutoff_events = list(policy.events)

    write_cutoff_log(policy.events, out_dir / "cutoff_log.csv")
    artifacts.manifest_path = str(write_manifest(artifacts.manifest(), out_dir / "manifest.json"))
    return artifacts


def timing_report(runs, path=None) -> str:
    """Timing CSV over one or more runs (RunArtifacts or manifest dicts).

    The ratio column compares each run to the fixed-mesh run with the same
    fine mesh, when one is present; fixed-mesh rows have ratio 1.
    """
    rows = []
    entries = []
    for r in runs:
        man = r.manifest() if isinstance(r, RunArtifacts) else dict(r)
        entries.append(man)
    fixed_totals = {
        e["fine_mesh"]: e["timings"]["total"]
        for e in entries
        if e["mode"] == "fixed-mesh"
    }
    for e in entries:
        total = e["timings"]["total"]
        base = fixed_totals.get(e["fine_mesh"])
        ratio = f"{total / base:.2f}" if base else "n/a"
        rows.append(
            {
                "mode": e["mode"],
                "fine_mesh": e["fine_mesh"],
                "coarse_mesh": e["coarse_mesh"],
                "total_seconds": total,
                "ratio": ratio,
            }
        )
    return write_timing_csv(rows, path)


def load_run_manifest(path) -> dict:
    return read_manifest(path)
