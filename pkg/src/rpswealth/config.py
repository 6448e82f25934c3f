"""Experiment configuration: flat "key = value" files with dotted sections.

Example::

    model.eta = 3
    model.h = 0.5
    grid.m = 32
    grid.K = 200
    init.kind = square
    init.k0 = 1
    solver.t_end = 1e5
    outputs.dir = out

Unknown keys are rejected.  Every value has a default, so an empty file
is a valid configuration; `resolved_items` lists the fully resolved set
for embedding in report headers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .harris import HarrisInputs
from .measures import (
    ExponentialDensity,
    GridMeasure,
    GridSpec,
    ModelParams,
    SquareDensity,
    bin_atoms,
    ingest_density,
)
from .dynamics import SolverConfig

__all__ = ["ExperimentConfig", "parse_config", "build_initial_measure"]

_DEFAULT_T_VALUES = (0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass
class ExperimentConfig:
    model: ModelParams = field(default_factory=ModelParams)
    grid: GridSpec = field(default_factory=lambda: GridSpec(h=0.5, m=32, K=200))
    solver: SolverConfig = field(default_factory=SolverConfig)
    init_kind: str = "square"
    init_k0: int = 1
    init_alpha: float = 1.0
    init_atoms: tuple = ()
    init_path: str = ""
    init_rule: str = "simpson"
    harris: HarrisInputs = field(default_factory=HarrisInputs)
    harris_T_values: tuple = _DEFAULT_T_VALUES
    mc_n: int = 10000
    mc_replicates: int = 16
    mc_seed: int = 0
    mc_t_end: float = 1.0
    outputs_dir: str = "out"

    def resolved_items(self) -> list[tuple[str, str]]:
        items = [
            ("model.eta", self.model.eta),
            ("model.h", self.model.h),
            ("grid.m", self.grid.m),
            ("grid.K", self.grid.K),
            ("solver.dt0", self.solver.dt0),
            ("solver.theta_max", self.solver.theta_max),
            ("solver.t_end", self.solver.t_end),
            ("solver.stop_frac", self.solver.stop_frac),
            ("solver.snapshot_every", self.solver.snapshot_every),
            ("init.kind", self.init_kind),
            ("init.rule", self.init_rule),
            ("harris.sigma", self.harris.sigma),
            ("harris.A_level", self.harris.A_level),
            ("harris.C_V", self.harris.C_V),
            ("harris.omega_V", self.harris.omega_V),
            ("harris.T_values", ",".join(repr(t) for t in self.harris_T_values)),
            ("mc.n", self.mc_n),
            ("mc.replicates", self.mc_replicates),
            ("mc.seed", self.mc_seed),
            ("mc.t_end", self.mc_t_end),
            ("outputs.dir", self.outputs_dir),
        ]
        if self.init_kind == "square":
            items.insert(10, ("init.k0", self.init_k0))
        elif self.init_kind == "exponential":
            items.insert(10, ("init.alpha", self.init_alpha))
        elif self.init_kind == "atoms":
            items.insert(10, ("init.atoms", "; ".join(f"{y}:{w}" for y, w in self.init_atoms)))
        elif self.init_kind == "csv":
            items.insert(10, ("init.path", self.init_path))
        return [(k, str(v)) for k, v in items]


def _parse_atoms(text: str):
    atoms = []
    for chunk in text.replace(";", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"atom entry {chunk!r} must look like location:weight")
        y, _, w = chunk.partition(":")
        atoms.append((float(y), float(w)))
    if not atoms:
        raise ConfigError("init.atoms is empty")
    return tuple(atoms)


_FLOAT_KEYS = {
    "model.eta", "model.h", "solver.dt0", "solver.theta_max", "solver.t_end",
    "solver.stop_frac", "init.alpha", "harris.sigma", "harris.A_level",
    "harris.C_V", "harris.omega_V", "mc.t_end",
}
_INT_KEYS = {"grid.m", "grid.K", "solver.snapshot_every", "init.k0",
             "mc.n", "mc.replicates", "mc.seed"}
_STR_KEYS = {"init.kind", "init.path", "init.rule", "outputs.dir"}
_LIST_KEYS = {"harris.T_values", "init.atoms"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS


def parse_config(path) -> ExperimentConfig:
    """Parse a flat key=value file into a validated ExperimentConfig."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line.strip()!r}")
            key, _, val = body.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _ALL_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = val

    def take(key, conv, default):
        if key not in raw:
            return default
        try:
            return conv(raw[key])
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from exc

    eta = take("model.eta", float, 3.0)
    h = take("model.h", float, 0.5)
    model = ModelParams(eta=eta, h=h)
    grid = GridSpec(h=h, m=take("grid.m", int, 32), K=take("grid.K", int, 200))
    solver = SolverConfig(
        dt0=take("solver.dt0", float, 1e-3),
        theta_max=take("solver.theta_max", float, 0.5),
        t_end=take("solver.t_end", float, 1e4),
        stop_frac=take("solver.stop_frac", float, 0.05),
        snapshot_every=take("solver.snapshot_every", int, 100),
    )
    kind = take("init.kind", str, "square")
    if kind not in ("square", "exponential", "atoms", "csv"):
        raise ConfigError(f"init.kind must be square|exponential|atoms|csv, got {kind!r}")
    rule = take("init.rule", str, "simpson")
    if rule not in ("midpoint", "simpson"):
        raise ConfigError(f"init.rule must be midpoint|simpson, got {rule!r}")
    hi = HarrisInputs(
        sigma=take("harris.sigma", float, 2.0),
        A_level=take("harris.A_level", float, 3.0),
        C_V=take("harris.C_V", float, 1.0),
        omega_V=take("harris.omega_V", float, 0.0),
    )
    t_values = take(
        "harris.T_values",
        lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
        _DEFAULT_T_VALUES,
    )
    return ExperimentConfig(
        model=model,
        grid=grid,
        solver=solver,
        init_kind=kind,
        init_k0=take("init.k0", int, 1),
        init_alpha=take("init.alpha", float, 1.0),
        init_atoms=take("init.atoms", _parse_atoms, ()),
        init_path=take("init.path", str, ""),
        init_rule=rule,
        harris=hi,
        harris_T_values=t_values,
        mc_n=take("mc.n", int, 10000),
        mc_replicates=take("mc.replicates", int, 16),
        mc_seed=take("mc.seed", int, 0),
        mc_t_end=take("mc.t_end", float, 1.0),
        outputs_dir=take("outputs.dir", str, "out"),
    )


def build_initial_measure(cfg: ExperimentConfig) -> GridMeasure:
    """Materialize the configured initial condition on the configured grid."""
    if cfg.init_kind == "square":
        return ingest_density(SquareDensity(cfg.init_k0), cfg.grid, cfg.init_rule)
    if cfg.init_kind == "exponential":
        return ingest_density(ExponentialDensity(cfg.init_alpha), cfg.grid, cfg.init_rule)
    if cfg.init_kind == "atoms":
        if not cfg.init_atoms:
            raise ConfigError("init.kind = atoms needs init.atoms entries")
        return bin_atoms(cfg.init_atoms, cfg.grid)
    if cfg.init_kind == "csv":
        from .io import read_measure_csv

        if not cfg.init_path:
            raise ConfigError("init.kind = csv needs init.path")
        mu = read_measure_csv(cfg.init_path)
        if mu.spec != cfg.grid:
            raise ConfigError(
                f"measure grid {mu.spec} in {cfg.init_path} differs from configured grid {cfg.grid}"
            )
        return mu
    raise ConfigError(f"unknown init.kind {cfg.init_kind!r}")
