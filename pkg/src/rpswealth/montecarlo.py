"""Agent-based simulation of the microscopic exchange game.

A finite population of agents meets pairwise at total rate eta*N/2.  A
drawn pair plays only if both members hold at least h; the outcome is a
uniform three-way draw between "first wins", "second wins" and a tie, so
each wealthy agent gains and loses at per-capita rate (eta/3) times the
fraction of wealthy partners, matching the mean-field coefficient.
Used to cross-check the grid solver empirically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .measures import GridMeasure, GridSpec, ModelParams, midpoints
from .dynamics import SolverConfig, solve_nonlinear

__all__ = [
    "AgentPopulation",
    "mc_step",
    "run_until",
    "empirical_measure",
    "mc_compare",
    "mc_scaling",
    "MCReport",
]

_CHUNK = 4096  # events drawn per RNG batch


@dataclass
class AgentPopulation:
    """Mutable agent state: wealths, model parameters, RNG, current time."""

    wealths: np.ndarray
    params: ModelParams
    rng: np.random.Generator
    t: float = 0.0

    def __post_init__(self):
        self.wealths = np.asarray(self.wealths, dtype=float)
        if self.wealths.ndim != 1:
            raise ConfigError("wealths must be a 1-d array")
        if np.any(self.wealths < 0):
            raise ConfigError("agent wealths must be nonnegative")

    @classmethod
    def sample_from(cls, init: GridMeasure, N: int, params: ModelParams,
                    seed: int) -> "AgentPopulation":
        """Draw N agents i.i.d. from a probability measure by inverse CDF
        over cells; each agent starts at its cell midpoint."""
        if N < 2:
            raise ConfigError(f"need at least 2 agents, got {N}")
        w = init.w.ravel()
        mass = w.sum()
        if np.any(w < 0) or mass <= 0:
            raise ConfigError("initial measure must be nonnegative with positive mass")
        if abs(mass - 1.0) > 1e-6:
            raise ConfigError(f"initial measure mass {mass:.6g} is not 1")
        rng = np.random.default_rng(seed)
        p = w / mass
        idx = rng.choice(w.size, size=N, p=p)
        ys = midpoints(init.spec).ravel()[idx]
        return cls(wealths=ys.copy(), params=params, rng=rng, t=0.0)


def _apply_events(pop: AgentPopulation, n_events: int, t_stop: float | None) -> int:
    """Apply up to n_events exchange events, stopping before t_stop.

    Returns the number of events actually applied.  Draws are batched;
    an event drawn beyond t_stop is discarded and pop.t is clamped.
    """
    N = pop.wealths.size
    h = pop.params.h
    rate = pop.params.eta * N / 2.0
    applied = 0
    while applied < n_events:
        batch = min(_CHUNK, n_events - applied)
        holds = pop.rng.exponential(1.0 / rate, size=batch)
        first = pop.rng.integers(0, N, size=batch)
        shift = pop.rng.integers(1, N, size=batch)
        second = (first + shift) % N  # uniform over pairs, never self
        outcome = pop.rng.integers(0, 3, size=batch)  # 0: first wins, 1: second wins, 2: draw
        wl = pop.wealths
        for i in range(batch):
            t_next = pop.t + holds[i]
            if t_stop is not None and t_next > t_stop:
                pop.t = t_stop
                return applied
            pop.t = t_next
            a, b = first[i], second[i]
            if wl[a] >= h and wl[b] >= h and outcome[i] != 2:
                if outcome[i] == 0:
                    wl[a] += h
                    wl[b] -= h
                else:
                    wl[a] -= h
                    wl[b] += h
            applied += 1
    return applied


def mc_step(pop: AgentPopulation) -> AgentPopulation:
    """Advance the population by exactly one pair-encounter event."""
    if pop.wealths.size < 2:
        raise ConfigError("mc_step needs at least 2 agents")
    _apply_events(pop, 1, t_stop=None)
    return pop


def run_until(pop: AgentPopulation, t_end: float) -> AgentPopulation:
    """Advance the population to time t_end (state of the last event before it)."""
    while pop.t < t_end:
        if _apply_events(pop, _CHUNK, t_stop=t_end) == 0:
            break
    return pop


def empirical_measure(pop: AgentPopulation, spec: GridSpec) -> GridMeasure:
    """Bin agents to the grid, 1/N mass each; total mass is exactly 1."""
    if abs(spec.h - pop.params.h) > 1e-12 * pop.params.h:
        raise ConfigError("grid quantum differs from the population quantum")
    N = pop.wealths.size
    k = np.floor(pop.wealths / spec.h).astype(int)
    over = k > spec.K
    if np.any(over):
        warnings.warn("agents beyond the grid were counted in the top level", stacklevel=2)
        k = np.minimum(k, spec.K)
    j = np.floor((pop.wealths - k * spec.h) / spec.delta).astype(int)
    j = np.clip(j, 0, spec.m - 1)
    counts = np.zeros(spec.shape, dtype=np.int64)
    np.add.at(counts, (j, k), 1)
    return GridMeasure(spec, counts / N)


@dataclass
class MCReport:
    """Cross-check result: per-replicate TV distances and their summary."""

    N: int
    t_end: float
    seed: int
    distances: np.ndarray
    mean: float
    stderr: float
    mean_measure_distance: float

    def rows(self) -> list[tuple]:
        out = [(str(i), self.t_end, d) for i, d in enumerate(self.distances)]
        out.append(("mean", self.t_end, self.mean))
        out.append(("stderr", self.t_end, self.stderr))
        return out


def mc_compare(
    init: GridMeasure,
    params: ModelParams,
    N: int,
    t_end: float,
    replicates: int,
    seed: int,
    dt0: float = 1e-5,
) -> MCReport:
    """Run replicate agent simulations from init and compare to the grid solver.

    Each replicate r uses seed + r, samples N agents from init, runs to
    t_end and bins; the TV distance to the deterministic solution at
    t_end is recorded per replicate, together with the distance of the
    replicate-averaged measure.  The statistical error is O(N^{-1/2}).
    """
    if replicates < 1:
        raise ConfigError(f"need replicates >= 1, got {replicates}")
    config = SolverConfig(dt0=dt0, theta_max=0.5, t_end=t_end,
                          stop_frac=0.5, snapshot_every=10**9)
    pde = solve_nonlinear(init, params, config, limit=None).final_state

    dists = np.empty(replicates)
    avg_w = np.zeros(init.spec.shape)
    for r in range(replicates):
        pop = AgentPopulation.sample_from(init, N, params, seed + r)
        run_until(pop, t_end)
        emp = empirical_measure(pop, init.spec)
        dists[r] = float(np.abs(emp.w - pde.w).sum())
        avg_w += emp.w / replicates
    mean = float(dists.mean())
    stderr = float(dists.std(ddof=1) / np.sqrt(replicates)) if replicates > 1 else 0.0
    mean_meas = float(np.abs(avg_w - pde.w).sum())
    return MCReport(N=N, t_end=t_end, seed=seed, distances=dists,
                    mean=mean, stderr=stderr, mean_measure_distance=mean_meas)


def mc_scaling(
    init: GridMeasure,
    params: ModelParams,
    Ns,
    t_end: float,
    replicates: int,
    seed: int,
    dt0: float = 1e-5,
) -> tuple[np.ndarray, float]:
    """Mean TV distance per population size and the log-log slope fit.

    For independent sampling error the slope is -1/2.
    """
    means = np.array([
        mc_compare(init, params, int(n), t_end, replicates, seed + 1000 * i, dt0).mean
        for i, n in enumerate(Ns)
    ])
    slope = float(np.polyfit(np.log(np.asarray(Ns, dtype=float)), np.log(means), 1)[0])
    return means, slope
