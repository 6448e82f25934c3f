"""Explicit Euler evolution of the wealth-exchange equation on the grid.

The nonlinear equation advances each wealth class independently: per
offset j the level masses follow a birth-death stencil gated below h,
with the common rate c(t) = (eta/3) * B(t), B(t) the mass on [h, inf).
The rescaling clock theta(t) = (eta/3) * integral of B converts the
nonlinear flow into the unit-rate linear one, which `solve_linear`
evolves directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .measures import (
    GridMeasure,
    GridSpec,
    ModelParams,
    mass_above_h,
    total_mass,
    v_weights,
)

__all__ = [
    "SolverConfig",
    "Trajectory",
    "apply_generator",
    "adaptive_dt",
    "step_euler",
    "solve_nonlinear",
    "solve_linear",
    "theta_lower_bound",
]

DT_CAP_FACTOR = 100.0  # dt never exceeds 100 * dt0
TOP_MASS_GUARD = 1e-10  # relative top-level occupancy that triggers a warning


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping and stopping controls for the nonlinear solver."""

    dt0: float = 1e-3
    theta_max: float = 0.5  # fraction of the positivity limit a step may use
    t_end: float = 1e4
    stop_frac: float = 0.05  # stop once the V-distance to the limit falls below this fraction
    snapshot_every: int = 100

    def __post_init__(self):
        if not (self.dt0 > 0):
            raise ConfigError(f"dt0 must be positive, got {self.dt0}")
        if not (0 < self.theta_max < 1):
            raise ConfigError(f"theta_max must lie in (0,1), got {self.theta_max}")
        if not (0 < self.stop_frac < 1):
            raise ConfigError(f"stop_frac must lie in (0,1), got {self.stop_frac}")
        if not (self.t_end > 0):
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.snapshot_every < 1:
            raise ConfigError(f"snapshot_every must be >= 1, got {self.snapshot_every}")


@dataclass
class Trajectory:
    """Time series of a run: per-step scalars plus strided state snapshots.

    times, B, theta have one entry per step boundary (including t=0).
    snapshots[i] is the state at step snapshot_steps[i]; tv_dist / v_dist
    are distances to the supplied limit at those snapshots (None when the
    run had no limit).
    """

    spec: GridSpec
    times: np.ndarray
    B: np.ndarray
    theta: np.ndarray
    snapshot_steps: np.ndarray
    snapshots: list[GridMeasure]
    tv_dist: np.ndarray | None = None
    v_dist: np.ndarray | None = None
    truncated: bool = False
    stopped_early: bool = False

    @property
    def snapshot_times(self) -> np.ndarray:
        return self.times[self.snapshot_steps]

    @property
    def snapshot_theta(self) -> np.ndarray:
        return self.theta[self.snapshot_steps]

    @property
    def final_state(self) -> GridMeasure:
        return self.snapshots[-1]

    def rate_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, B) pairs recorded at every step, for driving the dual solver."""
        return self.times, self.B


def _generator_into(w: np.ndarray, c: float, out: np.ndarray) -> np.ndarray:
    """Time derivative of the mass array at rate c, written into out.

    Down-jumps act on every level k >= 1; up-jumps on 1 <= k <= K-1 (the
    top level is reflecting, which keeps the column sums exactly zero).
    Level 0 is absorbing: mass there neither moves nor plays.
    """
    out[:] = 0.0
    mov = w[:, 1:]
    out[:, :-1] += mov  # arrivals one level down
    out[:, 1:] -= mov  # departures downward
    upk = w[:, 1:-1]
    if upk.size:
        out[:, 2:] += upk  # arrivals one level up
        out[:, 1:-1] -= upk  # departures upward
    out *= c
    return out


def apply_generator(mu: GridMeasure, c: float) -> GridMeasure:
    """Generator applied to a measure: the time derivative at rate c."""
    out = np.empty_like(mu.w)
    _generator_into(mu.w, c, out)
    return GridMeasure(mu.spec, out)


def adaptive_dt(B: float, params: ModelParams, config: SolverConfig) -> float:
    """Largest positivity-safe step: min(100*dt0, theta_max*3/(2*eta*B)).

    Guarantees 1 - (2*eta/3)*B*dt >= 1 - theta_max > 0, so an Euler step
    keeps nonnegative data nonnegative.  The step grows as B vanishes,
    capped at 100*dt0.
    """
    if B < 0:
        raise ConfigError(f"adaptive_dt needs B >= 0, got {B}")
    cap = DT_CAP_FACTOR * config.dt0
    if B == 0.0:
        return cap
    return min(cap, config.theta_max * 3.0 / (2.0 * params.eta * B))


def step_euler(mu: GridMeasure, c: float, dt: float) -> GridMeasure:
    """One explicit Euler step mu + dt * generator(mu, c)."""
    out = np.empty_like(mu.w)
    _generator_into(mu.w, c, out)
    return GridMeasure(mu.spec, mu.w + dt * out)


def theta_lower_bound(t: float, B0: float, params: ModelParams) -> float:
    """Guaranteed lower bound log(1 + eta*B0*t/3) on the rescaling clock."""
    if B0 < 0 or t < 0:
        raise ConfigError("theta_lower_bound needs t >= 0 and B0 >= 0")
    return float(np.log1p(params.eta * B0 * t / 3.0))


def _weighted_dist(w, w_lim, Vw):
    return float((Vw * np.abs(w - w_lim)).sum())


def solve_nonlinear(
    mu0: GridMeasure,
    params: ModelParams,
    config: SolverConfig,
    limit: GridMeasure | None = None,
) -> Trajectory:
    """Evolve the nonlinear equation from mu0 with adaptive Euler steps.

    Each iteration measures B = mass above h, takes the positivity-safe
    step, and accumulates theta with the left-endpoint rule.  When a
    limit measure is given, the run stops as soon as the V-distance to it
    falls to stop_frac of its initial value; otherwise it runs to t_end.
    Scalars (t, B, theta) are recorded every step, state snapshots every
    snapshot_every steps and at the final step.

    Raises NumericalError (with the step index) if the state goes
    non-finite.  Warns once if the top level ever holds more than 1e-10
    of the total mass, which signals grid truncation error.
    """
    spec = mu0.spec
    if abs(spec.h - params.h) > 1e-12 * params.h:
        raise ConfigError(f"grid quantum {spec.h} does not match model quantum {params.h}")
    if limit is not None and limit.spec != spec:
        raise ConfigError("limit measure lives on a different grid")

    w = mu0.w.copy()
    deriv = np.empty_like(w)
    Vw = v_weights(spec)
    eta3 = params.eta / 3.0
    mass0 = abs(total_mass(mu0))
    guard = TOP_MASS_GUARD * (mass0 if mass0 > 0 else 1.0)

    w_lim = limit.w if limit is not None else None
    stop_at = None
    if limit is not None:
        d0 = _weighted_dist(w, w_lim, Vw)
        stop_at = config.stop_frac * d0

    times = [0.0]
    Bs = [mass_above_h(mu0)]
    thetas = [0.0]
    snap_steps = [0]
    snapshots = [mu0]
    tv_list = [float(np.abs(w - w_lim).sum())] if limit is not None else None
    v_list = [_weighted_dist(w, w_lim, Vw)] if limit is not None else None

    t = 0.0
    theta = 0.0
    step = 0
    truncated = False
    stopped_early = False
    t_eps = 1e-12 * config.t_end

    while t < config.t_end - t_eps:
        if stop_at is not None and _weighted_dist(w, w_lim, Vw) <= stop_at:
            stopped_early = True
            break
        B = float(w[:, 1:].sum())
        dt = adaptive_dt(B, params, config)
        dt = min(dt, config.t_end - t)
        _generator_into(w, eta3 * B, deriv)
        w += dt * deriv
        t += dt
        theta += dt * eta3 * B
        step += 1
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"non-finite state at step {step}", step=step)
        if not truncated and float(w[:, -1].sum()) > guard:
            truncated = True
            warnings.warn(
                f"top-level mass exceeded {TOP_MASS_GUARD:g} of the total at step {step}; "
                "increase K to trust moments",
                stacklevel=2,
            )
        times.append(t)
        Bs.append(float(w[:, 1:].sum()))
        thetas.append(theta)
        if step % config.snapshot_every == 0:
            snap_steps.append(step)
            snapshots.append(GridMeasure(spec, w))
            if limit is not None:
                tv_list.append(float(np.abs(w - w_lim).sum()))
                v_list.append(_weighted_dist(w, w_lim, Vw))

    if snap_steps[-1] != step:
        snap_steps.append(step)
        snapshots.append(GridMeasure(spec, w))
        if limit is not None:
            tv_list.append(float(np.abs(w - w_lim).sum()))
            v_list.append(_weighted_dist(w, w_lim, Vw))

    return Trajectory(
        spec=spec,
        times=np.asarray(times),
        B=np.asarray(Bs),
        theta=np.asarray(thetas),
        snapshot_steps=np.asarray(snap_steps, dtype=int),
        snapshots=snapshots,
        tv_dist=np.asarray(tv_list) if tv_list is not None else None,
        v_dist=np.asarray(v_list) if v_list is not None else None,
        truncated=truncated,
        stopped_early=stopped_early,
    )


def solve_linear(
    mu0: GridMeasure,
    tau_end: float,
    dt: float,
    theta_max: float = 0.5,
    capture_taus=None,
) -> Trajectory:
    """Evolve the time-homogeneous (unit-rate) equation to tau_end.

    Requires dt <= theta_max/2 so the coefficient-2 stencil keeps
    positivity.  When capture_taus is given, the stepper lands on each
    requested time exactly and snapshots the state there; the final state
    is always snapshotted.
    """
    if not (dt > 0):
        raise ConfigError(f"dt must be positive, got {dt}")
    if dt > theta_max / 2.0 + 1e-15:
        raise ConfigError(f"dt={dt} violates the positivity bound theta_max/2={theta_max / 2}")
    spec = mu0.spec
    w = mu0.w.copy()
    deriv = np.empty_like(w)

    targets = sorted(float(x) for x in (capture_taus if capture_taus is not None else []))
    for x in targets:
        if x < 0 or x > tau_end + 1e-12:
            raise ConfigError(f"capture time {x} outside [0, tau_end]")

    times = [0.0]
    Bs = [mass_above_h(mu0)]
    snap_steps = [0]
    snapshots = [mu0]
    tau = 0.0
    step = 0
    pending = [x for x in targets if x > 0.0]
    eps = 1e-12 * max(tau_end, 1.0)

    if targets and targets[0] == 0.0:
        pass  # initial snapshot already recorded

    while tau < tau_end - eps:
        upto = pending[0] if pending else tau_end
        h_step = min(dt, upto - tau)
        if h_step <= 0:
            pending.pop(0)
            continue
        _generator_into(w, 1.0, deriv)
        w += h_step * deriv
        tau += h_step
        step += 1
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"non-finite state at step {step}", step=step)
        times.append(tau)
        Bs.append(float(w[:, 1:].sum()))
        if pending and tau >= pending[0] - eps:
            pending.pop(0)
            snap_steps.append(step)
            snapshots.append(GridMeasure(spec, w))

    if snap_steps[-1] != step:
        snap_steps.append(step)
        snapshots.append(GridMeasure(spec, w))

    times = np.asarray(times)
    return Trajectory(
        spec=spec,
        times=times,
        B=np.asarray(Bs),
        theta=times.copy(),  # unit rate: the clock is the time itself
        snapshot_steps=np.asarray(snap_steps, dtype=int),
        snapshots=snapshots,
    )
