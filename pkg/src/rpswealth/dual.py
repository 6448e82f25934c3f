"""Adjoint evolution of test functions, per wealth class.

A test function restricted to one class is a vector (f_0, ..., f_K) over
levels.  Its generator is the gated second difference: zero at level 0,
f_{k-1} + f_{k+1} - 2 f_k inside, and f_{K-1} - f_K at the truncated top,
which is the exact adjoint of the forward solver's reflecting top.  Two
independent solvers are provided: explicit Euler in time, and fixed-point
iteration of the mild integral form on a small window.  `duality_gap`
pits the forward and adjoint routes against each other on the same data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .measures import GridMeasure, GridSpec, ModelParams, weight_v
from .dynamics import DT_CAP_FACTOR, SolverConfig, Trajectory, solve_linear, solve_nonlinear

__all__ = [
    "ClassFunction",
    "RateFunction",
    "dual_generator",
    "evolve_dual_ode",
    "solve_dual_mild",
    "duality_gap",
    "coupling_bound",
    "measured_coupling",
]


@dataclass(frozen=True)
class ClassFunction:
    """Test function on one wealth class: offset x in [0,h) and values f_k."""

    offset: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ConfigError("ClassFunction needs a 1-d value vector with at least 2 levels")
        if not np.all(np.isfinite(vals)):
            raise ConfigError("non-finite values in ClassFunction")
        if not (0.0 <= self.offset < self.h):
            raise ConfigError(f"offset {self.offset} outside [0, h={self.h})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def levels(self) -> np.ndarray:
        return self.offset + self.h * np.arange(self.values.size)

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def v_norm(self) -> float:
        """Weighted sup norm max_k |f_k| / V(x + k*h)."""
        return float((np.abs(self.values) / weight_v(self.levels, self.h)).max())

    @classmethod
    def constant(cls, value: float, offset: float, h: float, K: int) -> "ClassFunction":
        return cls(offset, h, np.full(K + 1, float(value)))


class RateFunction:
    """Nonnegative rate b(t): a constant, or linear interpolation of a table."""

    def __init__(self, times=None, values=None, constant=None):
        if constant is not None:
            if constant < 0:
                raise ConfigError(f"rate must be nonnegative, got {constant}")
            self._const = float(constant)
            self._t = self._v = None
            return
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 1:
            raise ConfigError("rate table needs matching 1-d times and values")
        if np.any(np.diff(t) < 0):
            raise ConfigError("rate table times must be nondecreasing")
        if np.any(v < 0):
            raise ConfigError("rate values must be nonnegative")
        self._const = None
        self._t, self._v = t, v

    @classmethod
    def from_constant(cls, value: float) -> "RateFunction":
        return cls(constant=value)

    @classmethod
    def from_table(cls, times, values) -> "RateFunction":
        return cls(times=times, values=values)

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> "RateFunction":
        return cls(times=traj.times, values=traj.B)

    def __call__(self, t):
        if self._const is not None:
            return self._const if np.isscalar(t) else np.full(np.shape(t), self._const)
        out = np.interp(t, self._t, self._v)  # clamps outside the table
        return float(out) if np.isscalar(t) else out

    def sup(self) -> float:
        return self._const if self._const is not None else float(self._v.max())


def _dual_gen(vals: np.ndarray) -> np.ndarray:
    out = np.zeros_like(vals)
    out[1:] += vals[:-1] - vals[1:]  # down-jump term, every level k >= 1
    out[1:-1] += vals[2:] - vals[1:-1]  # up-jump term, absent at the reflected top
    return out


def dual_generator(f: ClassFunction) -> ClassFunction:
    """Gated second difference of a class function; annihilates constants."""
    return ClassFunction(f.offset, f.h, _dual_gen(f.values))


def evolve_dual_ode(
    f0: ClassFunction,
    b: RateFunction,
    s: float,
    t: float,
    params: ModelParams,
    dt: float,
) -> ClassFunction:
    """Euler-integrate f' = (eta/3) b(sigma) * generator(f) from s to t.

    The caller picks dt small enough that (2*eta/3)*b*dt <= 1; under that
    bound each step is a convex average, so the sup norm never grows and
    nonnegative data stays nonnegative.
    """
    if t < s:
        raise ConfigError(f"need s <= t, got s={s}, t={t}")
    vals = f0.values.copy()
    c = params.eta / 3.0
    sigma = s
    eps = 1e-12 * max(t, 1.0)
    while sigma < t - eps:
        step = min(dt, t - sigma)
        vals += (step * c * b(sigma)) * _dual_gen(vals)
        sigma += step
    return ClassFunction(f0.offset, f0.h, vals)


def _gamma_apply(F, f0_vals, bs, Icum, c, dt_mesh):
    """One sweep of the mild-form fixed-point map on the time mesh.

    F has shape (nodes, K+1); row i is the candidate solution at mesh
    time t_i.  The integral term uses trapezoid weights on nodes 0..i.
    Level 0 is frozen at its initial value.
    """
    nodes, width = F.shape
    S = np.empty_like(F)
    S[:, 1:] = F[:, :-1]  # value one level down
    S[:, 1:-1] += F[:, 2:]  # value one level up
    S[:, -1] += F[:, -1]  # reflected top: the up neighbor is itself
    decay = np.exp(-2.0 * c * Icum)  # e^{-2c * Int_0^{t_i} b}
    out = np.empty_like(F)
    out[:, 0] = f0_vals[0]
    out[0, 1:] = f0_vals[1:]
    # integrand g(sigma_j) = b_j * e^{-2c (I_i - I_j)} * S_j, trapezoid over j<=i
    weighted = bs[:, None] * np.exp(2.0 * c * Icum)[:, None] * S
    for i in range(1, nodes):
        integral = np.trapezoid(weighted[: i + 1], dx=dt_mesh, axis=0)
        out[i, 1:] = f0_vals[1:] * decay[i] + c * np.exp(-2.0 * c * Icum[i]) * integral[1:]
    return out


def solve_dual_mild(
    f0: ClassFunction,
    b: RateFunction,
    window: float,
    params: ModelParams,
    iters: int,
    nodes: int = 64,
) -> ClassFunction:
    """Solve the mild integral equation on [0, window] by fixed-point sweeps.

    Starts from the constant-in-time extension of f0 and applies the
    integral map `iters` times on a uniform mesh with trapezoid
    quadrature; each sweep contracts the sup distance between iterates by
    at least (2*eta/3)*sup(b)*window, which must be < 1.  Returns the
    iterate at the window end.
    """
    if iters < 1:
        raise ConfigError(f"iters must be >= 1, got {iters}")
    if nodes < 3:
        raise ConfigError(f"nodes must be >= 3, got {nodes}")
    sup_b = b.sup()
    bound = 3.0 / (2.0 * params.eta * sup_b) if sup_b > 0 else np.inf
    if not (window < bound):
        raise ConfigError(
            f"window {window} violates the contraction bound 3/(2*eta*sup b) = {bound:.6g}"
        )
    ts = np.linspace(0.0, window, nodes)
    dt_mesh = ts[1] - ts[0]
    bs = np.asarray(b(ts), dtype=float)
    # cumulative trapezoid integral of b on the mesh
    Icum = np.concatenate([[0.0], np.cumsum(0.5 * (bs[1:] + bs[:-1]) * dt_mesh)])
    c = params.eta / 3.0
    F = np.tile(f0.values, (nodes, 1))
    for _ in range(iters):
        F = _gamma_apply(F, f0.values, bs, Icum, c, dt_mesh)
    return ClassFunction(f0.offset, f0.h, F[-1])


def class_functions_for_grid(spec: GridSpec, values_by_offset) -> list[ClassFunction]:
    """Wrap an (m, K+1) array of values into one ClassFunction per offset."""
    vals = np.asarray(values_by_offset, dtype=float)
    if vals.shape != spec.shape:
        raise ConfigError(f"values shape {vals.shape} does not match grid {spec.shape}")
    return [
        ClassFunction((j + 0.5) * spec.delta, spec.h, vals[j]) for j in range(spec.m)
    ]


def duality_gap(
    mu0: GridMeasure,
    f0s: list[ClassFunction],
    t: float,
    params: ModelParams,
    dt: float,
) -> float:
    """|<mu_t, f> - <mu_0, f evolved adjointly>| with a shared resolution dt.

    The forward run uses steps capped at dt (dt0 = dt/100) and records its
    B table at every step; the adjoint run replays that table through the
    Euler dual solver.  Both schemes are first order, so the gap shrinks
    linearly with dt.
    """
    spec = mu0.spec
    if len(f0s) != spec.m:
        raise ConfigError(f"need one class function per offset ({spec.m}), got {len(f0s)}")
    config = SolverConfig(dt0=dt / DT_CAP_FACTOR, theta_max=0.5, t_end=t,
                          stop_frac=0.5, snapshot_every=10**9)
    traj = solve_nonlinear(mu0, params, config, limit=None)
    w_t = traj.final_state.w
    lhs = float(sum(w_t[j] @ f0s[j].values for j in range(spec.m)))
    b = RateFunction.from_trajectory(traj)
    rhs = 0.0
    for j in range(spec.m):
        evolved = evolve_dual_ode(f0s[j], b, 0.0, t, params, dt)
        rhs += float(mu0.w[j] @ evolved.values)
    return abs(lhs - rhs)


def coupling_bound(t) -> float:
    """Bound 1 + exp(-2t) on the TV norm of an adjacent-level dipole."""
    t = np.asarray(t, dtype=float)
    out = 1.0 + np.exp(-2.0 * t)
    return float(out) if out.ndim == 0 else out


def measured_coupling(x: float, t: float, dt: float, h: float = 0.5, K: int = 200) -> float:
    """TV norm of (unit mass at level 0) - (unit mass at level 1) evolved to t.

    Evolves under the unit-rate linear dynamics; the result does not
    depend on the offset x because classes are decoupled and share the
    same stencil.
    """
    if not (0.0 <= x < h):
        raise ConfigError(f"offset x={x} outside [0, h={h})")
    spec = GridSpec(h=h, m=1, K=K)
    w = np.zeros(spec.shape)
    w[0, 0] = 1.0
    w[0, 1] = -1.0
    mu = GridMeasure(spec, w)
    traj = solve_linear(mu, t, dt)
    return float(np.abs(traj.final_state.w).sum())
