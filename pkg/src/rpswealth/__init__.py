"""Kinetic rock-paper-scissors wealth exchange on the half-line.

Library plus CLI for the no-debt pairwise exchange game in measure form:
grid solver for the nonlinear evolution, adjoint solvers, the explicit
folded long-time limit, certified algebraic decay constants, flat-norm
computation, and an agent-based cross-check.
"""

from .errors import ConfigError, NoCertificateError, NumericalError
from .measures import (
    AtomicMeasure,
    CallableDensity,
    ExponentialDensity,
    GridMeasure,
    GridSpec,
    ModelParams,
    SquareDensity,
    bin_atoms,
    first_moment,
    flat_norm,
    ingest_density,
    mass_above_h,
    norm_tv,
    norm_v,
    total_mass,
    weight_v,
)
from .dynamics import (
    SolverConfig,
    Trajectory,
    adaptive_dt,
    apply_generator,
    solve_linear,
    solve_nonlinear,
    step_euler,
    theta_lower_bound,
)
from .dual import (
    ClassFunction,
    RateFunction,
    coupling_bound,
    dual_generator,
    duality_gap,
    evolve_dual_ode,
    measured_coupling,
    solve_dual_mild,
)
from .asymptotics import (
    HarrisEnvelope,
    decay_envelope,
    ph_p0_distance,
    ph_p0_ratio,
    project_p0,
    project_ph,
    wealth_loss,
)
from .harris import (
    HarrisConstants,
    HarrisInputs,
    alpha_of_x,
    beta_root,
    constants_at,
    coupling_constant,
    gamma_rate,
    harris_constants,
    lambda_scan,
    limiting_constants,
    lyapunov_constants,
)
from .montecarlo import (
    AgentPopulation,
    MCReport,
    empirical_measure,
    mc_compare,
    mc_scaling,
    mc_step,
    run_until,
)

__version__ = "0.1.0"
