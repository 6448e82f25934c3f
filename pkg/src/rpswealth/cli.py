"""Command-line front end.

Subcommands:
    simulate  - evolve the configured initial condition toward its folded
                limit; trajectory CSV plus optional decay/weight SVGs
    limit     - write the folded limit measure and the wealth-loss figure
    harris    - decay-constant table for both quadratic sign variants
    mc        - agent-based cross-check against the grid solver
    flatnorm  - norm table (mass, moments, TV, weighted TV, flat norms)
                of the configured initial measure

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import asymptotics, dynamics, harris, io, measures, montecarlo
from .config import ExperimentConfig, build_initial_measure, parse_config
from .errors import ConfigError, NumericalError

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rpswealth",
                                description="Wealth-exchange game dynamics on the half-line.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("simulate", "run the nonlinear solver against the folded limit"),
        ("limit", "write the folded limit measure"),
        ("harris", "print and write the decay-constant tables"),
        ("mc", "agent-based cross-check"),
        ("flatnorm", "norm table of the initial measure"),
    ]:
        q = sub.add_parser(name, help=doc)
        q.add_argument("--config", required=True, help="path to the key=value config file")
        q.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
        q.add_argument("--svg", action="store_true", help="also render SVG figures")
        q.add_argument("--seed", type=int, default=None, help="RNG seed (mc)")
        q.add_argument("--n", type=int, default=None, help="number of agents (mc)")
        q.add_argument("--replicates", type=int, default=None, help="replicate count (mc)")
    return p


def _prepare_outdir(cfg: ExperimentConfig, args) -> str:
    outdir = args.out if args.out is not None else cfg.outputs_dir
    try:
        os.makedirs(outdir, exist_ok=True)
        probe = os.path.join(outdir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {outdir!r} is not writable: {exc}") from exc
    return outdir


def _header_comments(cfg: ExperimentConfig, extra=()) -> list[str]:
    lines = [f"{k} = {v}" for k, v in cfg.resolved_items()]
    lines.extend(extra)
    return lines


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    outdir = _prepare_outdir(cfg, args)
    init = build_initial_measure(cfg)
    limit = asymptotics.project_ph(init)
    B0 = measures.mass_above_h(init)
    d0 = measures.norm_v(init - limit)
    C_lim, lam_lim = harris.limiting_constants(cfg.harris)
    env = asymptotics.HarrisEnvelope(C=C_lim, lam=lam_lim, eta=cfg.model.eta, B0=B0, d0=d0)

    traj = dynamics.solve_nonlinear(init, cfg.model, cfg.solver, limit=limit)
    envelope = asymptotics.decay_envelope(traj.snapshot_times, env)

    extra = [
        f"B0_measured = {io.fmt(B0)}",
        f"d0_weighted = {io.fmt(d0)}",
        f"envelope_C = {io.fmt(C_lim)}",
        f"envelope_lambda = {io.fmt(lam_lim)}",
        f"stopped_early = {traj.stopped_early}",
        f"truncation_warning = {traj.truncated}",
    ]
    if cfg.init_kind == "exponential":
        a = cfg.init_alpha
        extra.append(f"exp_mass_above_h_integral = {io.fmt(np.exp(-a * cfg.model.h))}")
        extra.append(f"exp_mass_above_h_complement = {io.fmt(1.0 - np.exp(-a * cfg.model.h))}")
    csv_path = os.path.join(outdir, "trajectory.csv")
    io.write_trajectory_csv(csv_path, traj, envelope=envelope,
                            comments=_header_comments(cfg, extra))
    written = [csv_path]

    if args.svg:
        from . import plots

        decay_path = os.path.join(outdir, "decay.svg")
        plots.save_decay_svg(decay_path, traj.snapshot_times, traj.v_dist, envelope,
                             label=cfg.init_kind)
        weight_path = os.path.join(outdir, "weight_function.svg")
        plots.save_weight_svg(weight_path, cfg.model.h)
        written += [decay_path, weight_path]

    print(f"simulate: {len(traj.snapshot_steps)} snapshots, "
          f"t_final = {traj.times[-1]:.6g}, stopped_early = {traj.stopped_early}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_limit(cfg: ExperimentConfig, args) -> int:
    outdir = _prepare_outdir(cfg, args)
    init = build_initial_measure(cfg)
    limit = asymptotics.project_ph(init)
    loss = asymptotics.wealth_loss(init)
    extra = [f"wealth_loss = {io.fmt(loss)}"]
    path = os.path.join(outdir, "limit.csv")
    io.write_measure_csv(path, limit, comments=_header_comments(cfg, extra))
    written = [path]

    if cfg.init_kind == "exponential":
        a = cfg.init_alpha
        spec = cfg.grid
        d = spec.delta
        lefts = np.arange(spec.m) * d
        closed = (np.exp(-a * lefts) - np.exp(-a * (lefts + d)))
        closed *= (1.0 - np.exp(-a * spec.width)) / (1.0 - np.exp(-a * spec.h))
        grid_masses = limit.w[:, 0]
        rows = [
            (j, (j + 0.5) * d, grid_masses[j], closed[j], abs(grid_masses[j] - closed[j]))
            for j in range(spec.m)
        ]
        cmp_path = os.path.join(outdir, "limit_comparison.csv")
        io.write_rows_csv(cmp_path, "j,y_mid,mass_grid,mass_closed_form,abs_err",
                          rows, comments=_header_comments(cfg))
        written.append(cmp_path)

    print(f"limit: mass = {measures.total_mass(limit):.12g}, wealth_loss = {loss:.12g}")
    for p in written:
        print(f"wrote {p}")
    return 0


def _harris_rows(cfg: ExperimentConfig, variant: str):
    from dataclasses import replace

    inputs = replace(cfg.harris, sign_variant=variant)
    rows = []
    for T in cfg.harris_T_values:
        hc = harris.harris_constants(float(T), inputs)
        rows.append((
            hc.T, hc.gamma_L, hc.K_lyap, hc.gamma_H, hc.beta,
            hc.gamma if hc.gamma is not None else float("nan"),
            hc.C_of_T if hc.C_of_T is not None else float("nan"),
            hc.lambda_of_T if hc.lambda_of_T is not None else float("nan"),
        ))
    C_lim, lam_lim = harris.limiting_constants(inputs)
    rows.append((0.0, 1.0, 0.0, 1.0, harris.limiting_beta(inputs), float("nan"), C_lim, lam_lim))
    return rows


def cmd_harris(cfg: ExperimentConfig, args) -> int:
    outdir = _prepare_outdir(cfg, args)
    header = "T,gamma_L,K,gamma_H,beta,gamma,C,lambda"
    written = []
    tables = {}
    for variant in harris.SIGN_VARIANTS:
        rows = _harris_rows(cfg, variant)
        tables[variant] = rows
        path = os.path.join(outdir, f"harris_{variant}.csv")
        io.write_rows_csv(path, header, rows,
                          comments=_header_comments(cfg, [f"sign_variant = {variant}"]))
        written.append(path)

    cols = header.split(",")
    for variant, rows in tables.items():
        print(f"\nvariant = {variant} (T = 0 row is the T -> 0 limit; "
              "nan means no certificate at that T)")
        print("  ".join(f"{c:>12s}" for c in cols))
        for row in rows:
            print("  ".join(f"{x:12.6g}" for x in row))
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_mc(cfg: ExperimentConfig, args) -> int:
    outdir = _prepare_outdir(cfg, args)
    init = build_initial_measure(cfg)
    n = args.n if args.n is not None else cfg.mc_n
    reps = args.replicates if args.replicates is not None else cfg.mc_replicates
    seed = args.seed if args.seed is not None else cfg.mc_seed
    if n < 2:
        raise ConfigError(f"mc needs at least 2 agents, got {n}")
    report = montecarlo.mc_compare(init, cfg.model, n, cfg.mc_t_end, reps, seed)
    extra = [
        f"n_agents = {n}",
        f"replicates = {reps}",
        f"seed = {seed}",
        f"mean_measure_distance = {io.fmt(report.mean_measure_distance)}",
    ]
    path = os.path.join(outdir, "mc_report.csv")
    io.write_rows_csv(path, "replicate,t_end,tv_distance", report.rows(),
                      comments=_header_comments(cfg, extra))
    print(f"mc: N = {n}, replicates = {reps}, mean TV = {report.mean:.6g} "
          f"+- {report.stderr:.2g}")
    print(f"wrote {path}")
    return 0


def cmd_flatnorm(cfg: ExperimentConfig, args) -> int:
    outdir = _prepare_outdir(cfg, args)
    init = build_initial_measure(cfg)
    entries = [
        ("total_mass", measures.total_mass(init)),
        ("mass_above_h", measures.mass_above_h(init)),
        ("first_moment", measures.first_moment(init)),
        ("norm_tv", measures.norm_tv(init)),
        ("norm_v", measures.norm_v(init)),
        ("flat_V_max", measures.flat_norm(init, weight="V", convention="max")),
        ("flat_V_sum", measures.flat_norm(init, weight="V", convention="sum")),
        ("flat_1_max", measures.flat_norm(init, weight="one", convention="max")),
        ("flat_1_sum", measures.flat_norm(init, weight="one", convention="sum")),
    ]
    path = os.path.join(outdir, "norms.csv")
    io.write_rows_csv(path, "quantity,value", entries, comments=_header_comments(cfg))
    for name, value in entries:
        print(f"{name:>14s} = {value:.12g}")
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "harris": cmd_harris,
    "mc": cmd_mc,
    "flatnorm": cmd_flatnorm,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, FloatingPointError) as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
