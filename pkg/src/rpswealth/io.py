"""CSV serialization: measures, trajectories, rate tables, reports.

All files are UTF-8 with LF line endings.  Floats are written with 17
significant digits, which round-trips IEEE doubles exactly.  Header
comments (lines starting with '#') carry the resolved configuration so
every report is self-describing.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .measures import GridMeasure, GridSpec, midpoints

__all__ = [
    "fmt",
    "write_measure_csv",
    "read_measure_csv",
    "write_trajectory_csv",
    "write_rate_csv",
    "write_class_function_csv",
    "write_rows_csv",
]


def fmt(x) -> str:
    """17-significant-digit decimal form of a float; exact round trip."""
    return format(float(x), ".17g")


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_measure_csv(path, mu: GridMeasure, comments=()) -> None:
    """Write nonzero cells as rows j,k,y_mid,mass; grid spec in comments."""
    lines = [f"# {c}" for c in comments]
    lines += [
        f"# h = {fmt(mu.spec.h)}",
        f"# m = {mu.spec.m}",
        f"# K = {mu.spec.K}",
        "j,k,y_mid,mass",
    ]
    y = midpoints(mu.spec)
    jj, kk = np.nonzero(mu.w)
    for j, k in zip(jj, kk):
        lines.append(f"{j},{k},{fmt(y[j, k])},{fmt(mu.w[j, k])}")
    _write_lines(path, lines)


def read_measure_csv(path) -> GridMeasure:
    """Read a measure written by write_measure_csv, bit-exactly."""
    h = m = K = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    key = key.strip()
                    if key == "h":
                        h = float(val)
                    elif key == "m":
                        m = int(val)
                    elif key == "K":
                        K = int(val)
                continue
            if line.startswith("j,"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ConfigError(f"malformed measure row: {line!r}")
            rows.append((int(parts[0]), int(parts[1]), float(parts[3])))
    if h is None or m is None or K is None:
        raise ConfigError(f"measure file {path} lacks grid header comments")
    spec = GridSpec(h=h, m=m, K=K)
    w = np.zeros(spec.shape)
    for j, k, mass in rows:
        if not (0 <= j < m and 0 <= k <= K):
            raise ConfigError(f"cell ({j},{k}) outside grid {spec.shape}")
        w[j, k] = mass
    return GridMeasure(spec, w)


def write_trajectory_csv(path, traj, envelope=None, comments=()) -> None:
    """One row per snapshot: t,B,theta,tv_dist,v_dist,envelope."""
    steps = traj.snapshot_steps
    n = len(steps)
    tv = traj.tv_dist if traj.tv_dist is not None else [float("nan")] * n
    vv = traj.v_dist if traj.v_dist is not None else [float("nan")] * n
    env = envelope if envelope is not None else [float("nan")] * n
    lines = [f"# {c}" for c in comments]
    lines.append("t,B,theta,tv_dist,v_dist,envelope")
    for i, s in enumerate(steps):
        lines.append(
            f"{fmt(traj.times[s])},{fmt(traj.B[s])},{fmt(traj.theta[s])},"
            f"{fmt(tv[i])},{fmt(vv[i])},{fmt(env[i])}"
        )
    _write_lines(path, lines)


def write_rate_csv(path, times, B, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("t,B")
    for t, b in zip(times, B):
        lines.append(f"{fmt(t)},{fmt(b)}")
    _write_lines(path, lines)


def write_class_function_csv(path, f, comments=()) -> None:
    """Dual snapshot rows k,f_k with the offset in the comments."""
    lines = [f"# {c}" for c in comments]
    lines += [f"# offset = {fmt(f.offset)}", f"# h = {fmt(f.h)}", "k,f_k"]
    for k, v in enumerate(f.values):
        lines.append(f"{k},{fmt(v)}")
    _write_lines(path, lines)


def write_rows_csv(path, header: str, rows, comments=()) -> None:
    """Generic report writer; row entries are formatted by type."""
    lines = [f"# {c}" for c in comments]
    lines.append(header)
    for row in rows:
        cells = []
        for x in row:
            if isinstance(x, str):
                cells.append(x)
            elif isinstance(x, (int, np.integer)):
                cells.append(str(int(x)))
            else:
                cells.append(fmt(x))
        lines.append(",".join(cells))
    _write_lines(path, lines)
