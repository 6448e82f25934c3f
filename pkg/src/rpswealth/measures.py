"""Signed measures on the half-line, discretized on a wealth-class aligned grid.

The exchange dynamics moves mass in jumps of exactly h, so every point
y >= 0 belongs to a "wealth class" {x + k*h : k in N} determined by its
offset x = y mod h.  The grid here is aligned with that structure: each
period [k*h, (k+1)*h) is split into m equal cells, so the shift-by-h
stencil maps cells to cells and never mixes offsets.

Cell (j, k) covers [j*d + k*h, (j+1)*d + k*h) with d = h/m, for
0 <= j < m and 0 <= k <= K.  Its representative point is the midpoint
y_{j,k} = k*h + (j + 1/2)*d, used for weights, moments and plotting.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigError, NumericalError

__all__ = [
    "ModelParams",
    "GridSpec",
    "GridMeasure",
    "AtomicMeasure",
    "SquareDensity",
    "ExponentialDensity",
    "CallableDensity",
    "total_mass",
    "mass_above_h",
    "first_moment",
    "weight_v",
    "norm_tv",
    "norm_v",
    "flat_norm",
    "ingest_density",
    "bin_atoms",
    "midpoints",
    "v_weights",
]


@dataclass(frozen=True)
class ModelParams:
    """Interaction rate eta (1/time) and the exchange quantum h (wealth)."""

    eta: float = 3.0
    h: float = 0.5

    def __post_init__(self):
        if not (self.eta > 0 and self.h > 0):
            raise ConfigError(f"eta and h must be positive, got eta={self.eta}, h={self.h}")


@dataclass(frozen=True)
class GridSpec:
    """Aligned grid: m cells per period of width h, levels 0..K."""

    h: float
    m: int
    K: int

    def __post_init__(self):
        if not (self.h > 0):
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.m < 1 or self.K < 1:
            raise ConfigError(f"need m >= 1 and K >= 1, got m={self.m}, K={self.K}")

    @property
    def delta(self) -> float:
        """Cell width h/m."""
        return self.h / self.m

    @property
    def n_levels(self) -> int:
        return self.K + 1

    @property
    def shape(self) -> tuple[int, int]:
        """(offsets, levels) shape of the mass array."""
        return (self.m, self.K + 1)

    @property
    def width(self) -> float:
        """Right end of the representable domain, (K+1)*h."""
        return (self.K + 1) * self.h

    def cell_left(self, j, k):
        return j * self.delta + k * self.h

    def midpoint(self, j, k):
        return k * self.h + (j + 0.5) * self.delta


@functools.lru_cache(maxsize=64)
def midpoints(spec: GridSpec) -> np.ndarray:
    """(m, K+1) array of cell midpoints; read-only and cached per spec."""
    j = np.arange(spec.m)[:, None]
    k = np.arange(spec.K + 1)[None, :]
    y = k * spec.h + (j + 0.5) * spec.delta
    y.setflags(write=False)
    return y


@functools.lru_cache(maxsize=64)
def v_weights(spec: GridSpec) -> np.ndarray:
    """(m, K+1) array of V evaluated at cell midpoints."""
    w = weight_v(midpoints(spec), spec.h)
    w.setflags(write=False)
    return w


class GridMeasure:
    """Signed measure stored as one mass-per-cell array, indexed (j, k).

    Instances are immutable value objects (the array is write-protected),
    so they are safe to share across threads.  Arithmetic returns new
    measures and requires matching grids.
    """

    __slots__ = ("spec", "w")

    def __init__(self, spec: GridSpec, w: np.ndarray):
        w = np.array(w, dtype=float)
        if w.shape != spec.shape:
            raise ConfigError(f"mass array shape {w.shape} does not match grid {spec.shape}")
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite cell mass in GridMeasure")
        w.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "w", w)

    def __setattr__(self, *a):
        raise AttributeError("GridMeasure is immutable")

    @classmethod
    def zero(cls, spec: GridSpec) -> "GridMeasure":
        return cls(spec, np.zeros(spec.shape))

    def _check_same_grid(self, other: "GridMeasure"):
        if self.spec != other.spec:
            raise ConfigError("grid mismatch between measures")

    def __add__(self, other: "GridMeasure") -> "GridMeasure":
        self._check_same_grid(other)
        return GridMeasure(self.spec, self.w + other.w)

    def __sub__(self, other: "GridMeasure") -> "GridMeasure":
        self._check_same_grid(other)
        return GridMeasure(self.spec, self.w - other.w)

    def __mul__(self, a: float) -> "GridMeasure":
        return GridMeasure(self.spec, float(a) * self.w)

    __rmul__ = __mul__

    def __neg__(self) -> "GridMeasure":
        return GridMeasure(self.spec, -self.w)

    def to_atoms(self) -> list[tuple[float, float]]:
        """Nonzero cells as (midpoint, mass) atoms."""
        y = midpoints(self.spec)
        jj, kk = np.nonzero(self.w)
        return [(float(y[j, k]), float(self.w[j, k])) for j, k in zip(jj, kk)]

    def __repr__(self):
        return (f"GridMeasure(h={self.spec.h}, m={self.spec.m}, K={self.spec.K}, "
                f"mass={total_mass(self):.6g}, nnz={int(np.count_nonzero(self.w))})")


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite list of point masses (location, weight), locations >= 0."""

    atoms: tuple[tuple[float, float], ...]

    def __init__(self, atoms: Iterable[tuple[float, float]]):
        atoms = tuple((float(y), float(w)) for y, w in atoms)
        for y, _ in atoms:
            if y < 0:
                raise ConfigError(f"atom location must be >= 0, got {y}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    def to_atoms(self) -> list[tuple[float, float]]:
        return list(self.atoms)


# --- density descriptors for ingest_density -------------------------------

@dataclass(frozen=True)
class SquareDensity:
    """Density (1/h) * 1_{[k0*h, (k0+1)*h)}; a probability measure."""

    k0: int


@dataclass(frozen=True)
class ExponentialDensity:
    """Density alpha * exp(-alpha*y) on the half-line."""

    alpha: float


@dataclass(frozen=True)
class CallableDensity:
    """User-supplied density sampled pointwise through the quadrature rule."""

    fn: Callable[[np.ndarray], np.ndarray]


# --- scalar observables -----------------------------------------------------

def total_mass(mu: GridMeasure) -> float:
    """Sum of all cell masses."""
    return float(mu.w.sum())


def mass_above_h(mu: GridMeasure) -> float:
    """Mass on [h, inf): sum over levels k >= 1.  Exact on the aligned grid."""
    return float(mu.w[:, 1:].sum())


def first_moment(mu: GridMeasure) -> float:
    """Integral of y against the measure, midpoint convention."""
    return float((midpoints(mu.spec) * mu.w).sum())


def weight_v(y, h: float):
    """Confinement weight V(y) = 2 - exp(-a(y)*y), a(y) = 2*log2/(2*(y mod h) + h).

    Takes values in [1, 2); V(0) = 1 and V -> 2 along each wealth class.
    The offset-dependent rate makes the sublevel set {V(y)+V(z) <= 3} of a
    class contain exactly its two lowest points, which is what the pointwise
    coupling bound needs.
    """
    y = np.asarray(y, dtype=float)
    x = np.mod(y, h)
    a = 2.0 * np.log(2.0) / (2.0 * x + h)
    out = 2.0 - np.exp(-a * y)
    return out if out.ndim else float(out)


def norm_tv(mu: GridMeasure) -> float:
    """Total variation norm: sum of absolute cell masses."""
    return float(np.abs(mu.w).sum())


def norm_v(mu: GridMeasure) -> float:
    """V-weighted total variation norm."""
    return float((v_weights(mu.spec) * np.abs(mu.w)).sum())


# --- flat (dual bounded-Lipschitz) norm -------------------------------------

def _as_atoms(measure, h=None) -> tuple[np.ndarray, np.ndarray, float | None]:
    """Normalize input to sorted, merged support points and weights."""
    if isinstance(measure, GridMeasure):
        atoms = measure.to_atoms()
        h = measure.spec.h
    elif isinstance(measure, AtomicMeasure):
        atoms = measure.to_atoms()
    else:
        atoms = [(float(y), float(w)) for y, w in measure]
    if not atoms:
        return np.empty(0), np.empty(0), h
    ys = np.array([a[0] for a in atoms])
    ws = np.array([a[1] for a in atoms])
    order = np.argsort(ys, kind="stable")
    ys, ws = ys[order], ws[order]
    # merge exactly coincident locations
    uy, inv = np.unique(ys, return_inverse=True)
    uw = np.zeros_like(uy)
    np.add.at(uw, inv, ws)
    keep = uw != 0.0
    return uy[keep], uw[keep], h


def flat_norm(measure, weight: str = "V", convention: str = "max", h: float | None = None) -> float:
    """Flat norm of a finitely supported signed measure.

    Solves the linear program

        max sum_i f_i * mu_i   over (f, a, b), a, b >= 0
        |f_i| <= a * W(y_i),   |f_{i+1} - f_i| <= b * (y_{i+1} - y_i)

    with the size budget ``a + b <= 1`` (``convention="sum"``) or
    ``max(a, b) <= 1`` (``convention="max"``, the default).  W is the
    confinement weight V (``weight="V"``) or 1 (``weight="one"``).
    Adjacent Lipschitz constraints suffice in one dimension.

    ``measure`` may be a GridMeasure, an AtomicMeasure, or an iterable of
    (location, weight) pairs; for the latter two, ``weight="V"`` needs the
    quantum ``h``.  Empty support gives 0.
    """
    if convention not in ("max", "sum"):
        raise ConfigError(f"unknown flat-norm convention {convention!r}")
    if weight not in ("V", "one", "1", 1):
        raise ConfigError(f"unknown flat-norm weight {weight!r}")
    ys, ws, h = _as_atoms(measure, h)
    n = ys.size
    if n == 0:
        return 0.0
    if weight == "V":
        if h is None:
            raise ConfigError("weight='V' needs the exchange quantum h for atomic input")
        Wv = np.atleast_1d(weight_v(ys, h))
    else:
        Wv = np.ones(n)

    # variables: f_0..f_{n-1}, a, b
    nv = n + 2
    rows, rhs = [], []
    for i in range(n):
        for sign in (1.0, -1.0):  # +-f_i - a*W_i <= 0
            r = np.zeros(nv)
            r[i], r[n] = sign, -Wv[i]
            rows.append(r)
            rhs.append(0.0)
    gaps = np.diff(ys)
    for i in range(n - 1):
        for sign in (1.0, -1.0):  # +-(f_{i+1} - f_i) - b*gap_i <= 0
            r = np.zeros(nv)
            r[i + 1], r[i], r[n + 1] = sign, -sign, -gaps[i]
            rows.append(r)
            rhs.append(0.0)
    if convention == "sum":
        r = np.zeros(nv)
        r[n], r[n + 1] = 1.0, 1.0
        rows.append(r)
        rhs.append(1.0)
    else:
        for idx in (n, n + 1):
            r = np.zeros(nv)
            r[idx] = 1.0
            rows.append(r)
            rhs.append(1.0)

    c = np.zeros(nv)
    c[:n] = -ws  # maximize
    bounds = [(None, None)] * n + [(0.0, None), (0.0, None)]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if not res.success:
        raise NumericalError(f"flat-norm LP failed: {res.message}")
    return float(-res.fun)


# --- ingestion ---------------------------------------------------------------

def _cell_quadrature(fn, spec: GridSpec, rule: str) -> np.ndarray:
    d = spec.delta
    mid = midpoints(spec)
    if rule == "midpoint":
        return d * fn(mid)
    if rule == "simpson":
        left = mid - 0.5 * d
        right = mid + 0.5 * d
        return (d / 6.0) * (fn(left) + 4.0 * fn(mid) + fn(right))
    raise ConfigError(f"unknown quadrature rule {rule!r}")


def ingest_density(f, spec: GridSpec, rule: str = "simpson") -> GridMeasure:
    """Discretize a density descriptor to cell masses with the chosen rule.

    Square densities are exact under either rule because the grid is
    aligned with h.  Exponential and callable densities carry the rule's
    quadrature error plus the truncation beyond (K+1)*h.
    """
    if isinstance(f, SquareDensity):
        if not (0 <= f.k0 <= spec.K):
            raise ConfigError(f"square level k0={f.k0} outside grid levels 0..{spec.K}")
        w = np.zeros(spec.shape)
        w[:, f.k0] = 1.0 / spec.m
        return GridMeasure(spec, w)
    if isinstance(f, ExponentialDensity):
        if not (f.alpha > 0):
            raise ConfigError(f"exponential rate must be positive, got {f.alpha}")
        a = f.alpha
        return GridMeasure(spec, _cell_quadrature(lambda y: a * np.exp(-a * y), spec, rule))
    if isinstance(f, CallableDensity):
        return GridMeasure(spec, _cell_quadrature(f.fn, spec, rule))
    raise ConfigError(f"unknown density descriptor {type(f).__name__}")


def bin_atoms(atoms, spec: GridSpec, warn_overflow: bool = True) -> GridMeasure:
    """Bin point masses onto the grid; mass beyond (K+1)*h goes to the top level."""
    import warnings

    if isinstance(atoms, AtomicMeasure):
        atoms = atoms.to_atoms()
    w = np.zeros(spec.shape)
    overflow = False
    for y, mass in atoms:
        if y < 0:
            raise ConfigError(f"atom location must be >= 0, got {y}")
        k = int(np.floor(y / spec.h))
        if k > spec.K:
            overflow = True
            k = spec.K
            j = spec.m - 1
        else:
            j = int(np.floor((y - k * spec.h) / spec.delta))
            j = min(j, spec.m - 1)
        w[j, k] += mass
    if overflow and warn_overflow:
        warnings.warn("atoms beyond the grid were binned into the top level", stacklevel=2)
    return GridMeasure(spec, w)
