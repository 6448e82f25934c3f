"""Long-time limits: period folding, point-mass collapse, decay envelopes.

The dynamics never moves mass between wealth classes, so its long-time
limit folds each class onto its base point: summing all level masses
into level 0, offset by offset.  `decay_envelope` evaluates the
certified algebraic bound on the distance to that limit, with constants
produced by the `harris` module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .measures import AtomicMeasure, GridMeasure, flat_norm, total_mass

__all__ = [
    "HarrisEnvelope",
    "project_ph",
    "project_p0",
    "decay_envelope",
    "wealth_loss",
    "ph_p0_distance",
    "ph_p0_ratio",
]


@dataclass(frozen=True)
class HarrisEnvelope:
    """Right-hand side data of the decay bound C*d0/(1 + eta*B0*t/3)^lambda."""

    C: float
    lam: float
    eta: float
    B0: float
    d0: float

    def __post_init__(self):
        if not (self.C >= 1 and self.lam > 0 and self.B0 >= 0 and self.d0 >= 0):
            raise ConfigError(
                f"envelope needs C >= 1, lam > 0, B0 >= 0, d0 >= 0; got "
                f"C={self.C}, lam={self.lam}, B0={self.B0}, d0={self.d0}"
            )


def project_ph(mu: GridMeasure) -> GridMeasure:
    """Fold the measure onto [0, h): level-0 mass becomes the column sum.

    Exact on the aligned grid (no interpolation), preserves total mass
    exactly, linear, and idempotent.
    """
    w = np.zeros(mu.spec.shape)
    w[:, 0] = mu.w.sum(axis=1)
    return GridMeasure(mu.spec, w)


def project_p0(mu: GridMeasure) -> AtomicMeasure:
    """Collapse the whole measure to a single atom at 0 carrying its mass."""
    return AtomicMeasure([(0.0, total_mass(mu))])


def decay_envelope(t, env: HarrisEnvelope):
    """Envelope C*d0 / (1 + eta*B0*t/3)^lambda, vectorized in t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigError("decay_envelope needs t >= 0")
    out = env.C * env.d0 / (1.0 + env.eta * env.B0 * t / 3.0) ** env.lam
    return float(out) if out.ndim == 0 else out


def wealth_loss(mu: GridMeasure) -> float:
    """Wealth handed over by players that end below h: h * sum_k k * mu_k.

    Satisfies first_moment(mu) = first_moment(project_ph(mu)) + wealth_loss(mu)
    exactly on the grid.
    """
    k = np.arange(mu.spec.K + 1)
    return float(mu.spec.h * (k * mu.w).sum())


def ph_p0_distance(mu: GridMeasure, convention: str = "max", weight: str = "V") -> float:
    """Flat distance between the period fold and the point-mass collapse."""
    folded = project_ph(mu)
    atoms = folded.to_atoms()
    m = total_mass(mu)
    if m != 0.0:
        atoms.append((0.0, -m))
    return flat_norm(atoms, weight=weight, convention=convention, h=mu.spec.h)


def ph_p0_ratio(mu: GridMeasure, convention: str = "max", weight: str = "V") -> float:
    """Ratio of ph_p0_distance to the flat norm of mu.

    For nonnegative measures the ratio is bounded by h: folding moves
    each unit of mass by at most its offset, and the flat norm of a
    nonnegative measure is at least its mass.  Signed measures with
    near-cancelling atoms on opposite sides of a period boundary can
    exceed the bound.
    """
    denom = flat_norm(mu, weight=weight, convention=convention)
    if denom == 0.0:
        return 0.0
    return ph_p0_distance(mu, convention=convention, weight=weight) / denom
