"""Explicit subgeometric decay constants from Harris-type contraction data.

Two ingredients feed the machinery: a Lyapunov estimate for the weight V
(rate sigma, offset 2*sigma) and a pointwise coupling estimate below the
level set {V(y)+V(z) <= A}.  Evaluating both at a time T produces a
contraction factor gamma(T) < 1 and, from it, a prefactor C(T) and a rate
lambda(T).  In the sigma = 2 family the mixing weight beta is independent
of T, gamma has a closed form, and the T -> 0 limits give the headline
pair C ~ 5.5465, lambda ~ 0.1202.

The quadratic that determines beta is implemented in two sign variants,
selected by `sign_variant`:

* ``balanced`` (default): linear coefficient
  gamma_H - gamma_L + K*(1 - 1/A).  This is the variant whose root
  balances the two branches of the gamma maximum, and it reproduces the
  headline constants: beta = (sqrt(265) - 11)/24.
* ``flipped``: linear coefficient gamma_H - gamma_L - K*(1 - 1/A),
  giving beta = 3/4 in the sigma = 2 family.  Its gamma comes out >= 1
  at every T, so no per-T certificate exists; only the limiting closed
  forms C = (1+beta)/beta and lambda = 2/(3C) are defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NoCertificateError

__all__ = [
    "SIGN_VARIANTS",
    "HarrisInputs",
    "HarrisConstants",
    "lyapunov_constants",
    "coupling_constant",
    "beta_root",
    "gamma_rate",
    "constants_at",
    "limiting_beta",
    "limiting_constants",
    "harris_constants",
    "lambda_scan",
    "alpha_of_x",
]

SIGN_VARIANTS = ("balanced", "flipped")


@dataclass(frozen=True)
class HarrisInputs:
    """Contraction inputs: Lyapunov rate, evaluation time, coupling level set."""

    sigma: float = 2.0
    T: float = 1.0
    A_level: float = 3.0
    C_V: float = 1.0
    omega_V: float = 0.0
    sign_variant: str = "balanced"

    def __post_init__(self):
        if not (self.sigma > 0 and self.T > 0):
            raise ConfigError(f"need sigma > 0 and T > 0, got sigma={self.sigma}, T={self.T}")
        if self.sign_variant not in SIGN_VARIANTS:
            raise ConfigError(f"sign_variant must be one of {SIGN_VARIANTS}")
        if not (self.C_V >= 1 and self.omega_V >= 0):
            raise ConfigError("need C_V >= 1 and omega_V >= 0")
        # the Lyapunov offset is b = 2*sigma; the theorem needs b/A < sigma
        if not (self.A_level > 2):
            raise ConfigError(
                f"A_level must exceed 2 so that 2*sigma/A < sigma; got {self.A_level}"
            )


@dataclass(frozen=True)
class HarrisConstants:
    """Full constants bundle at one evaluation time T."""

    T: float
    gamma_L: float
    K_lyap: float
    gamma_H: float
    beta: float
    gamma: float | None
    C_of_T: float | None
    lambda_of_T: float | None
    C_limit: float
    lambda_limit: float


def lyapunov_constants(sigma: float, T: float) -> tuple[float, float]:
    """(gamma_L, K) = (exp(-sigma*T), 2*(1 - exp(-sigma*T)))."""
    if not (sigma > 0 and T > 0):
        raise ConfigError(f"need sigma > 0 and T > 0, got sigma={sigma}, T={T}")
    e = math.exp(-sigma * T)
    return e, 2.0 * (1.0 - e)


def coupling_constant(T: float) -> float:
    """gamma_H(T) = (1 + exp(-2T))/2, in (1/2, 1)."""
    if not (T > 0):
        raise ConfigError(f"need T > 0, got {T}")
    return 0.5 * (1.0 + math.exp(-2.0 * T))


def _quadratic_coeffs(K_lyap, gamma_H, gamma_L, A_level, sign_variant):
    if sign_variant not in SIGN_VARIANTS:
        raise ConfigError(f"sign_variant must be one of {SIGN_VARIANTS}")
    slack = K_lyap * (1.0 - 1.0 / A_level)
    if sign_variant == "balanced":
        c1 = gamma_H - gamma_L + slack
    else:
        c1 = gamma_H - gamma_L - slack
    c0 = gamma_H - 1.0
    return c1, c0


def _positive_root(a, b, c):
    """Positive root of a*x^2 + b*x + c with a > 0, c < 0, computed stably."""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise NoCertificateError("quadratic has no real root")
    sq = math.sqrt(disc)
    if b >= 0:
        # avoid cancellation in -b + sq
        root = (-2.0 * c) / (b + sq)
    else:
        root = (sq - b) / (2.0 * a)
    return root


def beta_root(K_lyap, gamma_H, gamma_L, A_level, sign_variant="balanced") -> float:
    """Unique positive root of K*b^2 + c1*b + (gamma_H - 1) = 0.

    c1 carries the K*(1 - 1/A) term with the sign picked by
    ``sign_variant``.  Since gamma_H < 1, the constant term is negative
    and exactly one positive root exists whenever K > 0.
    """
    if not (K_lyap > 0):
        raise NoCertificateError(f"degenerate Lyapunov gap K={K_lyap}; no positive root")
    c1, c0 = _quadratic_coeffs(K_lyap, gamma_H, gamma_L, A_level, sign_variant)
    if c0 >= 0:
        raise NoCertificateError(f"gamma_H={gamma_H} >= 1 leaves no positive root")
    root = _positive_root(K_lyap, c1, c0)
    if not (root > 0):
        raise NoCertificateError("quadratic root is not positive")
    return root


def gamma_rate(beta, K_lyap, gamma_H, gamma_L, A_level) -> float:
    """Contraction factor gamma = max of the two mixing branches.

    Raises NoCertificateError when the maximum is >= 1, carrying both
    branch values as a diagnostic.
    """
    g1 = gamma_H + beta * K_lyap
    g2 = 1.0 - (beta / (1.0 + beta)) * (1.0 - gamma_L - K_lyap / A_level)
    g = max(g1, g2)
    if not (g < 1.0):
        raise NoCertificateError(
            f"no certificate: gamma = max({g1:.6g}, {g2:.6g}) >= 1",
            gamma=g,
            branches=(g1, g2),
        )
    return g


def constants_at(T: float, inputs: HarrisInputs) -> tuple[float, float]:
    """(C(T), lambda(T)) at one evaluation time.

    C(T) = C_V * exp(omega_V*T) * (1+beta) / (gamma*beta) and
    lambda(T) = -log(gamma)/T.  Propagates NoCertificateError when
    gamma >= 1.
    """
    inputs = replace(inputs, T=T)
    gamma_L, K_lyap = lyapunov_constants(inputs.sigma, T)
    gamma_H = coupling_constant(T)
    beta = beta_root(K_lyap, gamma_H, gamma_L, inputs.A_level, inputs.sign_variant)
    gamma = gamma_rate(beta, K_lyap, gamma_H, gamma_L, inputs.A_level)
    C = inputs.C_V * math.exp(inputs.omega_V * T) * (1.0 + beta) / (gamma * beta)
    lam = -math.log(gamma) / T
    return C, lam


def limiting_beta(inputs: HarrisInputs) -> float:
    """T -> 0 limit of beta: root of 2*sigma*b^2 + c1'*b - 1 = 0.

    Dividing the quadratic coefficients by T and letting T -> 0 gives
    K/T -> 2*sigma, (gamma_H - gamma_L)/T -> sigma - 1 and
    (gamma_H - 1)/T -> -1.
    """
    sigma, A = inputs.sigma, inputs.A_level
    slack = 2.0 * sigma * (1.0 - 1.0 / A)
    c1 = (sigma - 1.0) + slack if inputs.sign_variant == "balanced" else (sigma - 1.0) - slack
    return _positive_root(2.0 * sigma, c1, -1.0)


def limiting_constants(inputs: HarrisInputs) -> tuple[float, float]:
    """T -> 0 pair (C, lambda) = ((1+beta)/beta, 2*beta/(3*(1+beta))).

    beta is the limiting root of the rescaled quadratic; in the sigma = 2
    family this gives beta = (sqrt(265)-11)/24 (balanced) or 3/4
    (flipped).  The identity lambda * C = 2/3 holds in both variants.
    """
    beta = limiting_beta(inputs)
    C = inputs.C_V * (1.0 + beta) / beta
    lam = 2.0 * beta / (3.0 * (1.0 + beta)) / inputs.C_V
    return C, lam


def harris_constants(T: float, inputs: HarrisInputs) -> HarrisConstants:
    """Bundle every constant at time T; gamma-dependent entries are None
    when no certificate exists at that T."""
    gamma_L, K_lyap = lyapunov_constants(inputs.sigma, T)
    gamma_H = coupling_constant(T)
    beta = beta_root(K_lyap, gamma_H, gamma_L, inputs.A_level, inputs.sign_variant)
    C_limit, lambda_limit = limiting_constants(inputs)
    try:
        gamma = gamma_rate(beta, K_lyap, gamma_H, gamma_L, inputs.A_level)
        C, lam = constants_at(T, inputs)
    except NoCertificateError:
        gamma = C = lam = None
    return HarrisConstants(
        T=T,
        gamma_L=gamma_L,
        K_lyap=K_lyap,
        gamma_H=gamma_H,
        beta=beta,
        gamma=gamma,
        C_of_T=C,
        lambda_of_T=lam,
        C_limit=C_limit,
        lambda_limit=lambda_limit,
    )


def lambda_scan(inputs: HarrisInputs, Ts) -> np.ndarray:
    """lambda(T) over a grid of times; NaN where no certificate exists."""
    out = np.empty(len(Ts))
    for i, T in enumerate(Ts):
        try:
            out[i] = constants_at(float(T), inputs)[1]
        except NoCertificateError:
            out[i] = np.nan
    return out


def alpha_of_x(x: float, h: float) -> float:
    """Class-wise weight rate alpha(x) = 2*log2 / (2x + h), for x in [0, h).

    Checks the three defining inequalities that pin the coupling level
    set {V(y)+V(z) <= 3} of the class at its two lowest points:
    2 >= e^{a x}, 1 + e^{-a h} >= e^{a x}, and 2 e^{-a h} < e^{a x}.
    """
    if not (0.0 <= x < h):
        raise ConfigError(f"offset x={x} outside [0, h={h})")
    a = 2.0 * math.log(2.0) / (2.0 * x + h)
    eax = math.exp(a * x)
    eah = math.exp(-a * h)
    if not (2.0 >= eax and 1.0 + eah >= eax and 2.0 * eah < eax):
        raise NoCertificateError(
            f"alpha(x)={a:.6g} fails an admissibility condition at x={x}, h={h}"
        )
    return a
