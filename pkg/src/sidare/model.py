"""Controlled SIDARE compartmental model.

States are population fractions (Susceptible, Infected undetected, infected
Detected, Acutely symptomatic, Recovered, Extinct/deceased).  The recovered
compartment is redundant under the constant-population assumption and is
always reconstructed as ``r = 1 - s - i - d - a - e`` rather than integrated,
which keeps conservation exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

STATE_TOL = 1e-9


class Stability(enum.Enum):
    LOCALLY_STABLE = "locally_stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class EpidemicState:
    """Compartment fractions (s, i, d, a, r, e), each in [0, 1], summing to 1."""

    s: float
    i: float
    d: float
    a: float
    r: float
    e: float

    def __post_init__(self):
        for name in ("s", "i", "d", "a", "r", "e"):
            v = getattr(self, name)
            if not (-STATE_TOL <= v <= 1.0 + STATE_TOL):
                raise ValueError(f"compartment {name}={v} outside [0, 1]")
        total = self.s + self.i + self.d + self.a + self.r + self.e
        if abs(total - 1.0) > STATE_TOL:
            raise ValueError(f"compartments sum to {total}, expected 1")

    @classmethod
    def from_vector(cls, v) -> "EpidemicState":
        """Build from the integrated 5-vector (s, i, d, a, e); r by conservation."""
        s, i, d, a, e = (float(x) for x in v)
        # summation order matches Trajectory.r so both derivations agree
        # bit for bit
        return cls(s=s, i=i, d=d, a=a, r=1.0 - (s + i + d + a + e), e=e)

    def as_vector(self) -> tuple[float, float, float, float, float]:
        """The five integrated components (s, i, d, a, e)."""
        return (self.s, self.i, self.d, self.a, self.e)


#: Outbreak onset: 0.001% infected, nothing detected, no deaths or recoveries.
INITIAL_STATE = EpidemicState(s=1.0 - 1e-5, i=1e-5, d=0.0, a=0.0, r=0.0, e=0.0)


@dataclass(frozen=True)
class ModelParams:
    """SIDARE rates (1/day), healthcare capacity and control bound.

    ``mu`` applies to acutely symptomatic patients while the healthcare system
    copes (a <= h_bar); ``mu_hat`` to the excess above capacity.  ``u_max`` is
    the strictest implementable intervention intensity.
    """

    beta: float = 0.251
    gamma_i: float = 1.0 / 14.0
    gamma_d: float = 1.0 / 14.0
    gamma_a: float = 1.0 / 12.4
    nu: float = 0.0
    xi_i: float = 0.0053
    xi_d: float = 0.0053
    mu: float = 0.0085
    mu_hat: float = 5 * 0.0085
    h_bar: float = 0.00333
    u_max: float = 0.8

    def __post_init__(self):
        for name in ("beta", "gamma_i", "gamma_d", "gamma_a", "nu",
                     "xi_i", "xi_d", "mu", "mu_hat"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate {name} must be non-negative")
        if not self.mu < self.mu_hat:
            raise ValueError("overload mortality mu_hat must exceed mu")
        if not 0 < self.u_max <= 1:
            raise ValueError("u_max must lie in (0, 1]")
        if not 0 < self.h_bar < 1:
            raise ValueError("h_bar must lie in (0, 1)")

    def replace(self, **changes) -> "ModelParams":
        import dataclasses

        return dataclasses.replace(self, **changes)

    def as_rate_tuple(self) -> tuple[float, ...]:
        """Packed rates in kernel order."""
        return (self.beta, self.gamma_i, self.gamma_d, self.gamma_a, self.nu,
                self.xi_i, self.xi_d, self.mu, self.mu_hat, self.h_bar)


@dataclass(frozen=True)
class EquilibriumClassification:
    stability: Stability
    threshold: float
    #: Nontrivial Jacobian eigenvalues at the equilibrium:
    #: (-gamma_d - xi_d, -gamma_a - mu, beta*s_star - gamma_i - xi_i - nu).
    eigenvalues: tuple[float, float, float]


def capacity_mortality(a: float, p: ModelParams) -> float:
    """Mortality outflow of the acute compartment, capped by healthcare capacity.

    Piecewise linear in ``a``: slope ``mu`` up to capacity ``h_bar``, slope
    ``mu_hat`` beyond it.  Continuous at the kink; the kink itself uses the
    sub-capacity branch.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"acute fraction a={a} outside [0, 1]")
    if a <= p.h_bar:
        return p.mu * a
    return p.mu * p.h_bar + p.mu_hat * (a - p.h_bar)


def vector_field(x: EpidemicState, u: float, p: ModelParams) -> tuple[float, ...]:
    """Time derivatives of the five integrated compartments (s, i, d, a, e).

    The implied dr/dt equals minus their sum, so the six-compartment total is
    conserved exactly.
    """
    if not 0.0 <= u <= p.u_max:
        raise ValueError(f"control u={u} outside [0, {p.u_max}]")
    infection = p.beta * x.s * x.i * (1.0 - u)
    outflow = capacity_mortality(x.a, p)
    ds = -infection
    di = infection - (p.gamma_i + p.xi_i + p.nu) * x.i
    dd = p.nu * x.i - (p.gamma_d + p.xi_d) * x.d
    da = p.xi_i * x.i + p.xi_d * x.d - p.gamma_a * x.a - outflow
    de = outflow
    return (ds, di, dd, da, de)


def basic_reproduction_number(p: ModelParams, s0: float = INITIAL_STATE.s) -> float:
    """beta * s0 / (gamma_i + xi_i + nu)."""
    denom = p.gamma_i + p.xi_i + p.nu
    if denom <= 0:
        raise ValueError("gamma_i + xi_i + nu must be positive")
    return p.beta * s0 / denom

def beta_from_r0(r0: float, p: ModelParams, s0: float = INITIAL_STATE.s) -> float:
    """Invert the reproduction-number relation for beta.

    The onset convention pins the testing rate to zero, so the scenario's
    ``nu`` does not enter even when nonzero.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    return r0 * (p.gamma_i + p.xi_i) / s0


def classify_equilibrium(s_star: float, p: ModelParams) -> EquilibriumClassification:
    """Stability of a disease-free equilibrium with susceptible fraction s_star.

    Locally stable below the threshold (gamma_i + xi_i + nu) / beta, unstable
    above it, marginal exactly at it.  With beta = 0 the threshold is infinite
    and every admissible s_star classifies as locally stable.
    """
    if not 0.0 <= s_star <= 1.0:
        raise ValueError(f"s_star={s_star} outside [0, 1]")
    if p.beta == 0:
        threshold = math.inf
    else:
        threshold = (p.gamma_i + p.xi_i + p.nu) / p.beta
    eigs = (-p.gamma_d - p.xi_d,
            -p.gamma_a - p.mu,
            p.beta * s_star - p.gamma_i - p.xi_i - p.nu)
    if s_star < threshold:
        stability = Stability.LOCALLY_STABLE
    elif s_star > threshold:
        stability = Stability.UNSTABLE
    else:
        stability = Stability.MARGINAL
    return EquilibriumClassification(stability, threshold, eigs)
