"""Cost functional: intervention effort, symptomatic burden, terminal deaths.

J(u) = int 1/2 u^2 dt + theta_a int 1/2 a^2 dt + theta_e * e(T),
evaluated with trapezoidal quadrature on the integration grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulate import Strategy, Trajectory


@dataclass(frozen=True)
class CostWeights:
    """theta_a weights the acutely-symptomatic burden, theta_e terminal deaths."""

    theta_a: float = 0.0
    theta_e: float = 0.0

    def __post_init__(self):
        if self.theta_a < 0 or self.theta_e < 0:
            raise ValueError(
                f"cost weights must be non-negative, got "
                f"theta_a={self.theta_a}, theta_e={self.theta_e}"
            )


@dataclass(frozen=True)
class CostBreakdown:
    intervention_cost: float
    symptomatic_cost: float
    death_cost: float

    def __post_init__(self):
        for name in ("intervention_cost", "symptomatic_cost", "death_cost"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> float:
        return self.intervention_cost + self.symptomatic_cost + self.death_cost


def running_cost(u: Strategy, traj: Trajectory, w: CostWeights) -> CostBreakdown:
    """Integral part of the cost (no death term)."""
    if u.grid != traj.grid:
        raise ValueError("strategy and trajectory grids do not match")
    dt = u.grid.dt
    intervention = float(np.trapezoid(0.5 * u.values**2, dx=dt))
    symptomatic = float(w.theta_a * np.trapezoid(0.5 * traj.a**2, dx=dt))
    return CostBreakdown(intervention, symptomatic, 0.0)


def total_objective(u: Strategy, traj: Trajectory, w: CostWeights) -> CostBreakdown:
    """Running cost plus theta_e times the terminal deceased fraction."""
    run = running_cost(u, traj, w)
    death = float(w.theta_e * traj.states[-1, 4])
    return CostBreakdown(run.intervention_cost, run.symptomatic_cost, death)


def normalize_cost(raw: float, basis: float) -> float:
    """Express a cost as a percentage of a reference cost."""
    if not basis > 0:
        raise ValueError(f"normalization basis must be positive, got {basis}")
    return 100.0 * raw / basis
