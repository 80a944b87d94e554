"""Fixed-grid integration of the controlled epidemic and its costate.

The state is advanced with classical RK4 at a fixed step; the control is
piecewise constant per grid cell, sampled at the cell's left endpoint for
every stage.  The costate runs backward from its terminal condition with
the same scheme, using cubic Hermite midpoints of the stored trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .model import STATE_TOL, EpidemicState, ModelParams


class IntegrationDivergedError(RuntimeError):
    """A state left [0, 1] by more than the clamping tolerance.

    Usually a sign that the step size is too large for the parameters,
    or that the control signal is inadmissible.
    """

    def __init__(self, node: int, time: float):
        self.node = node
        self.time = time
        super().__init__(
            f"state invariant violated at node {node} (t = {time:g} days); "
            "the integration step may be too large"
        )


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, horizon] with node spacing dt (both in days)."""

    horizon: float = 365.0
    dt: float = 0.1

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        ratio = self.horizon / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"horizon {self.horizon} is not an integer multiple of dt {self.dt}"
            )
        if round(ratio) < 1:
            raise ValueError("grid needs at least two nodes")

    @property
    def n_nodes(self) -> int:
        return int(round(self.horizon / self.dt)) + 1

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_nodes)

    def node_at(self, t: float) -> int:
        """Nearest grid node to time t; t must sit on the grid within 1e-9."""
        k = t / self.dt
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"time {t} is not on the grid (dt = {self.dt})")
        k = int(round(k))
        if not 0 <= k < self.n_nodes:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        return k


class Strategy:
    """A control signal on a grid: one value per node.

    Cell k (the interval [t_k, t_{k+1})) is governed by ``values[k]``; the
    final node's value is only cosmetic.  Values are read-only.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: TimeGrid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n_nodes,):
            raise ValueError(
                f"expected {grid.n_nodes} control values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("control values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("Strategy is immutable")

    @classmethod
    def constant(cls, grid: TimeGrid, level: float) -> "Strategy":
        return cls(grid, np.full(grid.n_nodes, float(level)))

    @classmethod
    def from_segments(cls, grid: TimeGrid, levels, switch_times) -> "Strategy":
        """Piecewise-constant signal: ``levels[j]`` holds on [t_j, t_{j+1}).

        ``switch_times`` are the n interior change points (strictly
        increasing); ``levels`` has n + 1 entries.  A node exactly at a
        switch time takes the new level.
        """
        levels = np.asarray(levels, dtype=float)
        switch_times = np.asarray(switch_times, dtype=float)
        if levels.ndim != 1 or switch_times.ndim != 1:
            raise ValueError("levels and switch_times must be 1-d")
        if len(levels) != len(switch_times) + 1:
            raise ValueError("need exactly one more level than switch times")
        if np.any(np.diff(switch_times) <= 0):
            raise ValueError("switch times must be strictly increasing")
        if len(switch_times) and (
            switch_times[0] <= 0 or switch_times[-1] >= grid.horizon
        ):
            raise ValueError("switch times must lie strictly inside (0, horizon)")
        seg = np.searchsorted(switch_times, grid.times(), side="right")
        return cls(grid, levels[seg])

    def __eq__(self, other):
        return (
            isinstance(other, Strategy)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))

    def __repr__(self):
        return (
            f"Strategy(grid={self.grid!r}, min={self.values.min():g}, "
            f"max={self.values.max():g})"
        )


class Trajectory:
    """States on a grid: rows of (s, i, d, a, e); r recovered by conservation."""

    __slots__ = ("grid", "states")

    def __init__(self, grid: TimeGrid, states):
        states = np.asarray(states, dtype=float)
        if states.shape != (grid.n_nodes, 5):
            raise ValueError(f"expected ({grid.n_nodes}, 5) states, got {states.shape}")
        states.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "states", states)

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def i(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def d(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def a(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def e(self) -> np.ndarray:
        return self.states[:, 4]

    @property
    def r(self) -> np.ndarray:
        c = self.states
        # summation order matches EpidemicState.from_vector
        return 1.0 - (c[:, 0] + c[:, 1] + c[:, 2] + c[:, 3] + c[:, 4])

    def state(self, k: int) -> EpidemicState:
        return EpidemicState.from_vector(self.states[k])

    @property
    def terminal(self) -> EpidemicState:
        return self.state(self.grid.n_nodes - 1)

    @property
    def terminal_deceased(self) -> float:
        return float(self.states[-1, 4])


class Costate:
    """Adjoint variables on a grid: rows of (lam_s, lam_i, lam_d, lam_a, lam_e)."""

    __slots__ = ("grid", "lambdas")

    def __init__(self, grid: TimeGrid, lambdas):
        lambdas = np.asarray(lambdas, dtype=float)
        if lambdas.shape != (grid.n_nodes, 5):
            raise ValueError(
                f"expected ({grid.n_nodes}, 5) costates, got {lambdas.shape}"
            )
        lambdas.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "lambdas", lambdas)

    def __setattr__(self, name, value):
        raise AttributeError("Costate is immutable")


def integrate_forward(
    x0: EpidemicState, u: Strategy, p: ModelParams, grid: TimeGrid | None = None
) -> Trajectory:
    """Advance the five integrated states over the whole grid.

    States within 1e-9 of the [0, 1] boundary are clamped onto it; larger
    violations raise IntegrationDivergedError.
    """
    if grid is None:
        grid = u.grid
    elif grid != u.grid:
        raise ValueError("strategy grid does not match integration grid")
    if u.values.min() < -1e-12 or u.values.max() > p.u_max + 1e-12:
        raise ValueError(
            f"control values must lie in [0, {p.u_max}]; "
            f"got range [{u.values.min():g}, {u.values.max():g}]"
        )
    states, bad = backend.forward_sweep(
        u.values, x0.as_vector(), p.as_rate_tuple(), grid.dt, STATE_TOL
    )
    if bad >= 0:
        raise IntegrationDivergedError(bad, bad * grid.dt)
    return Trajectory(grid, states)


def integrate_costate_backward(
    traj: Trajectory, u: Strategy, p: ModelParams, w
) -> Costate:
    """Integrate the adjoint system backward from lam(T) = (0, 0, 0, 0, theta_e).

    ``w`` supplies the cost weights (theta_a, theta_e).  The running-cost
    gradient enters the lam_a equation as a -theta_a*a forcing term; the
    capacity-mortality derivative at the kink a = h_bar uses the
    sub-capacity branch.
    """
    if traj.grid != u.grid:
        raise ValueError("trajectory and strategy grids do not match")
    lambdas = backend.backward_sweep(
        traj.states,
        u.values,
        p.as_rate_tuple(),
        float(w.theta_a),
        float(w.theta_e),
        traj.grid.dt,
    )
    return Costate(traj.grid, lambdas)
