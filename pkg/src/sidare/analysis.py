"""Batch studies built on the solver: cost/decease frontiers, weight
selection for a target decease tolerance, and parametric uncertainty sweeps.

All sweeps are deterministic. Grid cells are independent and are evaluated
on a thread pool; the compiled kernels release the GIL so cells run in
parallel when the compiled backend is active. Set SIDARE_THREADS to cap the
worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import INITIAL_STATE, EpidemicState, ModelParams, beta_from_r0
from .objective import CostBreakdown, CostWeights, total_objective
from .pmp import PmpSolution, SweepConfig, solve
from .simulate import IntegrationDivergedError, Strategy, integrate_forward


@dataclass(frozen=True)
class ReferenceScenario:
    """One row of the tolerance/testing study: a testing rate paired with
    the cost weights that hit the stated decease tolerance."""

    label: str
    tolerance: float
    nu: float
    theta_a: float
    theta_e: float

    def params(self, base: ModelParams | None = None) -> ModelParams:
        base = ModelParams() if base is None else base
        return base.replace(nu=self.nu)

    def weights(self) -> CostWeights:
        return CostWeights(theta_a=self.theta_a, theta_e=self.theta_e)


REFERENCE_SCENARIOS = (
    ReferenceScenario("1% tolerance, no testing", 0.01, 0.0, 0.0, 1600.0),
    ReferenceScenario("1% tolerance, slow testing", 0.01, 0.05, 0.0, 400.0),
    ReferenceScenario("0.1% tolerance, no testing", 0.001, 0.0, 1e5, 600.0),
    ReferenceScenario("0.1% tolerance, slow testing", 0.001, 0.05, 1e5, 1000.0),
    ReferenceScenario("0.1% tolerance, fast testing", 0.001, 0.10, 5e4, 1000.0),
    ReferenceScenario("0.01% tolerance, no testing", 0.0001, 0.0, 0.0, 2.5e4),
    ReferenceScenario("0.01% tolerance, slow testing", 0.0001, 0.05, 0.0, 1.8e4),
    ReferenceScenario("0.01% tolerance, fast testing", 0.0001, 0.10, 0.0, 1e4),
)


def default_death_weights() -> tuple[float, ...]:
    """Zero plus 40 log-spaced weights spanning (0, 2.5e4]."""
    pts = np.logspace(0.0, math.log10(2.5e4), 40)
    return (0.0,) + tuple(float(v) for v in pts)


def _worker_count() -> int:
    env = os.environ.get("SIDARE_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class ScenarioGrid:
    """Cartesian grid of solver scenarios for the frontier study.

    Values beyond the documented study ranges (testing rates up to 0.10,
    capacities near 333 per 100k, theta_e up to 2.5e4) are accepted; the
    grid only enforces shape and sign.
    """

    testing_rates: tuple[float, ...] = (0.0, 0.05, 0.10)
    capacities: tuple[float, ...] = (0.00333,)
    symptomatic_weights: tuple[float, ...] = (0.0,)
    death_weights: tuple[float, ...] = field(default_factory=default_death_weights)
    base_params: ModelParams = field(default_factory=ModelParams)
    initial_state: EpidemicState = INITIAL_STATE
    sweep: SweepConfig = field(default_factory=SweepConfig)
    basis_cost: float | None = None

    def __post_init__(self):
        for name in ("testing_rates", "capacities", "symptomatic_weights",
                     "death_weights"):
            vals = getattr(self, name)
            object.__setattr__(self, name, tuple(float(v) for v in vals))
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            if any(not math.isfinite(v) for v in vals):
                raise ValueError(f"{name} contains a non-finite value")
            if any(v < 0.0 for v in vals):
                raise ValueError(f"{name} contains a negative value")
        if any(h <= 0.0 for h in self.capacities):
            raise ValueError("capacities must be positive")
        if self.basis_cost is not None and self.basis_cost <= 0.0:
            raise ValueError("basis_cost must be positive")

    def cells(self) -> list[tuple[float, float, float, float]]:
        return [(nu, h, ta, te)
                for nu in self.testing_rates
                for h in self.capacities
                for ta in self.symptomatic_weights
                for te in self.death_weights]


@dataclass(frozen=True)
class UncertaintyGrid:
    """Grid of (reproduction number, infection fatality rate) cells over
    which a frozen strategy is re-simulated."""

    strategy: Strategy
    r0_range: tuple[float, float] = (3.17, 3.38)
    ifr_range: tuple[float, float] = (0.0039, 0.0133)
    r0_points: int = 8
    ifr_points: int = 8
    nominal: tuple[float, float] = (3.27, 0.0066)
    base_params: ModelParams = field(default_factory=ModelParams)
    initial_state: EpidemicState = INITIAL_STATE
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        if not isinstance(self.strategy, Strategy):
            raise TypeError("strategy must be a Strategy")
        for name in ("r0_range", "ifr_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} must be a finite non-degenerate range")
        if self.r0_points < 2 or self.ifr_points < 2:
            raise ValueError("grid needs at least 2 points per axis")
        r0n, ifrn = self.nominal
        if not (self.r0_range[0] <= r0n <= self.r0_range[1]):
            raise ValueError("nominal reproduction number outside r0_range")
        if not (self.ifr_range[0] <= ifrn <= self.ifr_range[1]):
            raise ValueError("nominal fatality rate outside ifr_range")

    def r0_values(self) -> np.ndarray:
        return np.linspace(self.r0_range[0], self.r0_range[1], self.r0_points)

    def ifr_values(self) -> np.ndarray:
        return np.linspace(self.ifr_range[0], self.ifr_range[1], self.ifr_points)


@dataclass(frozen=True)
class SweepRecord:
    """One grid cell: coordinate name/value pairs plus outcome metrics.

    normalized_cost is a percentage of the sweep's basis cost and is None
    for sweeps that do not define a basis (uncertainty mode).
    """

    coords: tuple[tuple[str, float], ...]
    cost: float
    normalized_cost: float | None
    terminal_deceased: float
    converged: bool
    strategy: Strategy | None = None

    def coord(self, name: str) -> float:
        for key, value in self.coords:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class SweepResult:
    kind: str
    records: tuple[SweepRecord, ...]
    metadata: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("frontier", "uncertainty"):
            raise ValueError("kind must be 'frontier' or 'uncertainty'")
        for rec in self.records:
            if rec.converged and not (0.0 <= rec.terminal_deceased <= 1.0):
                raise ValueError("terminal deceased fraction outside [0, 1]")
            if rec.converged and rec.normalized_cost is not None \
                    and rec.normalized_cost < 0.0:
                raise ValueError("normalized cost must be non-negative")

    def meta(self, name: str) -> float:
        for key, value in self.metadata:
            if key == name:
                return value
        raise KeyError(name)

    def worst_case(self) -> SweepRecord:
        ok = [r for r in self.records if r.converged]
        if not ok:
            raise ValueError("no converged records")
        return max(ok, key=lambda r: r.terminal_deceased)


def reference_basis_cost(base: ModelParams | None = None,
                         x0: EpidemicState = INITIAL_STATE,
                         sweep: SweepConfig | None = None) -> float:
    """Running cost C of the strictest no-testing reference optimum.

    This is the normalization basis for frontier plots: the intervention
    plus symptomatic cost (death term excluded) of the strategy that holds
    deceases to 0.01% without testing.
    """
    ref = REFERENCE_SCENARIOS[5]
    base = ModelParams() if base is None else base
    sweep = SweepConfig() if sweep is None else sweep
    sol = solve(ref.params(base), x0, ref.weights(), sweep)
    return sol.cost.intervention_cost + sol.cost.symptomatic_cost


def _frontier_cell(grid: ScenarioGrid, cell: tuple[float, float, float, float],
                   basis: float) -> SweepRecord:
    nu, h_bar, theta_a, theta_e = cell
    p = grid.base_params.replace(nu=nu, h_bar=h_bar)
    w = CostWeights(theta_a=theta_a, theta_e=theta_e)
    coords = (("nu", nu), ("h_bar", h_bar),
              ("theta_a", theta_a), ("theta_e", theta_e))
    try:
        sol = solve(p, grid.initial_state, w, grid.sweep)
    except IntegrationDivergedError:
        return SweepRecord(coords, math.nan, math.nan, math.nan, False, None)
    running = sol.cost.intervention_cost + sol.cost.symptomatic_cost
    return SweepRecord(coords, sol.cost.total, 100.0 * running / basis,
                       sol.trajectory.terminal_deceased, sol.converged,
                       sol.strategy)


def frontier(grid: ScenarioGrid) -> SweepResult:
    """Solve every grid cell and record its normalized running cost and
    terminal deceased fraction.

    Costs are normalized as a percentage of the basis cost (the strictest
    no-testing optimum's running cost unless the grid supplies its own).
    Per-cell failures are recorded with converged=False rather than raised.
    """
    basis = grid.basis_cost
    if basis is None:
        basis = reference_basis_cost(grid.base_params, grid.initial_state,
                                     grid.sweep)
    cells = grid.cells()
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        records = list(pool.map(
            lambda c: _frontier_cell(grid, c, basis), cells))
    return SweepResult("frontier", tuple(records),
                       metadata=(("basis_cost", basis),))


def mu_from_ifr(ifr: float, p: ModelParams) -> float:
    """Invert the infection fatality rate for the base mortality rate.

    With no testing, an infection ends in death with probability
    P(acute) * P(death | acute) = [xi_i/(gamma_i + xi_i)] * [mu/(gamma_a + mu)],
    ignoring the capacity excess term. Solving IFR = that product for mu
    gives the rate; the default parameters round-trip within 2%.
    """
    if ifr == 0.0:
        return 0.0
    if not (0.0 < ifr < 1.0) or not math.isfinite(ifr):
        raise ValueError("infection fatality rate must lie in [0, 1)")
    acute_prob = p.xi_i / (p.gamma_i + p.xi_i)
    death_given_acute = ifr / acute_prob
    if death_given_acute >= 1.0:
        raise ValueError(
            f"infection fatality rate {ifr:g} is not representable: it would "
            f"require P(death | acute) = {death_given_acute:g} >= 1; the "
            f"largest representable rate is just under {acute_prob:g}")
    return death_given_acute * p.gamma_a / (1.0 - death_given_acute)


def params_for_cell(r0: float, ifr: float, base: ModelParams,
                    s0: float = INITIAL_STATE.s) -> ModelParams:
    """Rebuild transmission and mortality rates for one uncertainty cell.

    The excess mortality rate keeps its nominal ratio to the base rate.
    """
    beta = beta_from_r0(r0, base, s0)
    mu = mu_from_ifr(ifr, base)
    ratio = base.mu_hat / base.mu if base.mu > 0.0 else 5.0
    return base.replace(beta=beta, mu=mu, mu_hat=ratio * mu)


def _uncertainty_cell(grid: UncertaintyGrid, r0: float,
                      ifr: float) -> SweepRecord:
    p = params_for_cell(r0, ifr, grid.base_params, grid.initial_state.s)
    coords = (("r0", r0), ("ifr", ifr), ("beta", p.beta), ("mu", p.mu))
    try:
        traj = integrate_forward(grid.initial_state, grid.strategy, p)
    except IntegrationDivergedError:
        return SweepRecord(coords, math.nan, None, math.nan, False, None)
    cost = total_objective(grid.strategy, traj, grid.weights)
    return SweepRecord(coords, cost.total, None, traj.terminal_deceased,
                       True, grid.strategy)


def uncertainty_sweep(grid: UncertaintyGrid) -> SweepResult:
    """Re-simulate a frozen strategy across the (R0, IFR) grid.

    Each cell rebuilds the transmission rate from R0 and the mortality
    rates from the IFR, then integrates the unchanged strategy. The
    metadata reports the corner cell at maximum R0 and maximum IFR, which
    is the worst case when deceases are monotone in both axes.
    """
    r0s = grid.r0_values()
    ifrs = grid.ifr_values()
    cells = [(float(r0), float(ifr)) for r0 in r0s for ifr in ifrs]
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        records = list(pool.map(
            lambda c: _uncertainty_cell(grid, c[0], c[1]), cells))
    corner = records[-1]
    meta = (("worst_r0", corner.coord("r0")),
            ("worst_ifr", corner.coord("ifr")),
            ("worst_terminal_deceased", corner.terminal_deceased))
    return SweepResult("uncertainty", tuple(records), metadata=meta)


class BracketingError(ValueError):
    """Target decease tolerance is not achievable inside the weight bracket."""


def find_weight_for_tolerance(
    target_e: float,
    *,
    nu: float = 0.0,
    theta_a: float = 0.0,
    h_bar: float | None = None,
    bracket: tuple[float, float] = (0.0, 2.5e4),
    base_params: ModelParams | None = None,
    initial_state: EpidemicState = INITIAL_STATE,
    sweep: SweepConfig | None = None,
) -> tuple[float, PmpSolution]:
    """Bisect the death weight until the optimum's e(T) hits the target.

    Relies on the empirically monotone decrease of e(T) in theta_e. Stops
    when e(T) is within 5% relative of the target or the bracket narrows
    below one weight unit; raises BracketingError when the target lies
    outside what the bracket endpoints can achieve.
    """
    if not (0.0 < target_e < 1.0):
        raise ValueError("target deceased fraction must lie in (0, 1)")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 <= lo < hi):
        raise ValueError("bracket must satisfy 0 <= low < high")
    base = ModelParams() if base_params is None else base_params
    if h_bar is not None:
        base = base.replace(h_bar=h_bar)
    p = base.replace(nu=nu)
    sweep = SweepConfig() if sweep is None else sweep

    def run(theta_e: float) -> PmpSolution:
        return solve(p, initial_state, CostWeights(theta_a, theta_e), sweep)

    sol_lo = run(lo)
    e_lo = sol_lo.trajectory.terminal_deceased
    if abs(e_lo - target_e) < 0.05 * target_e:
        return lo, sol_lo
    sol_hi = run(hi)
    e_hi = sol_hi.trajectory.terminal_deceased
    if abs(e_hi - target_e) < 0.05 * target_e:
        return hi, sol_hi
    if target_e > e_lo or target_e < e_hi:
        raise BracketingError(
            f"target {target_e:g} outside the achievable deceased range "
            f"[{e_hi:g}, {e_lo:g}] for weights in [{lo:g}, {hi:g}]")

    mid, sol = lo, sol_lo
    while hi - lo >= 1.0:
        mid = 0.5 * (lo + hi)
        sol = run(mid)
        e_mid = sol.trajectory.terminal_deceased
        if abs(e_mid - target_e) < 0.05 * target_e:
            return mid, sol
        if e_mid > target_e:
            lo = mid
        else:
            hi = mid
    return mid, sol
