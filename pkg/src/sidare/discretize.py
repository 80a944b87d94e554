"""Local search converting a continuous strategy into a discrete policy schedule.

Pipeline: project the continuous control onto a small set of levels, prune
the switch count down to budget, then alternate level replacement with
switch-time refinement until no single move improves the cost.  Both
searches accept only strictly improving moves, so their accepted-cost
sequences decrease monotonically and termination is guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simulate import Strategy, TimeGrid


@dataclass(frozen=True)
class PolicyCatalog:
    """Ordered admissible policy levels (strictly increasing, within [0, 1])."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if not levels:
            raise ValueError("policy catalog must not be empty")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("catalog levels must be strictly increasing")
        if levels[0] < 0.0 or levels[-1] > 1.0:
            raise ValueError("catalog levels must lie within [0, 1]")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def uniform(cls, u_max: float = 0.8, step: float = 0.01) -> "PolicyCatalog":
        n = int(round(u_max / step))
        if abs(n * step - u_max) > 1e-9:
            raise ValueError("u_max must be an integer multiple of step")
        return cls(tuple(k * step for k in range(n + 1)))

    def __len__(self):
        return len(self.levels)

    def nearest_index(self, value: float) -> int:
        """Index of the closest level; ties go to the lower level."""
        arr = np.asarray(self.levels)
        dist = np.abs(arr - value)
        best = dist.min()
        return int(np.flatnonzero(dist <= best + 1e-15)[0])

    def index_of(self, level: float) -> int:
        arr = np.asarray(self.levels)
        hits = np.flatnonzero(np.abs(arr - level) <= 1e-12)
        if len(hits) == 0:
            raise ValueError(f"level {level!r} is not in the catalog")
        return int(hits[0])


@dataclass(frozen=True)
class DiscreteStrategy:
    """Piecewise-constant policy: ``levels[j]`` holds between switches j-1 and j.

    ``switch_nodes`` are grid-node indices, strictly increasing and interior;
    adjacent segments always carry different levels.
    """

    grid: TimeGrid
    levels: tuple
    switch_nodes: tuple = ()

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        nodes = tuple(int(k) for k in self.switch_nodes)
        if len(levels) != len(nodes) + 1:
            raise ValueError("need exactly one more level than switches")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ValueError("switch nodes must be strictly increasing")
        last = self.grid.n_nodes - 1
        if nodes and (nodes[0] <= 0 or nodes[-1] >= last):
            raise ValueError("switch nodes must be interior grid nodes")
        if any(a == b for a, b in zip(levels, levels[1:])):
            raise ValueError("adjacent segments must have different levels")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "switch_nodes", nodes)

    @property
    def n_switches(self) -> int:
        return len(self.switch_nodes)

    @property
    def switch_times(self) -> tuple:
        return tuple(k * self.grid.dt for k in self.switch_nodes)

    @property
    def distinct_levels(self) -> tuple:
        return tuple(sorted(set(self.levels)))

    def node_values(self) -> np.ndarray:
        seg = np.searchsorted(
            np.asarray(self.switch_nodes), np.arange(self.grid.n_nodes), side="right"
        )
        return np.asarray(self.levels)[seg]

    def to_strategy(self) -> Strategy:
        return Strategy(self.grid, self.node_values())

    def key(self) -> tuple:
        return (self.levels, self.switch_nodes)


def _normalized(grid: TimeGrid, starts, levels) -> DiscreteStrategy:
    """Build a DiscreteStrategy from raw segments, dropping degenerate ones.

    ``starts`` begins with 0; zero-length segments vanish (their switch
    merged away), boundary-touching switches delete the leading or trailing
    segment, and equal-level neighbours coalesce.
    """
    last = grid.n_nodes - 1
    bounds = list(starts) + [last]
    n = len(levels)
    kept = []
    for j in range(n):
        if j < n - 1:
            if bounds[j + 1] <= bounds[j]:
                continue
        elif bounds[j] >= last:
            continue
        kept.append((bounds[j], levels[j]))

    merged_starts = []
    merged_levels = []
    for start, lvl in kept:
        if merged_levels and merged_levels[-1] == lvl:
            continue
        merged_starts.append(start)
        merged_levels.append(lvl)
    if not merged_levels:
        raise ValueError("strategy collapsed to zero segments")
    return DiscreteStrategy(grid, tuple(merged_levels), tuple(merged_starts[1:]))


def from_node_levels(grid: TimeGrid, values) -> DiscreteStrategy:
    """Run-length encode per-node levels into a DiscreteStrategy."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ValueError("need one level per grid node")
    change = np.flatnonzero(np.diff(values)) + 1
    levels = tuple(values[[0, *change]])
    return DiscreteStrategy(grid, levels, tuple(int(k) for k in change))


@dataclass(frozen=True)
class DiscretizeConfig:
    n_levels: int = 4
    n_switches: int = 6
    delta: float = 1.0
    catalog: PolicyCatalog = field(default_factory=PolicyCatalog.uniform)

    def __post_init__(self):
        if self.n_levels < 1:
            raise ValueError("n_levels must be at least 1")
        if self.n_switches < 0:
            raise ValueError("n_switches must be non-negative")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.n_levels > 1 and len(self.catalog) < 2:
            raise ValueError("catalog needs at least 2 levels when n_levels > 1")


class Evaluator:
    """Memoizing cost evaluator for discrete strategies.

    Wraps a callable DiscreteStrategy -> float; identical (levels,
    switch_nodes) pairs are computed once.  ``calls`` counts logical
    evaluations, ``misses`` actual simulations.
    """

    def __init__(self, fn):
        self._fn = fn
        self._cache = {}
        self.calls = 0
        self.misses = 0

    def __call__(self, d: DiscreteStrategy) -> float:
        self.calls += 1
        key = d.key()
        hit = self._cache.get(key)
        if hit is None:
            hit = float(self._fn(d))
            self._cache[key] = hit
            self.misses += 1
        return hit


def make_objective_evaluator(p, x0, w, grid: TimeGrid) -> Evaluator:
    """Total-objective evaluator (simulation-backed) for discrete strategies."""
    from .objective import total_objective
    from .simulate import integrate_forward

    def fn(d: DiscreteStrategy) -> float:
        s = d.to_strategy()
        traj = integrate_forward(x0, s, p)
        return total_objective(s, traj, w).total

    return Evaluator(fn)


def project_to_levels(u_cont: Strategy, cfg: DiscretizeConfig) -> DiscreteStrategy:
    """Snap the continuous control onto n_levels catalog levels, per node.

    The level set is built from n_levels equally spaced targets between the
    control's min and max, each projected onto the catalog; every node then
    maps to the nearest of those levels, ties to the lower one.
    """
    if cfg.n_levels < 2:
        raise ValueError("projection needs n_levels >= 2")
    vals = u_cont.values
    if vals.size == 0:
        raise ValueError("empty strategy")
    lo, hi = float(vals.min()), float(vals.max())
    targets = [lo + i * (hi - lo) / (cfg.n_levels - 1) for i in range(cfg.n_levels)]
    level_set = sorted({cfg.catalog.levels[cfg.catalog.nearest_index(t)] for t in targets})
    arr = np.asarray(level_set)
    dist = np.abs(vals[:, None] - arr[None, :])
    # ties go to the lower level: argmin picks the first minimum
    choice = np.argmin(dist + 1e-18 * np.arange(len(arr)), axis=1)
    return from_node_levels(u_cont.grid, arr[choice])


def _drop_switches(v: DiscreteStrategy, removals) -> DiscreteStrategy:
    """Remove the given switch indices; each omitted switch lets the
    preceding level run on through the following segment."""
    removed = set(removals)
    starts = [0]
    levels = [v.levels[0]]
    current = v.levels[0]
    for j, node in enumerate(v.switch_nodes):
        if j in removed:
            continue
        current = v.levels[j + 1]
        starts.append(node)
        levels.append(current)
    return _normalized(v.grid, starts, levels)


def prune_switches(
    v_d: DiscreteStrategy, n_switches: int, evaluator
) -> DiscreteStrategy:
    """Reduce the switch count to the budget by dropping the cheapest removals.

    Each switch is scored by the cost of the strategy with that single
    switch omitted (the segment after it inherits the preceding level);
    the q lowest-cost removals are then applied jointly.  Ties break
    toward the earlier switch time.
    """
    q = v_d.n_switches - n_switches
    if q <= 0:
        return v_d
    scores = []
    for j in range(v_d.n_switches):
        cost = evaluator(_drop_switches(v_d, [j]))
        scores.append((cost, j))
    scores.sort()  # ties resolve to the earlier switch index
    removals = [j for _, j in scores[:q]]
    return _drop_switches(v_d, removals)


def _move_switch(d: DiscreteStrategy, k: int, new_node: int) -> DiscreteStrategy:
    starts = [0, *d.switch_nodes]
    starts[k + 1] = new_node
    return _normalized(d.grid, starts, list(d.levels))


def refine_switch_times(
    u_t: DiscreteStrategy, delta: float, evaluator, on_accept=None
):
    """Greedy +/-delta descent on switch times (one switch at a time).

    Each switch is nudged delta days earlier (the following level expands
    into the gap) or later (the preceding level runs longer), clamped at
    its neighbours; a move is kept only if the cost strictly drops.
    Switches that land on a neighbour or a boundary merge away.  Passes
    repeat until none of the moves improves.  Returns (strategy, cost).
    """
    grid = u_t.grid
    steps = delta / grid.dt
    if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
        raise ValueError(
            f"delta ({delta} days) must be a positive multiple of dt ({grid.dt})"
        )
    steps = int(round(steps))
    last = grid.n_nodes - 1

    best = u_t
    cost = evaluator(best)
    improved = True
    while improved:
        improved = False
        k = 0
        while k < best.n_switches:
            merged = False
            for j in (1, 2):
                nodes = best.switch_nodes
                t_k = nodes[k]
                if j == 1:
                    lo = nodes[k - 1] if k > 0 else 0
                    new = max(t_k - steps, lo)
                else:
                    hi = nodes[k + 1] if k + 1 < len(nodes) else last
                    new = min(t_k + steps, hi)
                if new == t_k:
                    continue
                candidate = _move_switch(best, k, new)
                c = evaluator(candidate)
                if c < cost:
                    merged = candidate.n_switches != best.n_switches
                    best, cost = candidate, c
                    improved = True
                    if on_accept is not None:
                        on_accept(cost)
                    if merged:
                        break
            if merged:
                break  # switch list changed shape; restart the pass
            k += 1
    return best, cost


def _used_indices_desc(d: DiscreteStrategy, catalog: PolicyCatalog) -> list:
    idx = {catalog.index_of(lvl) for lvl in d.levels}
    return sorted(idx, reverse=True)


def _replace_level(
    d: DiscreteStrategy, old_level: float, new_level: float
) -> DiscreteStrategy:
    levels = [new_level if lvl == old_level else lvl for lvl in d.levels]
    return _normalized(d.grid, [0, *d.switch_nodes], levels)


def optimize_levels(
    u_bar: DiscreteStrategy, cfg: DiscretizeConfig, evaluator, on_accept=None
):
    """Coordinate descent over policy levels with nested switch refinement.

    For each used level (largest first) the immediately lower, then the
    immediately higher catalog level is substituted everywhere that level
    applies; the candidate's switch times are refined and the whole move
    is accepted only on strict cost improvement.  Sweeps repeat until a
    full pass leaves the incumbent unchanged.  Returns (strategy, cost,
    accepted_costs).
    """
    catalog = cfg.catalog
    m_bar = len(catalog)
    incumbent = u_bar
    best_cost = evaluator(incumbent)
    accepted = []
    theta = False
    while not theta:
        theta = True
        p = _used_indices_desc(incumbent, catalog)
        m = 0
        while m < len(p):
            for n in (1, 2):
                shift = -1 if n == 1 else 1
                target = min(max(p[m] + shift, 0), m_bar - 1)
                if target == p[m]:
                    candidate = incumbent
                else:
                    candidate = _replace_level(
                        incumbent,
                        catalog.levels[p[m]],
                        catalog.levels[target],
                    )
                refined, c = refine_switch_times(candidate, cfg.delta, evaluator)
                if c < best_cost:
                    size_changed = len(
                        _used_indices_desc(refined, catalog)
                    ) != len(p)
                    incumbent, best_cost = refined, c
                    accepted.append(c)
                    if on_accept is not None:
                        on_accept(c)
                    theta = False
                    p = _used_indices_desc(incumbent, catalog)
                    if size_changed:
                        m = -1  # level set changed shape; restart the sweep
                        break
            m += 1
    return incumbent, best_cost, accepted


def enumerate_single_policy(catalog: PolicyCatalog, grid: TimeGrid, evaluator):
    """Best constant policy: evaluate every catalog level, ties to the lower."""
    best = None
    best_cost = None
    for lvl in catalog.levels:
        d = DiscreteStrategy(grid, (lvl,))
        c = evaluator(d)
        if best_cost is None or c < best_cost:
            best, best_cost = d, c
    return best, best_cost


@dataclass(frozen=True)
class DiscretizeResult:
    projected: DiscreteStrategy | None
    pruned: DiscreteStrategy | None
    final: DiscreteStrategy
    cost: float
    accepted_costs: tuple
    evaluations: int


def discretize(u_cont: Strategy, cfg: DiscretizeConfig, evaluator) -> DiscretizeResult:
    """Full pipeline: project, prune, then level/switch local search."""
    calls0 = getattr(evaluator, "calls", 0)
    if cfg.n_levels == 1:
        final, cost = enumerate_single_policy(cfg.catalog, u_cont.grid, evaluator)
        return DiscretizeResult(
            None, None, final, cost, (), getattr(evaluator, "calls", 0) - calls0
        )
    projected = project_to_levels(u_cont, cfg)
    pruned = prune_switches(projected, cfg.n_switches, evaluator)
    final, cost, accepted = optimize_levels(pruned, cfg, evaluator)
    return DiscretizeResult(
        projected,
        pruned,
        final,
        cost,
        tuple(accepted),
        getattr(evaluator, "calls", 0) - calls0,
    )
