"""Command-line front end.

Four workflows: simulate a strategy file, optimize a scenario, discretize
a continuous strategy, and run batch sweeps. All outputs are deterministic:
identical inputs produce byte-identical files.

Exit codes: 0 success, 2 configuration or input error, 3 solver did not
converge, 4 numerical divergence during integration.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import (ScenarioGrid, SweepRecord, SweepResult,
                       UncertaintyGrid, _worker_count, frontier,
                       params_for_cell, uncertainty_sweep)
from .config import ConfigError, RunConfig, load_config
from .discretize import discretize as run_discretize
from .discretize import make_objective_evaluator
from .io import (FileFormatError, read_strategy, write_json,
                 write_strategy, write_sweep_csv, write_sweep_json,
                 write_trajectory_csv)
from .objective import CostBreakdown, total_objective
from .pmp import solve
from .simulate import IntegrationDivergedError, integrate_forward

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_DIVERGED = 4


def _cost_dict(cost: CostBreakdown) -> dict:
    return {"intervention": cost.intervention_cost,
            "symptomatic": cost.symptomatic_cost,
            "death": cost.death_cost,
            "total": cost.total}


def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    strategy = read_strategy(args.strategy, cfg.grid)
    traj = integrate_forward(cfg.initial_state, strategy, cfg.params, cfg.grid)
    cost = total_objective(strategy, traj, cfg.weights)
    peak_node = int(np.argmax(traj.a))
    summary = {"terminal_deceased": traj.terminal_deceased,
               "peak_a": float(traj.a[peak_node]),
               "peak_a_time_days": float(traj.grid.times()[peak_node]),
               "cost": _cost_dict(cost)}
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "trajectory.csv", traj)
    write_json(out / "summary.json", summary)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, out: Path, args) -> int:
    sol = solve(cfg.params, cfg.initial_state, cfg.weights, cfg.sweep)
    diagnostics = {"converged": sol.converged,
                   "iterations": sol.iterations,
                   "residual": sol.residual,
                   "terminal_deceased": sol.trajectory.terminal_deceased,
                   "cost": _cost_dict(sol.cost)}
    out.mkdir(parents=True, exist_ok=True)
    write_strategy(out / "strategy.csv", sol.strategy)
    write_json(out / "solution.json", diagnostics)
    print(f"wrote {out / 'strategy.csv'} and {out / 'solution.json'}")
    if not sol.converged:
        print(f"solver did not converge: residual {sol.residual:g} after "
              f"{sol.iterations} iterations", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_discretize(cfg: RunConfig, out: Path, args) -> int:
    u_cont = read_strategy(args.strategy, cfg.grid)
    disc_cfg = cfg.discretize
    if args.levels is not None:
        disc_cfg = replace(disc_cfg, n_levels=args.levels)
    if args.switches is not None:
        disc_cfg = replace(disc_cfg, n_switches=args.switches)
    traj = integrate_forward(cfg.initial_state, u_cont, cfg.params, cfg.grid)
    j_cont = total_objective(u_cont, traj, cfg.weights).total
    evaluator = make_objective_evaluator(cfg.params, cfg.initial_state,
                                         cfg.weights, cfg.grid)
    result = run_discretize(u_cont, disc_cfg, evaluator)
    comparison = {"J_continuous": j_cont,
                  "J_discrete": result.cost,
                  "percent_gap": 100.0 * (result.cost / j_cont - 1.0),
                  "levels_used": sorted(set(result.final.levels)),
                  "switch_count": result.final.n_switches}
    out.mkdir(parents=True, exist_ok=True)
    write_strategy(out / "discrete_strategy.csv", result.final.to_strategy())
    write_json(out / "comparison.json", comparison)
    print(f"wrote {out / 'discrete_strategy.csv'} and "
          f"{out / 'comparison.json'}")
    return EXIT_OK


def _reoptimized_uncertainty(grid: UncertaintyGrid, sweep_cfg) -> SweepResult:
    """Sweep variant that re-solves each cell instead of re-simulating
    the frozen strategy. Much slower; opt-in via --reoptimize."""
    cells = [(float(r0), float(ifr))
             for r0 in grid.r0_values() for ifr in grid.ifr_values()]

    def cell(args):
        r0, ifr = args
        p = params_for_cell(r0, ifr, grid.base_params, grid.initial_state.s)
        coords = (("r0", r0), ("ifr", ifr), ("beta", p.beta), ("mu", p.mu))
        try:
            sol = solve(p, grid.initial_state, grid.weights, sweep_cfg)
        except IntegrationDivergedError:
            return SweepRecord(coords, float("nan"), None, float("nan"),
                               False, None)
        return SweepRecord(coords, sol.cost.total, None,
                           sol.trajectory.terminal_deceased, sol.converged,
                           sol.strategy)

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        records = list(pool.map(cell, cells))
    corner = records[-1]
    meta = (("worst_r0", corner.coord("r0")),
            ("worst_ifr", corner.coord("ifr")),
            ("worst_terminal_deceased", corner.terminal_deceased))
    return SweepResult("uncertainty", tuple(records), metadata=meta)


def cmd_sweep(cfg: RunConfig, out: Path, args) -> int:
    if args.mode == "frontier":
        grid = ScenarioGrid(base_params=cfg.params,
                            initial_state=cfg.initial_state,
                            sweep=cfg.sweep, **cfg.frontier)
        result = frontier(grid)
        base = "frontier"
    else:
        settings = cfg.uncertainty
        if settings.strategy_file is not None:
            strategy = read_strategy(settings.strategy_file, cfg.grid)
        else:
            nominal = solve(cfg.params, cfg.initial_state, cfg.weights,
                            cfg.sweep)
            strategy = nominal.strategy
        grid = UncertaintyGrid(strategy=strategy,
                               r0_range=settings.r0_range,
                               ifr_range=settings.ifr_range,
                               r0_points=settings.r0_points,
                               ifr_points=settings.ifr_points,
                               nominal=settings.nominal,
                               base_params=cfg.params,
                               initial_state=cfg.initial_state,
                               weights=cfg.weights)
        if args.reoptimize:
            result = _reoptimized_uncertainty(grid, cfg.sweep)
        else:
            result = uncertainty_sweep(grid)
        base = "uncertainty"
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / f"{base}.csv", result)
    write_sweep_json(out / f"{base}.json", result)
    print(f"wrote {out / (base + '.csv')} and {out / (base + '.json')}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidare",
        description="Optimal and discrete intervention strategies for the "
                    "controlled SIDARE epidemic model.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="FILE",
                       help="YAML run configuration; defaults apply when "
                            "omitted")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default from config)")

    p = sub.add_parser("simulate",
                       help="integrate a strategy file and report outcomes")
    common(p)
    p.add_argument("--strategy", metavar="FILE", required=True,
                   help="strategy file to integrate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize",
                       help="solve for the optimal continuous strategy")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("discretize",
                       help="approximate a continuous strategy with few "
                            "levels and switches")
    common(p)
    p.add_argument("--strategy", metavar="FILE", required=True,
                   help="continuous strategy file to approximate")
    p.add_argument("--levels", type=int, metavar="N1",
                   help="override the distinct-level budget")
    p.add_argument("--switches", type=int, metavar="N2",
                   help="override the switch budget")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("sweep", help="batch frontier or uncertainty study")
    common(p)
    p.add_argument("--mode", choices=("frontier", "uncertainty"),
                   required=True)
    p.add_argument("--reoptimize", action="store_true",
                   help="uncertainty mode: re-solve each cell instead of "
                        "re-simulating the frozen strategy")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        out = Path(args.out) if args.out else Path(cfg.output_dir)
        return args.func(cfg, out, args)
    except (ConfigError, FileFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
