"""Deterministic file formats: strategy files, trajectory tables, sweep
tables, and JSON summaries.

Strategy files are lossless: control values are written with shortest
exact float representation and re-read bit for bit. Tabular CSV output
uses 12 significant digits, '.' decimal separator, and LF line endings so
that regression runs compare byte for byte.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .analysis import SweepResult
from .simulate import Strategy, TimeGrid, Trajectory

STRATEGY_HEADER = "# sidare strategy v1"


class FileFormatError(ValueError):
    """Raised when an input file does not match its documented format."""


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_strategy(path, strategy: Strategy) -> None:
    """Write a piecewise-constant control as (time, value) change points.

    Rows mark every node where the value changes; each value holds until
    the next row's time. The first row is always t = 0 and the last always
    t = horizon, so files are self-delimiting.
    """
    grid = strategy.grid
    times = grid.times()
    u = strategy.values
    lines = [STRATEGY_HEADER,
             f"# horizon_days={grid.horizon!r}",
             f"# dt_days={grid.dt!r}",
             "time_days,u"]
    last = grid.n_nodes - 1
    for k in range(grid.n_nodes):
        if k == 0 or k == last or u[k] != u[k - 1]:
            lines.append(f"{float(times[k])!r},{float(u[k])!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_strategy(path, grid: TimeGrid | None = None) -> Strategy:
    """Read a strategy file back into a per-node control.

    When a grid is supplied the file header must agree with it; otherwise
    the grid is reconstructed from the header.
    """
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw or raw[0] != STRATEGY_HEADER:
        raise FileFormatError(f"{path}: missing '{STRATEGY_HEADER}' header")
    meta = {}
    body = []
    for ln in raw[1:]:
        if ln.startswith("#"):
            key, _, val = ln.lstrip("# ").partition("=")
            meta[key.strip()] = val.strip()
        else:
            body.append(ln)
    try:
        horizon = float(meta["horizon_days"])
        dt = float(meta["dt_days"])
    except (KeyError, ValueError) as exc:
        raise FileFormatError(f"{path}: bad or missing grid metadata") from exc
    if grid is None:
        grid = TimeGrid(horizon=horizon, dt=dt)
    elif abs(grid.horizon - horizon) > 1e-9 or abs(grid.dt - dt) > 1e-12:
        raise FileFormatError(
            f"{path}: file grid ({horizon} d, dt={dt}) does not match the "
            f"requested grid ({grid.horizon} d, dt={grid.dt})")
    if not body or body[0] != "time_days,u":
        raise FileFormatError(f"{path}: missing 'time_days,u' column header")

    nodes = []
    vals = []
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise FileFormatError(f"{path}: malformed row {ln!r}")
        try:
            t, v = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise FileFormatError(f"{path}: malformed row {ln!r}") from exc
        k = round(t / grid.dt)
        if not (0 <= k < grid.n_nodes) or abs(t - k * grid.dt) > 1e-6 * grid.dt:
            raise FileFormatError(f"{path}: time {t!r} is not on the grid")
        if nodes and k <= nodes[-1]:
            raise FileFormatError(f"{path}: times must be strictly increasing")
        if not math.isfinite(v):
            raise FileFormatError(f"{path}: non-finite value in row {ln!r}")
        nodes.append(k)
        vals.append(v)
    if not nodes or nodes[0] != 0:
        raise FileFormatError(f"{path}: first row must be at time 0")
    if nodes[-1] != grid.n_nodes - 1:
        raise FileFormatError(f"{path}: last row must be at the horizon")

    values = np.empty(grid.n_nodes)
    for j in range(len(nodes) - 1):
        values[nodes[j]:nodes[j + 1]] = vals[j]
    values[nodes[-1]] = vals[-1]
    return Strategy(grid, values)


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Per-node table of (time, s, i, d, a, r, e)."""
    times = traj.grid.times()
    cols = (traj.s, traj.i, traj.d, traj.a, traj.r, traj.e)
    lines = ["time_days,s,i,d,a,r,e"]
    for k in range(traj.grid.n_nodes):
        row = [_fmt(times[k])] + [_fmt(c[k]) for c in cols]
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


FRONTIER_COLUMNS = ("nu", "h_bar", "theta_a", "theta_e",
                    "cost", "normalized_cost", "terminal_deceased", "converged")
UNCERTAINTY_COLUMNS = ("r0", "ifr", "beta", "mu",
                       "cost", "terminal_deceased", "converged")


def write_sweep_csv(path, result: SweepResult) -> None:
    """One row per grid cell; columns fixed per sweep kind."""
    columns = FRONTIER_COLUMNS if result.kind == "frontier" \
        else UNCERTAINTY_COLUMNS
    lines = [",".join(columns)]
    for rec in result.records:
        fields = dict(rec.coords)
        fields["cost"] = rec.cost
        fields["terminal_deceased"] = rec.terminal_deceased
        if result.kind == "frontier":
            fields["normalized_cost"] = rec.normalized_cost
        row = []
        for col in columns:
            if col == "converged":
                row.append("true" if rec.converged else "false")
            else:
                row.append(_fmt(fields[col]))
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_json(path, result: SweepResult) -> None:
    """JSON mirror of the sweep CSV plus sweep-level metadata."""
    records = []
    for rec in result.records:
        item = {name: value for name, value in rec.coords}
        item["cost"] = rec.cost
        if result.kind == "frontier":
            item["normalized_cost"] = rec.normalized_cost
        item["terminal_deceased"] = rec.terminal_deceased
        item["converged"] = rec.converged
        records.append(item)
    payload = {"kind": result.kind,
               "metadata": {name: value for name, value in result.metadata},
               "records": records}
    write_json(path, payload)


def write_json(path, payload) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
