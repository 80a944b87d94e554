"""YAML run configuration.

A config file is a mapping of nested sections, each mirroring one library
type. Every key is optional; the shipped defaults are the nominal model
parameter table. Unknown sections or keys are rejected so that typos fail
loudly instead of silently running the defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .discretize import DiscretizeConfig, PolicyCatalog
from .model import INITIAL_STATE, EpidemicState, ModelParams
from .objective import CostWeights
from .pmp import SweepConfig
from .simulate import TimeGrid


class ConfigError(ValueError):
    """Raised for malformed or invalid run configuration."""


_MODEL_KEYS = ("beta", "gamma_i", "gamma_d", "gamma_a", "nu", "xi_i",
               "xi_d", "mu", "mu_hat", "h_bar", "u_max")
_STATE_KEYS = ("s", "i", "d", "a", "r", "e")
_GRID_KEYS = ("horizon", "dt")
_WEIGHT_KEYS = ("theta_a", "theta_e")
_SWEEP_KEYS = ("max_iterations", "convergence_tol", "absolute_tol", "damping")
_DISC_KEYS = ("n_levels", "n_switches", "delta", "catalog_step")
_FRONTIER_KEYS = ("testing_rates", "capacities", "symptomatic_weights",
                  "death_weights", "basis_cost")
_UNCERTAINTY_KEYS = ("r0_range", "ifr_range", "r0_points", "ifr_points",
                     "nominal", "strategy_file")
_OUTPUT_KEYS = ("directory",)
_SECTIONS = ("model", "initial_state", "grid", "weights", "sweep",
             "discretize", "frontier", "uncertainty", "output")


@dataclass(frozen=True)
class UncertaintySettings:
    """Uncertainty sweep inputs that are resolvable before a strategy exists.

    strategy_file optionally names the frozen strategy to re-simulate; when
    absent the sweep command first solves the nominal scenario itself.
    """

    r0_range: tuple[float, float] = (3.17, 3.38)
    ifr_range: tuple[float, float] = (0.0039, 0.0133)
    r0_points: int = 8
    ifr_points: int = 8
    nominal: tuple[float, float] = (3.27, 0.0066)
    strategy_file: str | None = None


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    initial_state: EpidemicState = INITIAL_STATE
    grid: TimeGrid = field(default_factory=TimeGrid)
    weights: CostWeights = field(default_factory=CostWeights)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    discretize: DiscretizeConfig = field(default_factory=DiscretizeConfig)
    frontier: dict = field(default_factory=dict)
    uncertainty: UncertaintySettings = field(default_factory=UncertaintySettings)
    output_dir: str = "out"


def _check_mapping(raw, name):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return dict(raw)


def _take(data: dict, name: str, allowed) -> dict:
    raw = _check_mapping(data.pop(name, None), name)
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in section '{name}': {unknown}")
    return raw


def _floats(raw, name):
    try:
        return tuple(float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{name}' must be a list of numbers") from exc


def _pair(raw, name):
    vals = _floats(raw, name)
    if len(vals) != 2:
        raise ConfigError(f"'{name}' must be a pair of numbers")
    return vals


def _build(section, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{section}' settings: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a YAML config file into a RunConfig."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    data = _check_mapping(data, "top level")
    unknown = sorted(set(data) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config sections: {unknown}")

    model_kw = _take(data, "model", _MODEL_KEYS)
    params = _build("model", ModelParams,
                    **{k: float(v) for k, v in model_kw.items()})

    state_kw = _take(data, "initial_state", _STATE_KEYS)
    if state_kw:
        defaults = {k: getattr(INITIAL_STATE, k) for k in _STATE_KEYS}
        defaults.update({k: float(v) for k, v in state_kw.items()})
        initial_state = _build("initial_state", EpidemicState, **defaults)
    else:
        initial_state = INITIAL_STATE

    grid_kw = _take(data, "grid", _GRID_KEYS)
    grid = _build("grid", TimeGrid,
                  **{k: float(v) for k, v in grid_kw.items()})

    weight_kw = _take(data, "weights", _WEIGHT_KEYS)
    weights = _build("weights", CostWeights,
                     **{k: float(v) for k, v in weight_kw.items()})

    sweep_kw = _take(data, "sweep", _SWEEP_KEYS)
    if "max_iterations" in sweep_kw:
        sweep_kw["max_iterations"] = int(sweep_kw["max_iterations"])
    for key in ("convergence_tol", "absolute_tol", "damping"):
        if key in sweep_kw:
            sweep_kw[key] = float(sweep_kw[key])
    sweep = _build("sweep", SweepConfig, grid=grid, **sweep_kw)

    disc_kw = _take(data, "discretize", _DISC_KEYS)
    step = float(disc_kw.pop("catalog_step", 0.01))
    catalog = _build("discretize", PolicyCatalog.uniform,
                     u_max=params.u_max, step=step)
    if "n_levels" in disc_kw:
        disc_kw["n_levels"] = int(disc_kw["n_levels"])
    if "n_switches" in disc_kw:
        disc_kw["n_switches"] = int(disc_kw["n_switches"])
    if "delta" in disc_kw:
        disc_kw["delta"] = float(disc_kw["delta"])
    discretize = _build("discretize", DiscretizeConfig,
                        catalog=catalog, **disc_kw)

    frontier_kw = _take(data, "frontier", _FRONTIER_KEYS)
    frontier = {}
    for key in ("testing_rates", "capacities", "symptomatic_weights",
                "death_weights"):
        if key in frontier_kw:
            frontier[key] = _floats(frontier_kw[key], key)
    if frontier_kw.get("basis_cost") is not None:
        frontier["basis_cost"] = float(frontier_kw["basis_cost"])

    unc_kw = _take(data, "uncertainty", _UNCERTAINTY_KEYS)
    unc_args = {}
    for key in ("r0_range", "ifr_range", "nominal"):
        if key in unc_kw:
            unc_args[key] = _pair(unc_kw[key], key)
    for key in ("r0_points", "ifr_points"):
        if key in unc_kw:
            unc_args[key] = int(unc_kw[key])
    if unc_kw.get("strategy_file") is not None:
        unc_args["strategy_file"] = str(unc_kw["strategy_file"])
    uncertainty = _build("uncertainty", UncertaintySettings, **unc_args)

    out_kw = _take(data, "output", _OUTPUT_KEYS)
    output_dir = str(out_kw.get("directory", "out"))

    return RunConfig(params=params, initial_state=initial_state, grid=grid,
                     weights=weights, sweep=sweep, discretize=discretize,
                     frontier=frontier, uncertainty=uncertainty,
                     output_dir=output_dir)
