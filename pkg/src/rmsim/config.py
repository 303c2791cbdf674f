"""Run configuration: strict INI parsing with per-scenario schemas.

A run file has a [run] section (scenario, master_seed, workers, out, format),
an optional [environment] section (estimate/renewal physical inputs), and one
section named after the scenario.  Unknown sections or keys are rejected with
the offending name; every run echoes its fully resolved configuration into the
manifest.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError
from .estimates import DEFAULT_COARSE_DT, DEFAULT_RETURN_QUANTILE, EnvironmentParams

SCENARIOS = (
    "born",
    "survival",
    "trajectory",
    "renewal",
    "geometry-check",
    "velocity-decomposition",
    "estimate",
    "gue-stats",
)

SEED_ENV_VAR = "RMSIM_SEED"
DEFAULT_MASTER_SEED = 1
FORMATS = ("json", "csv", "both")

# key -> (parser, default); parsers raise ValueError on bad input
_SCHEMAS: dict[str, dict[str, tuple[Any, Any]]] = {
    "born": {
        "weights": ("floats", (0.64, 0.36)),
        "centers": ("floats", (-4.0, 4.0)),
        "sigma": ("float", 1.0),
        "grid_points": ("int", 64),
        "grid_length": ("float", 16.0),
        "eps_step": ("float", 0.05),
        "kick_scale": ("float", 0.0),
        "kick_dt": ("float", 1.0),
        "n_runs": ("int", 100),
        "n_steps_max": ("int", 2000),
        "trace_first_run": ("int", 0),  # opt-in foliation trace CSV (large)
    },
    "survival": {
        "distribution": ("str", "gaussian"),
        "n_walks": ("int", 100000),
        "n_max": ("int", 64),
    },
    # Schedule note: per-kick depolarization drags <p> by eps^2, which
    # integrates into a position shortfall ~ eps^2 p t^2 / (2 dt_window); the
    # default start centers the kicks about z = 0 so the direct tau relaxation
    # cancels, and four windows keep the drag below the ensemble noise floor.
    "trajectory": {
        "grid_points": ("int", 96),
        "grid_length": ("float", 24.0),
        "sigma": ("float", 1.0),
        "start": ("float", -0.25),
        "momentum": ("float", 1.0),
        "eps_step": ("float", 0.01),
        "kick_scale": ("float", 0.0),
        "kick_dt": ("float", 1.0),
        "dt_free": ("float", 0.025),
        "substeps_per_window": ("int", 4),
        "n_windows": ("int", 4),
        "n_seeds": ("int", 200),
    },
    "renewal": {
        "n_cycles": ("int", 10000),
        "q": ("float", DEFAULT_RETURN_QUANTILE),
        "dt": ("float", 0.0),   # 0 -> derive from environment
        "d_a": ("float", 0.0),  # 0 -> derive from environment
    },
    "geometry-check": {
        "grid_points": ("int", 512),
        "grid_length": ("float", 40.0),
        "sigma": ("float", 1.0),
        "n_samples": ("int", 100),
        "max_sep_sigmas": ("float", 6.0),
        "lattice_n": ("int", 10),
        "lattice_max_dp_sigma": ("float", 2.0),
    },
    "velocity-decomposition": {
        "grid_points": ("int", 512),
        "grid_length": ("float", 40.0),
        "sigma": ("float", 1.0),
        "momenta": ("floats", (0.0, 1.0, 2.0)),
        "linear_coefficient": ("float", 0.5),
    },
    "estimate": {
        "dt": ("float", DEFAULT_COARSE_DT),
        "q": ("float", DEFAULT_RETURN_QUANTILE),
    },
    "gue-stats": {
        "dimension": ("int", 200),
        "scale": ("float", 1.0),
        "n_moment_draws": ("int", 2000),
    },
}

_ENVIRONMENT_SCHEMA: dict[str, tuple[Any, Any]] = {
    "gas_number_density": ("float", 2.4e25),
    "thermal_velocity": ("float", 5e2),
    "interaction_range": ("float", 1e-9),
    "body_radius": ("float", 1e-3),
    "body_mass": ("float", 1e-6),
    "body_speed": ("float", 1.0),
    "resolution": ("float", 1e-6),
    "gas_particle_mass": ("float", 5e-26),
    "hbar": ("float", 1e-34),
}

_RUN_SCHEMA: dict[str, tuple[Any, Any]] = {
    "scenario": ("str", None),
    "master_seed": ("int", None),
    "workers": ("int", 1),
    "out": ("str", "runs/out"),
    "format": ("str", "both"),
}


def _parse_value(kind: str, raw: str, key: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse {raw!r} as {kind}") from exc


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    master_seed: int
    n_workers: int
    output_dir: str
    fmt: str
    params: dict = field(default_factory=dict)
    environment: EnvironmentParams = field(default_factory=EnvironmentParams)

    def resolved(self) -> dict:
        """Flat echo of everything that determines the run output."""
        env = {k: getattr(self.environment, k) for k in _ENVIRONMENT_SCHEMA}
        return {
            "scenario": self.scenario,
            "master_seed": self.master_seed,
            "workers": self.n_workers,
            "out": self.output_dir,
            "format": self.fmt,
            "params": dict(sorted(self.params.items())),
            "environment": env,
        }


def scenario_defaults(scenario: str) -> dict:
    if scenario not in _SCHEMAS:
        raise ConfigError(f"key 'scenario': unknown scenario {scenario!r}")
    return {k: default for k, (_, default) in _SCHEMAS[scenario].items()}


def _read_section(parser, name, schema) -> dict:
    out = {}
    if not parser.has_section(name):
        return out
    for key, raw in parser.items(name):
        if key not in schema:
            raise ConfigError(f"key '{name}.{key}': unknown key")
        kind, _default = schema[key]
        out[key] = _parse_value(kind, raw, f"{name}.{key}")
    return out


def load_config(
    path: str | None,
    scenario: str,
    seed_flag: int | None = None,
    workers_flag: int | None = None,
    out_flag: str | None = None,
    format_flag: str | None = None,
) -> RunConfig:
    """Merge config file, flags, and environment into a validated RunConfig.

    Seed precedence: --seed flag, then [run].master_seed, then the
    RMSIM_SEED environment variable, then the built-in default.
    """
    if scenario not in _SCHEMAS:
        raise ConfigError(f"key 'scenario': unknown scenario {scenario!r}")
    run_raw: dict = {}
    scen_raw: dict = {}
    env_raw: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"key 'config': cannot read {path!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"key 'config': parse error: {exc}") from exc
        allowed = {"run", "environment", scenario}
        for section in parser.sections():
            if section not in allowed:
                raise ConfigError(f"key '[{section}]': unknown section")
        run_raw = _read_section(parser, "run", _RUN_SCHEMA)
        env_raw = _read_section(parser, "environment", _ENVIRONMENT_SCHEMA)
        scen_raw = _read_section(parser, scenario, _SCHEMAS[scenario])
        cfg_scenario = run_raw.get("scenario")
        if cfg_scenario is not None and cfg_scenario != scenario:
            raise ConfigError(
                f"key 'run.scenario': config names {cfg_scenario!r} but the "
                f"command requested {scenario!r}"
            )

    if seed_flag is not None:
        master_seed = seed_flag
    elif run_raw.get("master_seed") is not None:
        master_seed = run_raw["master_seed"]
    elif os.environ.get(SEED_ENV_VAR):
        try:
            master_seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(
                f"key '{SEED_ENV_VAR}': not an integer: "
                f"{os.environ[SEED_ENV_VAR]!r}"
            ) from exc
    else:
        master_seed = DEFAULT_MASTER_SEED
    if not 0 <= master_seed < 2**64:
        raise ConfigError("key 'master_seed': must fit in 64 bits")

    fmt = format_flag or run_raw.get("format") or "both"
    if fmt not in FORMATS:
        raise ConfigError(f"key 'run.format': must be one of {FORMATS}")
    workers = workers_flag if workers_flag is not None else run_raw.get("workers", 1)
    if workers < 1:
        raise ConfigError("key 'run.workers': must be at least 1")

    params = scenario_defaults(scenario)
    params.update(scen_raw)
    if scenario == "survival" and params["distribution"] not in ("gaussian", "pm1"):
        raise ConfigError("key 'survival.distribution': must be gaussian or pm1")

    env_params = {k: default for k, (_, default) in _ENVIRONMENT_SCHEMA.items()}
    env_params.update(env_raw)
    try:
        environment = EnvironmentParams(**env_params)
    except ValueError as exc:
        raise ConfigError(f"key 'environment': {exc}") from exc

    return RunConfig(
        scenario=scenario,
        master_seed=master_seed,
        n_workers=workers,
        output_dir=out_flag or run_raw.get("out") or "runs/out",
        fmt=fmt,
        params=params,
        environment=environment,
    )


def defaults_ini(scenario: str | None = None) -> str:
    """Render the default configuration as INI text."""
    buf = io.StringIO()
    buf.write("[run]\n")
    names = [scenario] if scenario else list(SCENARIOS)
    buf.write(f"scenario = {names[0]}\n")
    buf.write(f"master_seed = {DEFAULT_MASTER_SEED}\n")
    buf.write("workers = 1\nout = runs/out\nformat = both\n")
    buf.write("\n[environment]\n")
    for key, (_, default) in _ENVIRONMENT_SCHEMA.items():
        buf.write(f"{key} = {default!r}\n")
    for name in names:
        buf.write(f"\n[{name}]\n")
        for key, value in scenario_defaults(name).items():
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            buf.write(f"{key} = {value}\n")
    return buf.getvalue()
