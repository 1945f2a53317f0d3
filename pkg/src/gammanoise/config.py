"""Experiment configuration: INI dialect, schemas, defaults, overrides.

Configs are INI files read by ``configparser``: one section per parameter
block, scalar values, comma-separated lists.  Every subcommand declares a
schema of allowed sections and typed keys; unknown sections or keys are
rejected before any computation runs.
"""

from __future__ import annotations

import configparser
import copy


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


def _floats(text):
    return [float(x) for x in str(text).split(",") if str(x).strip() != ""]


def _ints(text):
    return [int(x) for x in str(text).split(",") if str(x).strip() != ""]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


TYPES = {"int": int, "float": float, "str": str, "floats": _floats,
         "ints": _ints, "bool": _bool}

RUN_SCHEMA = {"seed": "int", "workers": "int", "out": "str", "oversample": "int"}

SCHEMAS = {
    "series-norm": {
        "run": RUN_SCHEMA,
        "grid": {"dim": "int", "n": "int", "length": "float"},
        "system": {"kind": "str", "j_min": "int", "j_max": "int",
                   "extent": "int", "width": "float"},
        "coloring": {"kind": "str", "alpha": "float", "beta": "float",
                     "level": "int", "value": "float", "values": "floats"},
        "series": {"n_terms": "int", "s": "float", "q": "float", "samples": "int"},
        "g": {"kind": "str", "width": "float", "value": "float"},
    },
    "sweep": {
        "run": RUN_SCHEMA,
        "sweep": {"construction": "str", "scales": "ints", "s_values": "floats",
                  "q": "float", "eta": "float", "zeta": "float", "d": "int"},
    },
    "freq-block": {
        "run": RUN_SCHEMA,
        "params": {"d": "int", "s": "float", "q": "float", "eta": "float", "zeta": "float"},
        "freq_block": {"n_min": "int", "n_max": "int"},
    },
    "rescaled-bump": {
        "run": RUN_SCHEMA,
        "params": {"d": "int", "s": "float", "q": "float", "eta": "float", "zeta": "float"},
        "rescaled_bump": {"m_min": "int", "m_max": "int", "n": "int", "width": "float"},
    },
    "shifted-bump": {
        "run": RUN_SCHEMA,
        "params": {"d": "int", "s": "float", "q": "float", "eta": "float", "zeta": "float"},
        "shifted_bump": {"extents": "ints", "resolution": "int", "width": "float"},
    },
    "dirichlet": {
        "run": RUN_SCHEMA,
        "dirichlet": {"eta": "float", "n_values": "ints"},
    },
    "gamma-young": {
        "run": RUN_SCHEMA,
        "grid": {"dim": "int", "n": "int", "length": "float"},
        "gamma_young": {"s": "float", "q": "float", "trials": "int"},
    },
    "mg-sobolev": {
        "run": RUN_SCHEMA,
        "grid": {"dim": "int", "n": "int", "length": "float"},
        "mg_sobolev": {"s": "float", "q": "float", "eta": "float",
                       "levels": "int", "width": "float"},
    },
    "schatten-heat": {
        "run": RUN_SCHEMA,
        "schatten": {"d": "int", "n": "int", "t_min": "float", "t_max": "float",
                     "points": "int", "witness": "bool"},
    },
    "heat-sim": {
        "run": RUN_SCHEMA,
        "grid": {"dim": "int", "n": "int", "length": "float"},
        "heat": {"noise": "str", "alpha": "float", "cutoff": "float",
                 "mode": "int", "amplitude": "float", "t_horizon": "float",
                 "dt": "float", "integrator": "str", "trajectories": "int",
                 "s": "float", "q": "float", "p": "float", "dump_states": "str"},
    },
    "scaling": {
        "run": RUN_SCHEMA,
        "grid": {"dim": "int", "n": "int", "length": "float"},
        "scaling": {"alpha": "float", "beta": "float", "levels": "int",
                    "m_min": "int", "m_max": "int", "s": "float", "q": "float",
                    "eta": "float"},
    },
    "haar-divergence": {
        "run": RUN_SCHEMA,
        "haar": {"d": "int", "alpha": "float", "beta": "float",
                 "zeta_values": "floats", "j_max": "int"},
    },
    "selftest": {
        "run": RUN_SCHEMA,
    },
}

DEFAULTS = {
    "series-norm": {
        "run": {"seed": 7, "workers": 1, "out": "series_norm.csv", "oversample": 4},
        "grid": {"dim": 1, "n": 1024, "length": 1.0},
        "system": {"kind": "fourier"},
        "coloring": {"kind": "matern", "alpha": 0.5},
        "series": {"n_terms": 128, "s": 0.6, "q": 2.0, "samples": 400},
    },
    "sweep": {
        "run": {"seed": 7, "workers": 1, "out": "sweep.csv", "oversample": 2},
        "sweep": {"construction": "freq_block", "scales": [3, 4, 5, 6],
                  "s_values": [0.2, 0.5, 0.9], "q": 4.0, "eta": 2.0,
                  "zeta": 4.0, "d": 1},
    },
    "freq-block": {
        "run": {"seed": 7, "workers": 1, "out": "freq_block.csv", "oversample": 2},
        "params": {"d": 1, "s": 0.9, "q": 4.0, "eta": 2.0, "zeta": 4.0},
        "freq_block": {"n_min": 3, "n_max": 7},
    },
    "rescaled-bump": {
        "run": {"seed": 7, "workers": 1, "out": "rescaled_bump.csv", "oversample": 4},
        "params": {"d": 1, "s": 0.5, "q": 4.0, "eta": 2.0, "zeta": 4.0},
        "rescaled_bump": {"m_min": 0, "m_max": 5, "n": 2**14, "width": 0.25},
    },
    "shifted-bump": {
        "run": {"seed": 7, "workers": 1, "out": "shifted_bump.csv", "oversample": 2},
        "params": {"d": 1, "s": 0.6, "q": 2.0, "eta": 4.0, "zeta": 4.0},
        "shifted_bump": {"extents": [2, 4, 8, 16], "resolution": 64, "width": 0.5},
    },
    "dirichlet": {
        "run": {"seed": 7, "workers": 1, "out": "dirichlet.csv", "oversample": 4},
        "dirichlet": {"eta": 4.0, "n_values": [8, 16, 32, 64, 128, 256]},
    },
    "gamma-young": {
        "run": {"seed": 7, "workers": 1, "out": "gamma_young.csv", "oversample": 4},
        "grid": {"dim": 1, "n": 1024, "length": 1.0},
        "gamma_young": {"s": 0.75, "q": 8.0, "trials": 100},
    },
    "mg-sobolev": {
        "run": {"seed": 7, "workers": 1, "out": "mg_sobolev.csv", "oversample": 4},
        "grid": {"dim": 1, "n": 8192, "length": 1.0},
        "mg_sobolev": {"s": 0.75, "q": 4.0, "eta": 8.0 / 3.0, "levels": 6, "width": 0.25},
    },
    "schatten-heat": {
        "run": {"seed": 7, "workers": 1, "out": "schatten_heat.csv", "oversample": 1},
        "schatten": {"d": 1, "n": 512, "t_min": 1e-3, "t_max": 1e-1,
                     "points": 9, "witness": True},
    },
    "heat-sim": {
        "run": {"seed": 7, "workers": 1, "out": "heat_sim.csv", "oversample": 1},
        "grid": {"dim": 1, "n": 256, "length": 1.0},
        "heat": {"noise": "matern", "alpha": 0.3, "t_horizon": 0.1, "dt": 1e-3,
                 "integrator": "exact_ou", "trajectories": 100, "s": 0.9,
                 "q": 2.0, "p": 2.0},
    },
    "scaling": {
        "run": {"seed": 7, "workers": 1, "out": "scaling.csv", "oversample": 2},
        "grid": {"dim": 1, "n": 8192, "length": 1.0},
        "scaling": {"alpha": 0.5, "beta": 1.0, "levels": 3, "m_min": 0,
                    "m_max": 5, "s": 0.25, "q": 4.0, "eta": 2.0},
    },
    "haar-divergence": {
        "run": {"seed": 7, "workers": 1, "out": "haar_divergence.csv", "oversample": 1},
        "haar": {"d": 1, "alpha": 0.5, "beta": 1.0,
                 "zeta_values": [1.8, 2.0, 2.5], "j_max": 12},
    },
    "selftest": {
        "run": {"seed": 7, "workers": 1, "out": "selftest.csv", "oversample": 4},
    },
}


def load_config(command: str, path=None, overrides=None) -> dict:
    """Defaults, overlaid with an INI file and key=value overrides, validated."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = SCHEMAS[command]
    config = copy.deepcopy(DEFAULTS[command])

    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                _apply(config, schema, command, section, key, raw)

    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"override key must be section.key, got {dotted!r}")
        section, key = dotted.split(".", 1)
        _apply(config, schema, command, section, key, raw)
    return config


def _apply(config: dict, schema: dict, command: str, section: str, key: str, raw) -> None:
    if section not in schema:
        raise ConfigError(f"unknown section [{section}] for command {command!r}")
    if key not in schema[section]:
        raise ConfigError(f"unknown key {key!r} in section [{section}] for command {command!r}")
    caster = TYPES[schema[section][key]]
    try:
        value = caster(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None
    config.setdefault(section, {})[key] = value
