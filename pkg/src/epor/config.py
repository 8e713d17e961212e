"""Run configuration: nested JSON with defaults, presets and strict key checking."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .housing import ALPHA_HAT, ETA_HAT, MU_HAT, VAR_HAT
from .relocation import BETA_STAR


class ConfigError(ValueError):
    pass


# None marks an optional value of any type; every other leaf fixes the key set
DEFAULTS = {
    "curve": {"rate": 0.03, "ends": [1, 3, 5, 7, 10], "frequency": 1, "quotes_csv": None},
    "hw": {"a": 0.05, "sigma": 0.01},
    "swap": {
        "kind": "bullet",
        "fixed_rate": 0.03,
        "frequency": 1,
        "end_years": 10.0,
        "initial_notional": 10000.0,
        "schedule_csv": None,
    },
    "hm": {
        "kind": "ou",
        "distribution": "normal",
        "mean": MU_HAT,
        "variance": VAR_HAT,
        "ou": {"alpha": ALPHA_HAT, "eta": ETA_HAT},
        "trend": "flat",
        "h0": None,
        "t_star": 10.0,
        "paths": 1000,
        "seed": 1,
    },
    "reloc": {
        "beta0": BETA_STAR[0],
        "beta1": BETA_STAR[1],
        "beta2": BETA_STAR[2],
        "dt_ref": 1.0 / 12.0,
        "grid_step": 1.0 / 48.0,
        "mapping": "linear",
    },
    "epor": {"strikes": [0.025, 0.0275, 0.03, 0.0325, 0.035], "sweep": False},
    "hedge": {
        "kind": "opr_mim",
        "J": 3,
        "k": 0.02,
        "k_vol": 0.1,
        "k_eig": 1.0,
        "alpha_opt": 0.1,
        "bump_bp": 1.0,
        "gamma_bump_bp": 5.0,
        "restarts": 8,
        "restart_seed": 0,
        "base": "opr_mim",
    },
    "shock": {"grid": [-25.0, 0.0, 25.0], "single_sizes": [50.0]},
    "report": {"alpha_es": 0.01},
    "oracle": {"paths": 1000000, "seed": 11, "grid_step": 1.0 / 48.0,
               "strikes": [0.025, 0.03, 0.035]},
    "calibration": {"months": 132, "borrowers": 10000, "seed": 3, "start": "2012-12",
                    "weighting": "auto"},
}

PRESETS = {
    "bullet_baseline": {"swap": {"kind": "bullet"}, "hedge": {"J": 3}},
    "linear_baseline": {"swap": {"kind": "linear"}, "hedge": {"J": 5}},
    "actuarial": {
        "curve": {"ends": [1, 4, 10]},
        "swap": {"kind": "linear"},
        "hm": {"paths": 500},
        "hedge": {"kind": "eigen", "J": 6, "k_eig": 1.0},
    },
}


def merge(base: dict, override: dict, path: str = "") -> dict:
    """Recursive merge; keys absent from `base` are rejected."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be a table")
            out[key] = merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(preset: str | None = None, path=None, seed: int | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        cfg = merge(cfg, PRESETS[preset])
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = merge(cfg, data)
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed must be nonnegative")
        for section in ("hm", "oracle", "calibration"):
            cfg[section]["seed"] = int(seed)
    return cfg
