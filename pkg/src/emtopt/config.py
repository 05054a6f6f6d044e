"""JSON configuration: defaults, overrides, and model assembly.

The config file is the single source of every numeric default. Any key
can be overridden on the command line with ``--set path.to.key=value``;
the effective configuration is echoed into emitted summaries.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

import numpy as np

from . import defaults
from .ahp import default_weights
from .baseline import RuleConfig
from .cycle_io import parse_curve, parse_map_table
from .dp import DpConfig
from .errors import ConfigError, ParseError
from .objectives import ObjectiveParams
from .powertrain import BatteryPack, EngineMap, MachineMap, PowertrainModel, VehicleParams

DEFAULT_CONFIG = {
    "battery": {
        "voc": 600.0, "rb": 0.05, "cb": 99.0,
        "soc_min": 0.3, "soc_max": 0.8, "soc_init": 0.5,
        "p_abs_max": 220.0,
        "p_lim_curve": [[0.0, 220.0], [1.0, 220.0]],
    },
    "vehicle": {
        "mass": 40000.0, "gravity": 9.81,
        "final_drive_ratio": 4.0, "sprocket_radius": 0.3,
        "coupling_coeffs": [1.2, -0.2, 0.0, 1.5],
        "mech_path_eff": 0.95,
        "elec_loss_frac": 0.02, "proc_loss_frac": 0.02,
        "fuel_density": 835.0,
    },
    "objectives": {
        "gamma1": -12500.0, "gamma2": 2000.0, "soc0": 0.5,
        "fuel_max": 72.0, "dsoc_max": 0.001, "soc_dev_max": 0.3,
    },
    "dp": {
        "soc_count": 101,
        "ne_count": 10, "ta_count": 7, "tb_count": 7,
        "ta_span": 1200.0, "tb_span": 1200.0,
        "balance_tol_kw": 1e-6,
        "infeasible_penalty": 1e6,
        "terminal_soc_penalty": 0.0,
    },
    "rule": {
        "soc_low": 0.45, "soc_high": 0.55,
        "charge_power_kw": 50.0, "assist_power_kw": 50.0,
        "op_line_levels": 121,
    },
    "weights": {"mode": "constants"},
    "maps": {
        "engine_fuel": None, "engine_max_torque": None,
        "machine_a_eff": None, "machine_a_max_power": None,
        "machine_b_eff": None, "machine_b_max_power": None,
    },
}


def _merge(base: dict, override: dict, path="") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path=None) -> dict:
    """Defaults, deep-merged with an optional JSON config file."""
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    text = Path(path).read_text()
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed config JSON: {exc}", row=exc.lineno) from None
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge(DEFAULT_CONFIG, user)


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply ``path.to.key=value`` assignments; values parse as JSON."""
    cfg = copy.deepcopy(cfg)
    for item in assignments or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value")
        key_path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key_path.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"unknown config key {key_path!r}")
            node = node[part]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ConfigError(f"unknown config key {key_path!r}")
        node[parts[-1]] = value
    return cfg


def _load_engine(maps_cfg, base_dir, fuel_max) -> EngineMap:
    fuel_path = maps_cfg.get("engine_fuel")
    torque_path = maps_cfg.get("engine_max_torque")
    if fuel_path is None and torque_path is None:
        return defaults.default_engine_map(fuel_max)
    if fuel_path is None or torque_path is None:
        raise ConfigError("engine_fuel and engine_max_torque must be given together")
    speed, torque, table = parse_map_table((base_dir / fuel_path).read_text())
    cx, cy = parse_curve((base_dir / torque_path).read_text())
    if cx[0] > speed[0] or cx[-1] < speed[-1]:
        raise ConfigError("engine max-torque curve does not cover the speed grid")
    max_torque = np.interp(speed, cx, cy)
    return EngineMap(speed, torque, table, max_torque)


def _load_machine(maps_cfg, base_dir, which) -> MachineMap:
    eff_path = maps_cfg.get(f"machine_{which}_eff")
    power_path = maps_cfg.get(f"machine_{which}_max_power")
    if eff_path is None and power_path is None:
        return defaults.default_machine_a() if which == "a" else defaults.default_machine_b()
    if eff_path is None or power_path is None:
        raise ConfigError(
            f"machine_{which}_eff and machine_{which}_max_power must be given together"
        )
    speed, torque, table = parse_map_table((base_dir / eff_path).read_text())
    cx, cy = parse_curve((base_dir / power_path).read_text())
    return MachineMap(speed, torque, table, cx, cy)


def build_model(cfg: dict, base_dir=".") -> PowertrainModel:
    """Assemble the powertrain model from config and optional map files."""
    base_dir = Path(base_dir)
    b = cfg["battery"]
    curve = np.asarray(b["p_lim_curve"], dtype=float)
    if curve.ndim != 2 or curve.shape[1] != 2:
        raise ConfigError("battery.p_lim_curve must be a list of [soc, kw] pairs")
    try:
        battery = BatteryPack(
            voc=b["voc"], rb=b["rb"], cb=b["cb"],
            soc_min=b["soc_min"], soc_max=b["soc_max"], soc_init=b["soc_init"],
            p_lim_soc=curve[:, 0], p_lim_kw=curve[:, 1], p_abs_max=b["p_abs_max"],
        )
        v = cfg["vehicle"]
        vehicle = VehicleParams(
            mass=v["mass"], gravity=v["gravity"],
            final_drive_ratio=v["final_drive_ratio"],
            sprocket_radius=v["sprocket_radius"],
            coupling_coeffs=tuple(v["coupling_coeffs"]),
            mech_path_eff=v["mech_path_eff"],
            elec_loss_frac=v["elec_loss_frac"],
            proc_loss_frac=v["proc_loss_frac"],
            fuel_density=v["fuel_density"],
        )
        fuel_max = cfg["objectives"]["fuel_max"]
        engine = _load_engine(cfg["maps"], base_dir, fuel_max)
        machine_a = _load_machine(cfg["maps"], base_dir, "a")
        machine_b = _load_machine(cfg["maps"], base_dir, "b")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    peak = engine.max_feasible_fuel()
    if abs(peak - fuel_max) > 1e-9 * max(abs(fuel_max), 1.0):
        raise ConfigError(
            f"engine map's feasible peak fuel rate ({peak!r} g/s) must equal "
            f"objectives.fuel_max ({fuel_max!r} g/s) for exact normalization"
        )
    return PowertrainModel(
        engine=engine, machine_a=machine_a, machine_b=machine_b,
        battery=battery, vehicle=vehicle,
    )


def build_params(cfg: dict) -> ObjectiveParams:
    o = cfg["objectives"]
    return ObjectiveParams(
        gamma1=o["gamma1"], gamma2=o["gamma2"], soc0=o["soc0"],
        fuel_max=o["fuel_max"], dsoc_max=o["dsoc_max"], soc_dev_max=o["soc_dev_max"],
    )


def build_dp_config(cfg: dict) -> DpConfig:
    d = cfg["dp"]
    try:
        return DpConfig(
            soc_count=d["soc_count"],
            ne_count=d["ne_count"], ta_count=d["ta_count"], tb_count=d["tb_count"],
            ta_span=d["ta_span"], tb_span=d["tb_span"],
            balance_tol_kw=d["balance_tol_kw"],
            infeasible_penalty=d["infeasible_penalty"],
            terminal_soc_penalty=d["terminal_soc_penalty"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_rule_config(cfg: dict) -> RuleConfig:
    r = cfg["rule"]
    b = cfg["battery"]
    if not (b["soc_min"] < r["soc_low"] < r["soc_high"] < b["soc_max"]):
        raise ConfigError(
            "rule band must satisfy soc_min < soc_low < soc_high < soc_max"
        )
    if r["charge_power_kw"] > b["p_abs_max"]:
        raise ConfigError("rule.charge_power_kw exceeds battery.p_abs_max")
    try:
        return RuleConfig(
            soc_low=r["soc_low"], soc_high=r["soc_high"],
            charge_power_kw=r["charge_power_kw"],
            assist_power_kw=r["assist_power_kw"],
            op_line_levels=r["op_line_levels"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_weights(cfg: dict):
    mode = cfg["weights"]["mode"]
    if mode not in ("constants", "recompute"):
        raise ConfigError(f"weights.mode must be 'constants' or 'recompute', got {mode!r}")
    return default_weights(mode)
