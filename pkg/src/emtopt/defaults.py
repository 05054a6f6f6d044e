"""Bundled synthetic component maps and vehicle parameters.

These are smooth, plausible placeholder characteristics for a heavy
tracked vehicle with a roughly 1.1 MW engine and two ~300 kW electric
machines. They are generated, not measured: use them for demos and
tests, and load real map CSVs for any actual study.

The engine fuel table is rescaled at construction so its maximum over
the feasible envelope (below the maximum-torque curve) equals the default
fuel-objective normalization bound exactly.
"""
from __future__ import annotations

import numpy as np

from .objectives import ObjectiveParams
from .powertrain import (
    RPM_TO_RAD_S,
    BatteryPack,
    EngineMap,
    MachineMap,
    PowertrainModel,
    VehicleParams,
)

DEFAULT_FUEL_MAX_GPS = ObjectiveParams().fuel_max

_ENGINE_SPEED_GRID = np.array(
    [800.0, 1200.0, 1600.0, 2000.0, 2400.0, 2800.0, 3200.0, 3600.0, 4000.0, 4200.0]
)
_ENGINE_TORQUE_GRID = np.arange(0.0, 3001.0, 250.0)
_ENGINE_MAX_TORQUE = np.array(
    [1800.0, 2300.0, 2700.0, 3000.0, 3000.0, 2950.0, 2900.0, 2800.0, 2600.0, 2500.0]
)


def _engine_bsfc(ne, load):
    """Synthetic brake-specific fuel consumption surface in g/kWh."""
    speed_term = 18.0 * ((ne - 2600.0) / 1600.0) ** 2
    part_load = 90.0 * (1.0 - np.minimum(load, 1.2)) ** 2
    high_load = 12.0 * np.maximum((load - 0.85) / 0.15, 0.0) ** 2
    return 206.0 + speed_term + part_load + high_load


def default_engine_map(fuel_max_gps: float = DEFAULT_FUEL_MAX_GPS) -> EngineMap:
    """Synthetic engine map with feasible-envelope peak fuel ``fuel_max_gps``."""
    ne = _ENGINE_SPEED_GRID[:, None]
    te = _ENGINE_TORQUE_GRID[None, :]
    power_kw = te * ne * RPM_TO_RAD_S / 1000.0
    load = te / _ENGINE_MAX_TORQUE[:, None]
    fuel = power_kw * _engine_bsfc(ne, load) / 3600.0
    idle = (0.5 + 1.5 * ne / 4200.0) * np.exp(-6.0 * load)
    fuel = fuel + idle
    unscaled = EngineMap(_ENGINE_SPEED_GRID, _ENGINE_TORQUE_GRID, fuel, _ENGINE_MAX_TORQUE)
    scale = fuel_max_gps / unscaled.max_feasible_fuel()
    return EngineMap(_ENGINE_SPEED_GRID, _ENGINE_TORQUE_GRID, fuel * scale, _ENGINE_MAX_TORQUE)


def _machine_map(peak_speed_rpm, peak_torque_nm, rated_kw, top_speed_rpm) -> MachineMap:
    speed_grid = np.linspace(0.0, 6500.0, 14)
    torque_grid = np.linspace(-2400.0, 2400.0, 13)
    n = speed_grid[:, None]
    t = torque_grid[None, :]
    eff = (
        0.92
        - 0.06 * ((n - peak_speed_rpm) / 4000.0) ** 2
        - 0.05 * ((np.abs(t) - peak_torque_nm) / 1800.0) ** 2
    )
    eff = np.clip(eff, 0.80, 0.92)
    omega_top = top_speed_rpm * RPM_TO_RAD_S
    knee = rated_kw * 1000.0 / omega_top
    curve_t = np.unique(np.concatenate([np.arange(0.0, 2401.0, 200.0), [knee]]))
    curve_p = np.minimum(curve_t * omega_top / 1000.0, rated_kw)
    return MachineMap(speed_grid, torque_grid, eff, curve_t, curve_p)


def default_machine_a() -> MachineMap:
    """Generator-biased machine, rated 320 kW."""
    return _machine_map(peak_speed_rpm=3200.0, peak_torque_nm=900.0, rated_kw=320.0, top_speed_rpm=6000.0)


def default_machine_b() -> MachineMap:
    """Traction-biased machine, rated 360 kW."""
    return _machine_map(peak_speed_rpm=2400.0, peak_torque_nm=1200.0, rated_kw=360.0, top_speed_rpm=5500.0)


def default_battery() -> BatteryPack:
    return BatteryPack()


def default_vehicle() -> VehicleParams:
    return VehicleParams()


def default_model() -> PowertrainModel:
    return PowertrainModel(
        engine=default_engine_map(),
        machine_a=default_machine_a(),
        machine_b=default_machine_b(),
        battery=default_battery(),
        vehicle=default_vehicle(),
    )
