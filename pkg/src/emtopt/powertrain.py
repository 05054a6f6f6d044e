"""Quasi-static component models and the two power-balance equations.

Sign conventions used throughout:

* battery power ``ps`` is positive while charging (power drawn from the
  electric bus into the pack) and negative while discharging;
* machine powers ``pa``/``pb`` are shaft powers, positive when motoring
  (the machine draws electrical power from the bus to produce mechanical
  power) and negative when generating onto the bus. The bus balance
  applies the conversion efficiency as ``p * eta**(-sign(p))`` so that a
  motoring machine draws more than its shaft power and a generating one
  delivers less, penalizing conversion in both directions;
* all powers are kW unless a name says otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EnvelopeError, InfeasiblePowerError
from .interp import (
    bilinear,
    bilinear_masked,
    check_increasing,
    interp_curve,
    interp_curve_clamped,
)

RPM_TO_RAD_S = 2.0 * np.pi / 60.0
KMH_TO_MS = 1.0 / 3.6


def _freeze(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EngineMap:
    """Engine fuel map plus the external (maximum torque) characteristic.

    ``fuel_table[i, j]`` is the fuel rate in g/s at ``speed_grid[i]`` rpm
    and ``torque_grid[j]`` N*m. ``max_torque`` is aligned with
    ``speed_grid``.
    """

    speed_grid: np.ndarray
    torque_grid: np.ndarray
    fuel_table: np.ndarray
    max_torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "speed_grid", _freeze(check_increasing(self.speed_grid, "engine speed grid")))
        object.__setattr__(self, "torque_grid", _freeze(check_increasing(self.torque_grid, "engine torque grid")))
        object.__setattr__(self, "fuel_table", _freeze(self.fuel_table))
        object.__setattr__(self, "max_torque", _freeze(self.max_torque))
        if self.fuel_table.shape != (self.speed_grid.size, self.torque_grid.size):
            raise ValueError(
                f"fuel table shape {self.fuel_table.shape} does not match grids "
                f"({self.speed_grid.size}, {self.torque_grid.size})"
            )
        if np.any(self.fuel_table < 0):
            raise ValueError("fuel rates must be nonnegative")
        if self.max_torque.shape != self.speed_grid.shape:
            raise ValueError("max torque curve must have one value per speed node")
        if np.any(self.max_torque < self.torque_grid[0]) or np.any(self.max_torque > self.torque_grid[-1]):
            raise ValueError("max torque curve leaves the torque grid range")

    def max_torque_at(self, ne_rpm: float) -> float:
        return interp_curve(self.speed_grid, self.max_torque, ne_rpm, "engine speed")

    def max_feasible_fuel(self, boundary_samples: int = 512) -> float:
        """Largest fuel rate reachable under the maximum-torque curve.

        Scans all grid nodes below the curve plus a dense sampling of the
        curve itself, where a bilinear surface restricted to a line can
        peak between nodes.
        """
        node_t = self.torque_grid[None, :]
        limit = self.max_torque[:, None]
        feasible = node_t <= limit
        best = float(self.fuel_table[feasible].max()) if feasible.any() else 0.0
        ne = np.linspace(self.speed_grid[0], self.speed_grid[-1], boundary_samples)
        te = np.interp(ne, self.speed_grid, self.max_torque)
        vals, _ = bilinear_masked(self.speed_grid, self.torque_grid, self.fuel_table, ne, te)
        return max(best, float(vals.max()))


@dataclass(frozen=True)
class MachineMap:
    """Electric machine efficiency map and max-power-vs-torque curve.

    ``eff_table[i, j]`` is the conversion efficiency at
    ``speed_grid[i]`` rpm and ``torque_grid[j]`` N*m (signed torque).
    ``max_power_kw`` is tabulated against torque magnitude
    ``max_power_torque``.
    """

    speed_grid: np.ndarray
    torque_grid: np.ndarray
    eff_table: np.ndarray
    max_power_torque: np.ndarray
    max_power_kw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "speed_grid", _freeze(check_increasing(self.speed_grid, "machine speed grid")))
        object.__setattr__(self, "torque_grid", _freeze(check_increasing(self.torque_grid, "machine torque grid")))
        object.__setattr__(self, "eff_table", _freeze(self.eff_table))
        object.__setattr__(self, "max_power_torque", _freeze(check_increasing(self.max_power_torque, "max power abscissa")))
        object.__setattr__(self, "max_power_kw", _freeze(self.max_power_kw))
        if self.eff_table.shape != (self.speed_grid.size, self.torque_grid.size):
            raise ValueError(
                f"efficiency table shape {self.eff_table.shape} does not match grids "
                f"({self.speed_grid.size}, {self.torque_grid.size})"
            )
        if np.any(self.eff_table <= 0) or np.any(self.eff_table > 1):
            raise ValueError("efficiencies must lie in (0, 1]")
        if self.max_power_kw.shape != self.max_power_torque.shape:
            raise ValueError("max power curve columns must have equal length")


@dataclass(frozen=True)
class BatteryPack:
    """Storage pack: open-circuit voltage, internal resistance, capacity.

    ``p_lim_soc``/``p_lim_kw`` tabulate the maximum discharge power as a
    function of state of charge; ``p_abs_max`` caps battery power in both
    directions.
    """

    voc: float = 600.0
    rb: float = 0.05
    cb: float = 99.0
    soc_min: float = 0.3
    soc_max: float = 0.8
    soc_init: float = 0.5
    p_lim_soc: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    p_lim_kw: np.ndarray = field(default_factory=lambda: np.array([220.0, 220.0]))
    p_abs_max: float = 220.0

    def __post_init__(self):
        object.__setattr__(self, "p_lim_soc", _freeze(self.p_lim_soc))
        object.__setattr__(self, "p_lim_kw", _freeze(self.p_lim_kw))
        if self.voc <= 0 or self.rb <= 0 or self.cb <= 0:
            raise ValueError("voc, rb and cb must all be positive")
        if not (0.0 <= self.soc_min < self.soc_init < self.soc_max <= 1.0):
            raise ValueError(
                f"need 0 <= soc_min < soc_init < soc_max <= 1, got "
                f"({self.soc_min}, {self.soc_init}, {self.soc_max})"
            )
        if np.any(self.p_lim_kw > self.p_abs_max + 1e-9):
            raise ValueError("discharge limit curve exceeds the absolute power cap")


@dataclass(frozen=True)
class VehicleParams:
    """Vehicle-level constants and the transmission coupling model.

    ``coupling_coeffs`` (c1..c4) map engine speed and transmission output
    speed (both rpm) linearly onto the two machine speeds:
    ``n_a = c1*ne + c2*n_out`` and ``n_b = c3*ne + c4*n_out``.
    ``mech_path_eff`` is the mechanical-path transmission efficiency of
    the driving power balance; thermal efficiency is already encoded in
    the fuel map. ``elec_loss_frac`` sizes the electric transmission loss
    from bus throughput, ``proc_loss_frac`` the whole-process loss from
    drive demand.
    """

    mass: float = 40000.0
    gravity: float = 9.81
    final_drive_ratio: float = 4.0
    sprocket_radius: float = 0.30
    coupling_coeffs: tuple = (1.2, -0.2, 0.0, 1.5)
    mech_path_eff: float = 0.95
    elec_loss_frac: float = 0.02
    proc_loss_frac: float = 0.02
    fuel_density: float = 835.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not (0.0 < self.mech_path_eff <= 1.0):
            raise ValueError("mech_path_eff must lie in (0, 1]")
        for name in ("elec_loss_frac", "proc_loss_frac"):
            v = getattr(self, name)
            if not (0.0 <= v <= 0.2):
                raise ValueError(f"{name} must lie in [0, 0.2], got {v}")
        if len(self.coupling_coeffs) != 4:
            raise ValueError("coupling_coeffs needs exactly four values")
        if self.fuel_density <= 0 or self.sprocket_radius <= 0 or self.final_drive_ratio <= 0:
            raise ValueError("fuel_density, sprocket_radius and final_drive_ratio must be positive")


@dataclass(frozen=True)
class PowerFlow:
    """One closed power flow through the transmission, all in kW."""

    ps: float = 0.0  # battery, charging positive
    pc: float = 0.0  # electric demand
    pl: float = 0.0  # electric transmission loss
    pa: float = 0.0  # machine A shaft power, motoring positive
    pb: float = 0.0  # machine B shaft power, motoring positive
    pe: float = 0.0  # engine power
    pd: float = 0.0  # demanded driving power
    ploss: float = 0.0  # whole-process loss

    def __post_init__(self):
        if self.pl < 0 or self.ploss < 0:
            raise ValueError("losses must be nonnegative")


@dataclass(frozen=True)
class PowertrainModel:
    """Bundle of component models the solvers operate on."""

    engine: EngineMap
    machine_a: MachineMap
    machine_b: MachineMap
    battery: BatteryPack
    vehicle: VehicleParams


# ---------------------------------------------------------------------------
# table lookups

def lookup_fuel_rate(engine: EngineMap, ne_rpm: float, te_nm: float) -> float:
    """Fuel rate in g/s at an engine operating point inside the envelope."""
    fuel = bilinear(
        engine.speed_grid, engine.torque_grid, engine.fuel_table,
        ne_rpm, te_nm, "engine speed", "engine torque",
    )
    limit = engine.max_torque_at(ne_rpm)
    if te_nm > limit:
        raise EnvelopeError(
            f"engine torque {te_nm:g} N*m above the maximum-torque curve "
            f"({limit:g} N*m at {ne_rpm:g} rpm)"
        )
    return fuel


def engine_max_power(engine: EngineMap, ne_rpm: float) -> float:
    """Maximum engine power in kW at a given speed."""
    if ne_rpm == 0.0:
        return 0.0
    te = engine.max_torque_at(ne_rpm)
    return te * ne_rpm * RPM_TO_RAD_S / 1000.0


def machine_efficiency(machine: MachineMap, n_rpm: float, t_nm: float) -> float:
    """Conversion efficiency at a machine operating point."""
    return bilinear(
        machine.speed_grid, machine.torque_grid, machine.eff_table,
        n_rpm, t_nm, "machine speed", "machine torque",
    )


def machine_max_power(machine: MachineMap, t_nm: float) -> float:
    """Maximum machine power in kW at a torque magnitude."""
    return interp_curve(
        machine.max_power_torque, machine.max_power_kw, abs(t_nm),
        "machine torque magnitude",
    )


# ---------------------------------------------------------------------------
# battery

def battery_soc_step(batt: BatteryPack, ps_kw: float, dt_s: float = 1.0) -> float:
    """State-of-charge change for battery power ``ps_kw`` held for ``dt_s``.

    Solves the internal-resistance quadratic for the pack current; the
    result is positive while charging. Raises
    :class:`InfeasiblePowerError` when a discharge demand exceeds what
    the pack can deliver (negative discriminant).
    """
    ps_w = ps_kw * 1000.0
    disc = batt.voc**2 + 4.0 * ps_w * batt.rb
    if disc < 0.0:
        raise InfeasiblePowerError(
            f"discharge power {-ps_kw:g} kW exceeds the pack's deliverable maximum"
        )
    return (np.sqrt(disc) - batt.voc) / (7200.0 * batt.cb * batt.rb) * dt_s


def battery_soc_step_masked(batt: BatteryPack, ps_kw, dt_s: float = 1.0):
    """Vectorized ``battery_soc_step`` returning ``(dsoc, feasible)``."""
    ps_w = np.asarray(ps_kw, dtype=float) * 1000.0
    disc = batt.voc**2 + 4.0 * ps_w * batt.rb
    ok = disc >= 0.0
    dsoc = (np.sqrt(np.maximum(disc, 0.0)) - batt.voc) / (7200.0 * batt.cb * batt.rb) * dt_s
    return dsoc, ok


def battery_max_discharge(batt: BatteryPack, soc: float) -> float:
    """Maximum discharge power in kW at a state of charge.

    Zero at or below ``soc_min`` (the usable band is empty there); the
    tabulated curve is clamped at its ends and capped by ``p_abs_max``.
    """
    if soc <= batt.soc_min:
        return 0.0
    p = interp_curve_clamped(batt.p_lim_soc, batt.p_lim_kw, soc)
    return float(min(max(p, 0.0), batt.p_abs_max))


# ---------------------------------------------------------------------------
# vehicle load and kinematics

def demanded_drive_power(
    veh: VehicleParams, v_kmh: float, v_next_kmh: float, f: float, dt_s: float = 1.0
) -> float:
    """Driving power demand in kW over one stage.

    Rolling drag plus acceleration power at the stage's entry speed;
    braking stages come out negative.
    """
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    v = v_kmh * KMH_TO_MS
    a = (v_next_kmh - v_kmh) * KMH_TO_MS / dt_s
    return (veh.mass * veh.gravity * f * v + veh.mass * a * v) / 1000.0


def output_speed_rpm(veh: VehicleParams, v_kmh: float) -> float:
    """Transmission output shaft speed for a road speed."""
    omega_sprocket = v_kmh * KMH_TO_MS / veh.sprocket_radius
    return omega_sprocket * veh.final_drive_ratio / RPM_TO_RAD_S


def machine_speeds_rpm(veh: VehicleParams, ne_rpm, n_out_rpm):
    """Machine A and B speeds from the linear coupling model."""
    c1, c2, c3, c4 = veh.coupling_coeffs
    return c1 * np.asarray(ne_rpm) + c2 * n_out_rpm, c3 * np.asarray(ne_rpm) + c4 * n_out_rpm


# ---------------------------------------------------------------------------
# balances

def power_balance_residuals(flow: PowerFlow, eta_a: float, eta_b: float, mech_path_eff: float):
    """Left-minus-right residuals of the electric and driving balances.

    Electric bus: ``ps + pc + pl + pa*eta_a**(-sgn pa) + pb*eta_b**(-sgn pb)``
    must vanish. Driving: ``pe * mech_path_eff`` must equal
    ``pd + pc + ploss + ps``. A flow is balanced when both residuals are
    within tolerance.
    """
    if not (0.0 < eta_a <= 1.0 and 0.0 < eta_b <= 1.0 and 0.0 < mech_path_eff <= 1.0):
        raise ValueError("efficiencies must lie in (0, 1]")
    term_a = flow.pa * eta_a ** (-np.sign(flow.pa))
    term_b = flow.pb * eta_b ** (-np.sign(flow.pb))
    elec = flow.ps + flow.pc + flow.pl + term_a + term_b
    drive = flow.pe * mech_path_eff - (flow.pd + flow.pc + flow.ploss + flow.ps)
    return float(elec), float(drive)


def bus_conversion_terms(pa, eta_a, pb, eta_b):
    """Electrical-side powers the machines put on (or take from) the bus."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    return pa * eta_a ** (-np.sign(pa)), pb * eta_b ** (-np.sign(pb))
