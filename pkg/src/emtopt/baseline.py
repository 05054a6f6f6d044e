"""Deterministic rule-based comparison strategy.

A power follower with a state-of-charge band: inside the band the
battery is commanded to idle, below it a fixed charging power is added,
above it a fixed assist discharge is drawn, and demand beyond engine
capability is covered from the battery up to its limits. The engine
point comes from a best-efficiency operating line derived from the fuel
map, and the commanded action is then snapped to the nearest feasible
point of the solver's action grid so rule trajectories are directly
comparable with solved policies over the same action set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cycle_io import DriveCycle, Trajectory
from .dp import ActionCandidate, DpConfig, StageTables, _forward_simulate, enumerate_actions
from .interp import bilinear_masked
from .objectives import ObjectiveParams
from .powertrain import (
    RPM_TO_RAD_S,
    EngineMap,
    PowertrainModel,
    battery_max_discharge,
    machine_speeds_rpm,
    output_speed_rpm,
)


def engine_op_line(engine: EngineMap, levels: int = 121, speed_samples: int = 160):
    """Best-efficiency (power -> speed) line from the fuel map.

    For each power level the engine speed minimizing the fuel rate while
    staying under the maximum-torque curve is selected.
    """
    p_max = float(np.max(engine.max_torque * engine.speed_grid * RPM_TO_RAD_S / 1000.0))
    p_levels = np.linspace(0.0, p_max, levels)
    ne_samples = np.linspace(engine.speed_grid[0], engine.speed_grid[-1], speed_samples)
    max_t = np.interp(ne_samples, engine.speed_grid, engine.max_torque)
    ne_best = np.empty(levels)
    for i, p in enumerate(p_levels):
        te = p * 1000.0 / (ne_samples * RPM_TO_RAD_S)
        fuel, inside = bilinear_masked(
            engine.speed_grid, engine.torque_grid, engine.fuel_table, ne_samples, te
        )
        feasible = inside & (te <= max_t)
        if not feasible.any():
            ne_best[i] = ne_best[i - 1] if i else ne_samples[0]
            continue
        fuel = np.where(feasible, fuel, np.inf)
        ne_best[i] = ne_samples[int(np.argmin(fuel))]
    return p_levels, ne_best


@dataclass(frozen=True)
class RuleConfig:
    """Band thresholds, commanded powers, and the engine operating line."""

    soc_low: float = 0.45
    soc_high: float = 0.55
    charge_power_kw: float = 50.0
    assist_power_kw: float = 50.0
    op_line_levels: int = 121

    def __post_init__(self):
        if not (self.soc_low < self.soc_high):
            raise ValueError("need soc_low < soc_high")
        if self.charge_power_kw < 0 or self.assist_power_kw < 0:
            raise ValueError("commanded powers must be nonnegative")


@dataclass
class RuleTarget:
    """Continuous (unsnapped) command produced by the rule."""

    ne: float
    ta: float
    tb: float
    ps: float
    pe: float
    saturated: bool = False
    notes: tuple = ()


def rule_target(
    soc: float, v_kmh: float, pd_kw: float, pc_kw: float,
    model: PowertrainModel, cfg: RuleConfig, op_line=None,
) -> RuleTarget:
    """The rule's continuous command before grid snapping.

    Inside the band the battery command is exactly zero; demand the
    engine cannot serve shifts to the battery up to its discharge limit
    and is flagged as saturation beyond that.
    """
    veh = model.vehicle
    batt = model.battery
    if op_line is None:
        op_line = engine_op_line(model.engine, cfg.op_line_levels)
    p_levels, ne_line = op_line
    pe_cap = float(p_levels[-1])

    base = pd_kw + pc_kw + veh.proc_loss_frac * abs(pd_kw)
    notes = []
    saturated = False

    ps = 0.0
    if soc < cfg.soc_low:
        ps = min(cfg.charge_power_kw, batt.p_abs_max)
    elif soc > cfg.soc_high:
        ps = -min(cfg.assist_power_kw, battery_max_discharge(batt, soc))

    pe = (base + ps) / veh.mech_path_eff
    if pe < 0.0:
        # braking surplus: absorb it instead of discharging
        ps = min(-base, batt.p_abs_max)
        pe = max((base + ps) / veh.mech_path_eff, 0.0)
        if base + ps < -1e-9:
            saturated = True
            notes.append("unabsorbed braking power")
    elif pe > pe_cap:
        deficit = (pe - pe_cap) * veh.mech_path_eff
        ps = ps - deficit
        floor = -battery_max_discharge(batt, soc)
        if ps < floor:
            ps = floor
            saturated = True
            notes.append("demand beyond engine and battery limits")
        pe = min((base + ps) / veh.mech_path_eff, pe_cap)

    ne = float(np.interp(min(max(pe, 0.0), pe_cap), p_levels, ne_line))

    ta, tb = _back_solve_torques(model, v_kmh, ne, pc_kw, ps)
    return RuleTarget(ne=ne, ta=ta, tb=tb, ps=ps, pe=pe, saturated=saturated, notes=tuple(notes))


def _back_solve_torques(model: PowertrainModel, v_kmh, ne, pc_kw, ps_kw):
    """Machine torques whose closed flow reproduces the commanded battery power.

    Generation duty goes to machine A; a bus surplus motors machine B
    when it is turning, otherwise machine A. Efficiencies are resolved
    by a short fixed-point iteration on the map lookups.
    """
    veh = model.vehicle
    n_out = output_speed_rpm(veh, v_kmh)
    na, nb = machine_speeds_rpm(veh, ne, n_out)
    wa = na * RPM_TO_RAD_S
    wb = nb * RPM_TO_RAD_S
    kappa = veh.elec_loss_frac

    ta = tb = 0.0
    pa = pb = 0.0
    for _ in range(4):
        pl = kappa * (abs(pa) + abs(pb) + abs(ps_kw))
        term_needed = -(pc_kw + pl + ps_kw)
        use_b = term_needed > 0.0 and wb > 1.0
        w = wb if use_b else wa
        if w <= 1.0:
            pa = pb = 0.0
            ta = tb = 0.0
            break
        machine = model.machine_b if use_b else model.machine_a
        n = nb if use_b else na
        t_guess = tb if use_b else ta
        eta, _ = bilinear_masked(
            machine.speed_grid, machine.torque_grid, machine.eff_table,
            np.array([n]), np.array([t_guess]),
        )
        eta = float(eta[0])
        # generating (term < 0): shaft absorbs term/eta; motoring: shaft gives term*eta
        p_mech = term_needed / eta if term_needed <= 0.0 else term_needed * eta
        t_new = p_mech * 1000.0 / w
        if use_b:
            tb, pb = t_new, p_mech
            ta, pa = 0.0, 0.0
        else:
            ta, pa = t_new, p_mech
            tb, pb = 0.0, 0.0
    return float(ta), float(tb)


class _RuleChooser:
    """Per-stage chooser: compute the rule command, snap to the grid."""

    def __init__(self, model, rule_cfg, dp_cfg, tables: StageTables):
        self.model = model
        self.rule_cfg = rule_cfg
        self.op_line = engine_op_line(model.engine, rule_cfg.op_line_levels)
        self.tables = tables
        self.ne_span = max(float(tables.ne_values[-1] - tables.ne_values[0]), 1.0)
        self.ta_span = max(float(tables.ta_values[-1] - tables.ta_values[0]), 1.0)
        self.tb_span = max(float(tables.tb_values[-1] - tables.tb_values[0]), 1.0)
        self.max_snap = np.zeros(3)
        self.max_ps_shift = 0.0
        self.saturation_count = 0

    def __call__(self, k, data, feasible_idx, soc, nxt):
        target = rule_target(
            soc, data.v, data.pd, data.pc, self.model, self.rule_cfg, self.op_line
        )
        if target.saturated:
            self.saturation_count += 1
        d = (
            ((data.ne[feasible_idx] - target.ne) / self.ne_span) ** 2
            + ((data.ta[feasible_idx] - target.ta) / self.ta_span) ** 2
            + ((data.tb[feasible_idx] - target.tb) / self.tb_span) ** 2
        )
        a = int(feasible_idx[int(np.argmin(d))])
        self.max_snap = np.maximum(
            self.max_snap,
            np.abs([data.ne[a] - target.ne, data.ta[a] - target.ta, data.tb[a] - target.tb]),
        )
        self.max_ps_shift = max(self.max_ps_shift, abs(float(data.ps[a]) - target.ps))
        return a


def rule_step(
    cycle: DriveCycle, k: int, soc: float, model: PowertrainModel,
    rule_cfg: RuleConfig, dp_cfg: DpConfig, tables: StageTables | None = None,
) -> ActionCandidate:
    """The rule's snapped action at one stage, as a feasible grid candidate."""
    if tables is None:
        tables = StageTables(cycle, model, dp_cfg)
    candidates = enumerate_actions(cycle, k, soc, model, dp_cfg, tables=tables)
    if not candidates:
        raise ValueError(f"no feasible grid action at stage {k} from SOC {soc:.6f}")
    chooser = _RuleChooser(model, rule_cfg, dp_cfg, tables)
    data = tables.stages[k]
    feasible_idx = np.array([c.index for c in candidates])
    a = chooser(k, data, feasible_idx, soc, None)
    return next(c for c in candidates if c.index == a)


def simulate_rule(
    cycle: DriveCycle,
    model: PowertrainModel,
    weights_by_pattern: dict,
    params: ObjectiveParams,
    rule_cfg: RuleConfig,
    dp_cfg: DpConfig,
    x0: float | None = None,
    tables: StageTables | None = None,
) -> Trajectory:
    """Forward simulation of the rule over a full cycle.

    Saturation events become trajectory flags, not errors; the snapping
    perturbation maxima are reported alongside.
    """
    if tables is None:
        tables = StageTables(cycle, model, dp_cfg)
    if x0 is None:
        x0 = model.battery.soc_init
    chooser = _RuleChooser(model, rule_cfg, dp_cfg, tables)
    traj = _forward_simulate(
        tables, model, weights_by_pattern, params, dp_cfg, x0, chooser, "rule"
    )
    flags = list(traj.flags)
    if chooser.saturation_count:
        flags.append(f"saturation at {chooser.saturation_count} stages")
    flags.append(
        "snap perturbation max: "
        f"dne={chooser.max_snap[0]:.1f} rpm, dta={chooser.max_snap[1]:.1f} N*m, "
        f"dtb={chooser.max_snap[2]:.1f} N*m, dps={chooser.max_ps_shift:.1f} kW"
    )
    return Trajectory(
        t_s=traj.t_s, v_kmh=traj.v_kmh, pattern=traj.pattern, soc=traj.soc,
        ps_kw=traj.ps_kw, pa_kw=traj.pa_kw, pb_kw=traj.pb_kw, pe_kw=traj.pe_kw,
        pd_kw=traj.pd_kw, pc_kw=traj.pc_kw, ne_rpm=traj.ne_rpm, te_nm=traj.te_nm,
        fuel_gps=traj.fuel_gps, dsoc=traj.dsoc, j1_bar=traj.j1_bar,
        j2_bar=traj.j2_bar, j3_bar=traj.j3_bar, stage_cost=traj.stage_cost,
        fuel_density=traj.fuel_density, strategy="rule", flags=tuple(flags),
    )
