"""Backward dynamic programming over a state-of-charge grid.

State is the battery state of charge alone: with a fixed cycle and
quasi-static maps, engine speed and machine torques carry no inter-stage
memory, so they are decision variables ``(ne, ta, tb)`` rather than
state. For each action the power flow closes deterministically: machine
speeds follow from the coupling model, battery power is the electrical
slack of the bus balance, engine power is the slack of the driving
balance, and fuel comes from the map at the resulting operating point.

The stage cost is the pattern-weighted sum of the three normalized
objectives; the terminal cost is zero by default. Infeasible nodes carry
a large finite penalty so the value table stays totally ordered.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cycle_io import DriveCycle, Trajectory
from .errors import RolloutError, SizeGuardError
from .interp import bilinear_masked
from .objectives import ObjectiveParams, PatternWeights
from .patterns import DrivingPattern
from .powertrain import (
    RPM_TO_RAD_S,
    PowerFlow,
    PowertrainModel,
    battery_max_discharge,
    battery_soc_step_masked,
    demanded_drive_power,
    machine_speeds_rpm,
    output_speed_rpm,
)

BOUND_TOL = 1e-9


@dataclass(frozen=True)
class SocGrid:
    """Uniform state-of-charge grid spanning the battery's usable band."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        if nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ValueError("SOC grid needs at least 2 strictly increasing nodes")

    @classmethod
    def from_battery(cls, batt, count: int = 101) -> "SocGrid":
        return cls(np.linspace(batt.soc_min, batt.soc_max, count))

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def count(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class DpConfig:
    """Grid resolutions and solver controls.

    Action grids default to evenly spaced values over the engine speed
    range and symmetric machine torque spans; explicit value arrays
    override the counts when given.
    """

    soc_count: int = 101
    ne_count: int = 10
    ta_count: int = 7
    tb_count: int = 7
    ta_span: float = 1200.0
    tb_span: float = 1200.0
    ne_values: tuple | None = None
    ta_values: tuple | None = None
    tb_values: tuple | None = None
    balance_tol_kw: float = 1e-6
    infeasible_penalty: float = 1e6
    terminal_soc_penalty: float = 0.0
    interpolation: str = "linear"

    def __post_init__(self):
        if self.soc_count < 2:
            raise ValueError("need at least 2 SOC nodes")
        for name in ("ne_count", "ta_count", "tb_count"):
            if getattr(self, name) < 2 and getattr(self, name.replace("_count", "_values")) is None:
                raise ValueError(f"{name} must be at least 2 (or give explicit values)")
        if self.infeasible_penalty <= 0:
            raise ValueError("infeasible penalty must be positive")
        if self.interpolation != "linear":
            raise ValueError(f"only linear cost-to-go interpolation is supported, got {self.interpolation!r}")


def action_grid(model: PowertrainModel, cfg: DpConfig):
    """Decision grids ``(ne_values, ta_values, tb_values, actions)``.

    ``actions`` is the (A, 3) cartesian product in ne-major order.
    """
    eng = model.engine
    ne = np.asarray(cfg.ne_values, dtype=float) if cfg.ne_values is not None else \
        np.linspace(eng.speed_grid[0], eng.speed_grid[-1], cfg.ne_count)
    ta = np.asarray(cfg.ta_values, dtype=float) if cfg.ta_values is not None else \
        np.linspace(-cfg.ta_span, cfg.ta_span, cfg.ta_count)
    tb = np.asarray(cfg.tb_values, dtype=float) if cfg.tb_values is not None else \
        np.linspace(-cfg.tb_span, cfg.tb_span, cfg.tb_count)
    grids = np.meshgrid(ne, ta, tb, indexing="ij")
    actions = np.stack([g.ravel() for g in grids], axis=1)
    return ne, ta, tb, actions


@dataclass
class StageData:
    """Soc-independent evaluation of every action at one stage."""

    k: int
    t: float
    dt: float
    v: float
    f: float
    pc: float
    pd: float
    pattern: DrivingPattern
    ne: np.ndarray
    ta: np.ndarray
    tb: np.ndarray
    na: np.ndarray
    nb: np.ndarray
    eta_a: np.ndarray
    eta_b: np.ndarray
    pa: np.ndarray
    pb: np.ndarray
    ps: np.ndarray
    pl: np.ndarray
    ploss: float
    pe: np.ndarray
    te: np.ndarray
    fuel: np.ndarray
    dsoc: np.ndarray
    pe_max: np.ndarray
    pa_max: np.ndarray
    pb_max: np.ndarray
    ok: np.ndarray


class StageTables:
    """Per-stage action evaluations shared by every solver and simulator."""

    def __init__(self, cycle: DriveCycle, model: PowertrainModel, cfg: DpConfig):
        self.cycle = cycle
        self.model = model
        self.cfg = cfg
        self.ne_values, self.ta_values, self.tb_values, self.actions = action_grid(model, cfg)
        dt = cycle.dt()
        v = cycle.v_kmh
        v_next = np.append(v[1:], v[-1])
        patterns = cycle.patterns()
        self.stages = [
            _evaluate_stage(
                model, cfg, self.actions, k,
                t=float(cycle.t_s[k]), dt=float(dt[k]), v=float(v[k]),
                v_next=float(v_next[k]), f=float(cycle.f[k]),
                pc=float(cycle.pc_kw[k]), pattern=DrivingPattern(int(patterns[k])),
            )
            for k in range(cycle.n)
        ]

    @property
    def n(self) -> int:
        return len(self.stages)

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]


def _evaluate_stage(model, cfg, actions, k, t, dt, v, v_next, f, pc, pattern) -> StageData:
    veh = model.vehicle
    eng = model.engine
    ne, ta, tb = actions[:, 0], actions[:, 1], actions[:, 2]

    pd = demanded_drive_power(veh, v, v_next, f, dt)
    n_out = output_speed_rpm(veh, v)
    na, nb = machine_speeds_rpm(veh, ne, n_out)
    pa = ta * na * RPM_TO_RAD_S / 1000.0
    pb = tb * nb * RPM_TO_RAD_S / 1000.0

    eta_a, in_a = bilinear_masked(
        model.machine_a.speed_grid, model.machine_a.torque_grid,
        model.machine_a.eff_table, na, ta,
    )
    eta_b, in_b = bilinear_masked(
        model.machine_b.speed_grid, model.machine_b.torque_grid,
        model.machine_b.eff_table, nb, tb,
    )

    term_a = pa * eta_a ** (-np.sign(pa))
    term_b = pb * eta_b ** (-np.sign(pb))
    kappa = veh.elec_loss_frac
    s = -(pc + kappa * (np.abs(pa) + np.abs(pb)) + term_a + term_b)
    ps = np.where(s >= 0.0, s / (1.0 + kappa), s / (1.0 - kappa))
    pl = kappa * (np.abs(pa) + np.abs(pb) + np.abs(ps))
    ploss = veh.proc_loss_frac * abs(pd)
    pe = (pd + pc + ploss + ps) / veh.mech_path_eff
    te = pe * 1000.0 / (ne * RPM_TO_RAD_S)

    fuel, in_e = bilinear_masked(eng.speed_grid, eng.torque_grid, eng.fuel_table, ne, te)
    max_torque = np.interp(ne, eng.speed_grid, eng.max_torque)
    pe_max = max_torque * ne * RPM_TO_RAD_S / 1000.0

    batt = model.battery
    dsoc, batt_ok = battery_soc_step_masked(batt, ps, dt)

    ma, mb = model.machine_a, model.machine_b
    pa_max = np.interp(np.abs(ta), ma.max_power_torque, ma.max_power_kw)
    pb_max = np.interp(np.abs(tb), mb.max_power_torque, mb.max_power_kw)
    in_curve = (np.abs(ta) <= ma.max_power_torque[-1]) & (np.abs(tb) <= mb.max_power_torque[-1])

    ok = (
        in_a & in_b & in_e & in_curve & batt_ok
        & (te <= max_torque + BOUND_TOL)
        & (np.abs(pa) <= pa_max + BOUND_TOL)
        & (np.abs(pb) <= pb_max + BOUND_TOL)
        & (np.abs(ps) <= batt.p_abs_max + BOUND_TOL)
    )

    return StageData(
        k=k, t=t, dt=dt, v=v, f=f, pc=pc, pd=pd, pattern=pattern,
        ne=ne, ta=ta, tb=tb, na=na, nb=nb, eta_a=eta_a, eta_b=eta_b,
        pa=pa, pb=pb, ps=ps, pl=pl, ploss=ploss, pe=pe, te=te,
        fuel=fuel, dsoc=dsoc, pe_max=pe_max, pa_max=pa_max, pb_max=pb_max, ok=ok,
    )


def _cost_terms(data: StageData, ps_max, dev2, alphas, params: ObjectiveParams):
    """Stage cost for every action; ``ps_max``/``dev2`` broadcast over nodes."""
    j1 = (data.fuel + params.gamma1 * data.dsoc + params.gamma2 * dev2) / params.j1_max()
    cap2 = data.pe_max + ps_max
    j2 = np.where(cap2 > 0.0, -(cap2 - data.pd) / np.where(cap2 > 0.0, cap2, 1.0), 0.0)
    cap3 = data.pa_max + data.pb_max + ps_max
    j3 = np.where(cap3 > 0.0, -(cap3 - data.pc) / np.where(cap3 > 0.0, cap3, 1.0), 0.0)
    return alphas[0] * j1 + alphas[1] * j2 + alphas[2] * j3, j1, j2, j3


def _node_limits(model, grid: SocGrid, params: ObjectiveParams):
    ps_max = np.array([battery_max_discharge(model.battery, s) for s in grid.nodes])
    dev2 = (grid.nodes - params.soc0) ** 2
    return ps_max, dev2


@dataclass(frozen=True)
class ValueTable:
    """Cost-to-go per (stage, SOC node); row N is the terminal cost."""

    values: np.ndarray
    grid: SocGrid

    def interp(self, k: int, soc) -> float:
        return float(np.interp(soc, self.grid.nodes, self.values[k]))


@dataclass(frozen=True)
class Policy:
    """Best action index per (stage, SOC node); -1 marks infeasible nodes."""

    action_index: np.ndarray
    actions: np.ndarray

    def action(self, k: int, m: int):
        idx = int(self.action_index[k, m])
        if idx < 0:
            return None
        return tuple(self.actions[idx])


@dataclass(frozen=True)
class ActionCandidate:
    """One feasible decision with its derived stage quantities."""

    index: int
    ne: float
    ta: float
    tb: float
    flow: PowerFlow
    te: float
    fuel_gps: float
    dsoc: float
    soc: float
    next_soc: float
    pe_max: float
    ps_max: float
    pa_max: float
    pb_max: float
    pd: float
    pc: float
    pattern: DrivingPattern


def _feasible_at(data: StageData, soc: float, ps_max: float, grid_lo: float, grid_hi: float):
    nxt = soc + data.dsoc
    return (
        data.ok
        & (-data.ps <= ps_max + BOUND_TOL)
        & (nxt >= grid_lo - BOUND_TOL)
        & (nxt <= grid_hi + BOUND_TOL)
    ), nxt


def enumerate_actions(
    cycle: DriveCycle, k: int, soc: float, model: PowertrainModel, cfg: DpConfig,
    tables: StageTables | None = None,
) -> list[ActionCandidate]:
    """All feasible action candidates at stage ``k`` from state ``soc``.

    An empty list is a legal result; the solver prices such states with
    the infeasible penalty.
    """
    if tables is None:
        tables = StageTables(cycle, model, cfg)
    data = tables.stages[k]
    batt = model.battery
    ps_max = battery_max_discharge(batt, soc)
    ok, nxt = _feasible_at(data, soc, ps_max, batt.soc_min, batt.soc_max)
    out = []
    for a in np.flatnonzero(ok):
        flow = PowerFlow(
            ps=float(data.ps[a]), pc=data.pc, pl=float(data.pl[a]),
            pa=float(data.pa[a]), pb=float(data.pb[a]), pe=float(data.pe[a]),
            pd=data.pd, ploss=data.ploss,
        )
        out.append(ActionCandidate(
            index=int(a), ne=float(data.ne[a]), ta=float(data.ta[a]), tb=float(data.tb[a]),
            flow=flow, te=float(data.te[a]), fuel_gps=float(data.fuel[a]),
            dsoc=float(data.dsoc[a]), soc=float(soc),
            next_soc=float(min(max(nxt[a], batt.soc_min), batt.soc_max)),
            pe_max=float(data.pe_max[a]), ps_max=float(ps_max),
            pa_max=float(data.pa_max[a]), pb_max=float(data.pb_max[a]),
            pd=data.pd, pc=data.pc, pattern=data.pattern,
        ))
    return out


def stage_cost(candidate: ActionCandidate, weights: PatternWeights, params: ObjectiveParams) -> float:
    """Pattern-weighted composite cost of one candidate.

    A reserve capacity of exactly zero contributes zero (it can only
    occur with zero matching demand on a feasible candidate).
    """
    j1 = (
        candidate.fuel_gps
        + params.gamma1 * candidate.dsoc
        + params.gamma2 * (candidate.soc - params.soc0) ** 2
    ) / params.j1_max()
    cap2 = candidate.pe_max + candidate.ps_max
    j2 = -(cap2 - candidate.pd) / cap2 if cap2 > 0 else 0.0
    cap3 = candidate.pa_max + candidate.pb_max + candidate.ps_max
    j3 = -(cap3 - candidate.pc) / cap3 if cap3 > 0 else 0.0
    return weights.alpha1 * j1 + weights.alpha2 * j2 + weights.alpha3 * j3


def _tie_broken_argmin(value, fuel, abs_ps):
    """Row argmin of ``value`` breaking exact ties by fuel, |ps|, index."""
    best = value.min(axis=1)
    tie = value == best[:, None]
    f = np.where(tie, fuel[None, :], np.inf)
    tie &= f == f.min(axis=1)[:, None]
    p = np.where(tie, abs_ps[None, :], np.inf)
    tie &= p == p.min(axis=1)[:, None]
    return best, np.argmax(tie, axis=1)


def _solve_stage_rows(data, rows, nodes, ps_max_nodes, dev2_nodes, alphas, params, v_next, lo, hi, penalty):
    """Value and policy for a slice of SOC nodes at one stage."""
    node_soc = nodes[rows, None]
    cost, _, _, _ = _cost_terms(
        data, ps_max_nodes[rows, None], dev2_nodes[rows, None], alphas, params
    )
    nxt = node_soc + data.dsoc[None, :]
    ok = (
        data.ok[None, :]
        & (-data.ps[None, :] <= ps_max_nodes[rows, None] + BOUND_TOL)
        & (nxt >= lo - BOUND_TOL)
        & (nxt <= hi + BOUND_TOL)
    )
    future = np.interp(np.clip(nxt, lo, hi).ravel(), nodes, v_next).reshape(nxt.shape)
    total = np.where(ok, cost + future, np.inf)
    best, idx = _tie_broken_argmin(total, data.fuel, np.abs(data.ps))
    feasible = np.isfinite(best)
    values = np.where(feasible, best, penalty)
    return values, np.where(feasible, idx, -1)


def backward_solve(
    cycle: DriveCycle,
    model: PowertrainModel,
    weights_by_pattern: dict,
    params: ObjectiveParams,
    cfg: DpConfig,
    tables: StageTables | None = None,
    threads: int = 1,
):
    """Backward recursion over the SOC grid.

    Returns ``(ValueTable, Policy)``. Node values at stage ``k`` are the
    minimum over feasible actions of the stage cost plus the linearly
    interpolated cost-to-go at the successor SOC; nodes with no feasible
    action receive the infeasible penalty. Exact cost ties break toward
    lower fuel rate, then lower battery power magnitude, then lower
    action index, independent of evaluation order.
    """
    if tables is None:
        tables = StageTables(cycle, model, cfg)
    grid = SocGrid.from_battery(model.battery, cfg.soc_count)
    nodes = grid.nodes
    m = grid.count
    n = tables.n
    ps_max_nodes, dev2_nodes = _node_limits(model, grid, params)
    alphas_by_stage = [weights_by_pattern[d.pattern].as_tuple() for d in tables.stages]

    values = np.empty((n + 1, m))
    values[n] = cfg.terminal_soc_penalty * (nodes - params.soc0) ** 2
    action_index = np.empty((n, m), dtype=np.int32)

    chunks = [np.arange(m)]
    pool = None
    if threads > 1:
        chunks = np.array_split(np.arange(m), threads)
        pool = ThreadPoolExecutor(max_workers=threads)
    try:
        for k in range(n - 1, -1, -1):
            data = tables.stages[k]
            args = (nodes, ps_max_nodes, dev2_nodes, alphas_by_stage[k], params,
                    values[k + 1], grid.lo, grid.hi, cfg.infeasible_penalty)
            if pool is None:
                values[k], action_index[k] = _solve_stage_rows(data, chunks[0], *args)
            else:
                futures = [pool.submit(_solve_stage_rows, data, rows, *args) for rows in chunks]
                for rows, fut in zip(chunks, futures):
                    v_rows, i_rows = fut.result()
                    values[k][rows] = v_rows
                    action_index[k][rows] = i_rows
    finally:
        if pool is not None:
            pool.shutdown()

    return ValueTable(values=values, grid=grid), Policy(action_index=action_index, actions=tables.actions)


def bellman_residuals(
    table: ValueTable, cycle, model, weights_by_pattern, params, cfg,
    tables: StageTables | None = None,
) -> np.ndarray:
    """|V[k] - min over actions of (cost + interp V[k+1])| per (stage, node)."""
    if tables is None:
        tables = StageTables(cycle, model, cfg)
    grid = table.grid
    nodes = grid.nodes
    ps_max_nodes, dev2_nodes = _node_limits(model, grid, params)
    out = np.empty((tables.n, grid.count))
    for k in range(tables.n):
        data = tables.stages[k]
        alphas = weights_by_pattern[data.pattern].as_tuple()
        recomputed, _ = _solve_stage_rows(
            data, np.arange(grid.count), nodes, ps_max_nodes, dev2_nodes,
            alphas, params, table.values[k + 1], grid.lo, grid.hi,
            cfg.infeasible_penalty,
        )
        out[k] = np.abs(table.values[k] - recomputed)
    return out


# ---------------------------------------------------------------------------
# forward simulation

def _forward_simulate(
    tables: StageTables, model, weights_by_pattern, params, cfg, x0: float,
    chooser, strategy: str,
) -> Trajectory:
    """Roll a policy forward; ``chooser`` picks an action index per stage.

    ``chooser(k, data, feasible_idx, soc, nxt)`` must return one of the
    feasible indices or raise.
    """
    batt = model.battery
    n = tables.n
    rec = {name: np.empty(n) for name in (
        "t", "v", "soc", "ps", "pa", "pb", "pe", "pd", "pc", "ne", "te",
        "fuel", "dsoc", "j1", "j2", "j3", "cost",
    )}
    pattern = np.empty(n, dtype=np.int64)
    flags: list[str] = []
    soc = float(x0)
    for k in range(n):
        data = tables.stages[k]
        ps_max = battery_max_discharge(batt, soc)
        ok, nxt = _feasible_at(data, soc, ps_max, batt.soc_min, batt.soc_max)
        feasible_idx = np.flatnonzero(ok)
        if feasible_idx.size == 0:
            raise RolloutError(
                f"no feasible action at stage {k} from SOC {soc:.6f}", stage=k, soc=soc
            )
        a = int(chooser(k, data, feasible_idx, soc, nxt))
        alphas = weights_by_pattern[data.pattern].as_tuple()
        dev2 = (soc - params.soc0) ** 2
        cost_vec, j1, j2, j3 = _cost_terms(data, ps_max, dev2, alphas, params)
        rec["t"][k] = data.t
        rec["v"][k] = data.v
        pattern[k] = int(data.pattern)
        rec["soc"][k] = soc
        rec["ps"][k] = data.ps[a]
        rec["pa"][k] = data.pa[a]
        rec["pb"][k] = data.pb[a]
        rec["pe"][k] = data.pe[a]
        rec["pd"][k] = data.pd
        rec["pc"][k] = data.pc
        rec["ne"][k] = data.ne[a]
        rec["te"][k] = data.te[a]
        rec["fuel"][k] = data.fuel[a]
        rec["dsoc"][k] = data.dsoc[a]
        rec["j1"][k] = j1[a]
        rec["j2"][k] = j2[a]
        rec["j3"][k] = j3[a]
        rec["cost"][k] = cost_vec[a]
        soc = float(min(max(nxt[a], batt.soc_min), batt.soc_max))
    return Trajectory(
        t_s=rec["t"], v_kmh=rec["v"], pattern=pattern, soc=rec["soc"],
        ps_kw=rec["ps"], pa_kw=rec["pa"], pb_kw=rec["pb"], pe_kw=rec["pe"],
        pd_kw=rec["pd"], pc_kw=rec["pc"], ne_rpm=rec["ne"], te_nm=rec["te"],
        fuel_gps=rec["fuel"], dsoc=rec["dsoc"], j1_bar=rec["j1"],
        j2_bar=rec["j2"], j3_bar=rec["j3"], stage_cost=rec["cost"],
        fuel_density=model.vehicle.fuel_density, strategy=strategy,
        flags=tuple(flags),
    )


def rollout(
    policy: Policy,
    table: ValueTable,
    cycle: DriveCycle,
    model: PowertrainModel,
    weights_by_pattern: dict,
    params: ObjectiveParams,
    cfg: DpConfig,
    x0: float | None = None,
    tables: StageTables | None = None,
) -> Trajectory:
    """Forward pass of the solved policy from ``x0`` (default ``soc_init``).

    At each stage the action is re-minimized at the exact, off-grid
    state of charge using the solved cost-to-go, which keeps the rollout
    optimal between grid nodes. Raises :class:`RolloutError` on a
    dead-end state.
    """
    if tables is None:
        tables = StageTables(cycle, model, cfg)
    batt = model.battery
    if x0 is None:
        x0 = batt.soc_init
    if not (batt.soc_min <= x0 <= batt.soc_max):
        raise ValueError(f"x0 {x0} outside [{batt.soc_min}, {batt.soc_max}]")
    nodes = table.grid.nodes

    def choose(k, data, feasible_idx, soc, nxt):
        ps_max = battery_max_discharge(batt, soc)
        dev2 = (soc - params.soc0) ** 2
        alphas = weights_by_pattern[data.pattern].as_tuple()
        cost_vec, _, _, _ = _cost_terms(data, ps_max, dev2, alphas, params)
        future = np.interp(
            np.clip(nxt[feasible_idx], table.grid.lo, table.grid.hi),
            nodes, table.values[k + 1],
        )
        total = cost_vec[feasible_idx] + future
        best = total.min()
        tie = feasible_idx[total == best]
        if tie.size > 1:
            order = np.lexsort((tie, np.abs(data.ps[tie]), data.fuel[tie]))
            return tie[order[0]]
        return tie[0]

    return _forward_simulate(tables, model, weights_by_pattern, params, cfg, x0, choose, "dp")


def random_policy_cost(
    tables: StageTables, model, weights_by_pattern, params, cfg, x0: float, rng,
) -> float:
    """Composite cost of a uniformly random feasible policy.

    Dead ends are priced with the infeasible penalty so the result stays
    comparable to solved costs.
    """
    batt = model.battery
    soc = float(x0)
    total = 0.0
    for k in range(tables.n):
        data = tables.stages[k]
        ps_max = battery_max_discharge(batt, soc)
        ok, nxt = _feasible_at(data, soc, ps_max, batt.soc_min, batt.soc_max)
        feasible_idx = np.flatnonzero(ok)
        if feasible_idx.size == 0:
            return total + cfg.infeasible_penalty
        a = int(rng.choice(feasible_idx))
        alphas = weights_by_pattern[data.pattern].as_tuple()
        cost_vec, _, _, _ = _cost_terms(data, ps_max, (soc - params.soc0) ** 2, alphas, params)
        total += float(cost_vec[a])
        soc = float(min(max(nxt[a], batt.soc_min), batt.soc_max))
    return total


# ---------------------------------------------------------------------------
# exhaustive oracle

def brute_force_reference(
    cycle: DriveCycle,
    model: PowertrainModel,
    weights_by_pattern: dict,
    params: ObjectiveParams,
    cfg: DpConfig,
    tables: StageTables | None = None,
    max_paths: float = 1e7,
) -> np.ndarray:
    """Optimal total cost from each SOC grid node by exhaustive enumeration.

    Successor states snap to the nearest grid node, so on instances whose
    dynamics land exactly on nodes this enumerates the same problem the
    backward recursion solves, with no value interpolation involved.
    """
    if tables is None:
        tables = StageTables(cycle, model, cfg)
    n = tables.n
    n_actions = tables.n_actions
    if n_actions**n > max_paths:
        raise SizeGuardError(
            f"{n_actions} actions over {n} stages exceeds the {max_paths:g}-path guard"
        )
    grid = SocGrid.from_battery(model.battery, cfg.soc_count)
    nodes = grid.nodes
    ps_max_nodes, dev2_nodes = _node_limits(model, grid, params)
    terminal = cfg.terminal_soc_penalty * (nodes - params.soc0) ** 2

    def explore(k: int, m: int) -> float:
        if k == n:
            return float(terminal[m])
        data = tables.stages[k]
        soc = nodes[m]
        ok, nxt = _feasible_at(data, soc, float(ps_max_nodes[m]), grid.lo, grid.hi)
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            return cfg.infeasible_penalty
        alphas = weights_by_pattern[data.pattern].as_tuple()
        cost_vec, _, _, _ = _cost_terms(
            data, float(ps_max_nodes[m]), float(dev2_nodes[m]), alphas, params
        )
        best = np.inf
        for a in idx:
            m_next = int(np.argmin(np.abs(nodes - nxt[a])))
            best = min(best, float(cost_vec[a]) + explore(k + 1, m_next))
        return best

    return np.array([explore(0, m) for m in range(grid.count)])
