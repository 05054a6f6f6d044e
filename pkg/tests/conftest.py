import time

import numpy as np
import pytest

import emtopt
from emtopt.baseline import simulate_rule
from emtopt.dp import StageTables, backward_solve, rollout


@pytest.fixture(scope="session")
def model():
    return emtopt.default_model()


@pytest.fixture(scope="session")
def bundled_cycle():
    return emtopt.synth_cycle()


@pytest.fixture(scope="session")
def params():
    return emtopt.ObjectiveParams()


@pytest.fixture(scope="session")
def weights_map():
    return emtopt.default_weights()


@pytest.fixture(scope="session")
def dp_cfg():
    return emtopt.DpConfig()


@pytest.fixture(scope="session")
def full_tables(bundled_cycle, model, dp_cfg):
    return StageTables(bundled_cycle, model, dp_cfg)


@pytest.fixture(scope="session")
def full_solution(bundled_cycle, model, weights_map, params, dp_cfg, full_tables):
    """Default-resolution solve of the bundled cycle, with wall time."""
    t0 = time.perf_counter()
    tables = StageTables(bundled_cycle, model, dp_cfg)
    table, policy = backward_solve(
        bundled_cycle, model, weights_map, params, dp_cfg, tables=tables
    )
    traj = rollout(
        policy, table, bundled_cycle, model, weights_map, params, dp_cfg, tables=tables
    )
    elapsed = time.perf_counter() - t0
    # reuse the prebuilt session tables for everything downstream
    del tables
    return {"table": table, "policy": policy, "trajectory": traj, "elapsed_s": elapsed}


@pytest.fixture(scope="session")
def gamma0_solution(bundled_cycle, model, weights_map, dp_cfg, full_tables):
    p0 = emtopt.ObjectiveParams(gamma2=0.0)
    table, policy = backward_solve(
        bundled_cycle, model, weights_map, p0, dp_cfg, tables=full_tables
    )
    traj = rollout(
        policy, table, bundled_cycle, model, weights_map, p0, dp_cfg, tables=full_tables
    )
    return {"table": table, "trajectory": traj}


@pytest.fixture(scope="session")
def rule_trajectory(bundled_cycle, model, weights_map, params, dp_cfg, full_tables):
    return simulate_rule(
        bundled_cycle, model, weights_map, params, emtopt.RuleConfig(), dp_cfg,
        tables=full_tables,
    )


# ---------------------------------------------------------------------------
# node-snapped oracle instances

def snapped_instance(rng):
    """Random small instance whose SOC dynamics land exactly on grid nodes.

    Machine torques are solved from target SOC steps (exact multiples of
    the node spacing) by inverting the battery quadratic through a
    lossless closure, so interpolation and node snapping agree and the
    backward recursion must match exhaustive enumeration bit-for-bit at
    the comparison tolerance.
    """
    m_nodes = int(rng.integers(2, 5))
    n_stages = int(rng.integers(1, 6))
    n_actions = int(rng.integers(2, 7))
    h = 1e-3
    soc_min = 0.5
    soc_max = 0.5 + (m_nodes - 1) * h
    batt = emtopt.BatteryPack(
        voc=600.0, rb=0.05, cb=99.0,
        soc_min=soc_min, soc_max=soc_max, soc_init=0.5 + (soc_max - soc_min) / 2.0,
        p_lim_soc=np.array([0.0, 1.0]), p_lim_kw=np.array([500.0, 500.0]),
        p_abs_max=500.0,
    )
    veh = emtopt.VehicleParams(
        mass=40000.0, final_drive_ratio=4.0, sprocket_radius=0.3,
        coupling_coeffs=(1.0, 0.0, 0.0, 1.0), mech_path_eff=1.0,
        elec_loss_frac=0.0, proc_loss_frac=0.0,
    )
    engine = emtopt.EngineMap(
        speed_grid=np.array([500.0, 4000.0]),
        torque_grid=np.array([0.0, 6000.0]),
        fuel_table=rng.uniform(5.0, 60.0, size=(2, 2)),
        max_torque=np.array([6000.0, 6000.0]),
    )
    machine = emtopt.MachineMap(
        speed_grid=np.array([0.0, 6500.0]),
        torque_grid=np.array([-3000.0, 3000.0]),
        eff_table=np.full((2, 2), 0.9),
        max_power_torque=np.array([0.0, 3000.0]),
        max_power_kw=np.array([1000.0, 1000.0]),
    )
    model = emtopt.PowertrainModel(
        engine=engine, machine_a=machine, machine_b=machine, battery=batt, vehicle=veh
    )

    pc = float(rng.uniform(5.0, 40.0))
    steps = np.concatenate([[0], rng.integers(-2, 3, size=n_actions - 1)])
    omega_a = 2000.0 * 2.0 * np.pi / 60.0
    ta_values = []
    for s in steps:
        delta = s * h
        ps_w = ((7200.0 * batt.cb * batt.rb * delta + batt.voc) ** 2 - batt.voc**2) / (4.0 * batt.rb)
        ps_kw = ps_w / 1000.0
        term = -(pc + ps_kw)
        pa = term / 0.9 if term <= 0 else term * 0.9
        ta_values.append(pa * 1000.0 / omega_a)
    ta_values = np.unique(np.array(ta_values))

    t = np.arange(n_stages, dtype=float)
    v = np.clip(40.0 + np.cumsum(rng.uniform(-1.0, 1.0, n_stages)) * 0.5, 36.0, 44.0)
    cycle = emtopt.DriveCycle(t, v, rng.uniform(0.03, 0.06, n_stages), np.full(n_stages, pc))

    cfg = emtopt.DpConfig(
        soc_count=m_nodes,
        ne_values=(2000.0,), ta_values=tuple(ta_values), tb_values=(0.0,),
    )
    return cycle, model, cfg
