"""Multi-objective energy management for an electro-mechanical
transmission vehicle.

The package models a heavy vehicle whose engine power splits into a
mechanical and an electrical path. It classifies operation into speed
bands, weighs three normalized objectives (equivalent fuel economy,
driving power reserve, generation reserve) per band, and solves the
optimal per-second power split over a drive cycle by backward dynamic
programming on a state-of-charge grid, benchmarked against a rule-based
power follower.
"""

from .ahp import (
    JUDGMENT_MATRICES,
    PATTERN_WEIGHT_CONSTANTS,
    RANDOM_INDEX,
    ConsistencyReport,
    JudgmentMatrix,
    SumMethodResult,
    consistency,
    default_weights,
    pattern_weights,
    power_iteration,
    sum_method,
    total_ranking,
    validate,
)
from .baseline import RuleConfig, engine_op_line, rule_step, rule_target, simulate_rule
from .cycle_io import (
    DriveCycle,
    Trajectory,
    build_summary,
    parse_curve,
    parse_cycle,
    parse_map_table,
    parse_summary,
    parse_trajectory,
    synth_cycle,
    write_curve,
    write_cycle,
    write_map_table,
    write_summary,
    write_trajectory,
)
from .defaults import (
    default_battery,
    default_engine_map,
    default_machine_a,
    default_machine_b,
    default_model,
    default_vehicle,
)
from .dp import (
    ActionCandidate,
    DpConfig,
    Policy,
    SocGrid,
    StageTables,
    ValueTable,
    backward_solve,
    bellman_residuals,
    brute_force_reference,
    enumerate_actions,
    random_policy_cost,
    rollout,
    stage_cost,
)
from .errors import (
    ConfigError,
    EmtError,
    EnvelopeError,
    InfeasiblePowerError,
    MatrixValidationError,
    ParseError,
    RolloutError,
    SizeGuardError,
    UnsupportedOrderError,
)
from .objectives import (
    ObjectiveParams,
    ObjectiveValues,
    PatternWeights,
    composite,
    j1_norm,
    j1_raw,
    j2_norm,
    j2_raw,
    j3_norm,
    j3_raw,
)
from .patterns import DrivingPattern, PatternSegment, classify_speed, classify_speeds, segment_cycle
from .powertrain import (
    BatteryPack,
    EngineMap,
    MachineMap,
    PowerFlow,
    PowertrainModel,
    VehicleParams,
    battery_max_discharge,
    battery_soc_step,
    demanded_drive_power,
    engine_max_power,
    lookup_fuel_rate,
    machine_efficiency,
    machine_max_power,
    power_balance_residuals,
)

__version__ = "0.1.0"
