"""Drive-cycle, map, trajectory and summary file formats.

All emitters write numbers with shortest round-trip precision, so
emit -> parse -> emit is byte-stable. Parsers attach a file line number
to every failure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .patterns import DrivingPattern, classify_speeds

CYCLE_HEADER = "t_s,v_kmh,f,pc_kw"
TRAJECTORY_HEADER = (
    "t_s,v_kmh,pattern,soc,ps_kw,pa_kw,pb_kw,pe_kw,pd_kw,pc_kw,"
    "ne_rpm,te_nm,fuel_gps,dsoc,j1_bar,j2_bar,j3_bar,stage_cost"
)

SYNTH_CYCLE_LENGTH = 1486


def _fmt(x) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _parse_float(token: str, line_no: int, column: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(
            f"line {line_no}: column {column!r} is not numeric: {token!r}", row=line_no
        ) from None


@dataclass(frozen=True)
class DriveCycle:
    """Per-second drive cycle records.

    ``t_s`` must be strictly increasing; by default spacing must be a
    uniform 1 s (the state-of-charge step constant assumes it), unless
    constructed with ``dt_tolerant=True``.
    """

    t_s: np.ndarray
    v_kmh: np.ndarray
    f: np.ndarray
    pc_kw: np.ndarray
    dt_tolerant: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("t_s", "v_kmh", "f", "pc_kw"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        n = self.t_s.size
        if n == 0:
            raise ValueError("cycle must contain at least one record")
        if not all(getattr(self, name).size == n for name in ("v_kmh", "f", "pc_kw")):
            raise ValueError("cycle columns must have equal length")
        if n > 1:
            dt = np.diff(self.t_s)
            if np.any(dt <= 0):
                raise ValueError("time must be strictly increasing")
            if not self.dt_tolerant and np.any(np.abs(dt - 1.0) > 1e-9):
                raise ValueError(
                    "non-uniform time spacing; pass dt_tolerant=True to accept per-row dt"
                )
        if np.any(self.v_kmh < 0):
            raise ValueError("speeds must be nonnegative")
        if np.any(self.f < 0):
            raise ValueError("road drag coefficients must be nonnegative")
        if np.any(self.pc_kw < 0):
            raise ValueError("electric power demand must be nonnegative")

    @property
    def n(self) -> int:
        return self.t_s.size

    def dt(self) -> np.ndarray:
        """Per-stage durations; the last stage reuses the previous spacing."""
        if self.n == 1:
            return np.array([1.0])
        d = np.diff(self.t_s)
        return np.append(d, d[-1])

    def patterns(self) -> np.ndarray:
        return classify_speeds(self.v_kmh)


def parse_cycle(text: str, dt_tolerant: bool = False) -> DriveCycle:
    """Parse the cycle CSV format (header ``t_s,v_kmh,f,pc_kw``)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty cycle file", row=1)
    if lines[0].strip() != CYCLE_HEADER:
        raise ParseError(
            f"line 1: expected header {CYCLE_HEADER!r}, got {lines[0].strip()!r}", row=1
        )
    cols: list[list[float]] = [[], [], [], []]
    names = CYCLE_HEADER.split(",")
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(
                f"line {line_no}: expected 4 fields, got {len(parts)}", row=line_no
            )
        for c, (name, token) in enumerate(zip(names, parts)):
            cols[c].append(_parse_float(token.strip(), line_no, name))
    if not cols[0]:
        raise ParseError("cycle file has no data rows", row=1)
    try:
        return DriveCycle(
            np.array(cols[0]), np.array(cols[1]), np.array(cols[2]), np.array(cols[3]),
            dt_tolerant=dt_tolerant,
        )
    except ValueError as exc:
        raise _locate_cycle_error(cols, str(exc)) from None


def _locate_cycle_error(cols, message) -> ParseError:
    t, v, f, pc = (np.array(c) for c in cols)
    for k in range(t.size):
        line_no = k + 2
        if v[k] < 0:
            return ParseError(f"line {line_no}: negative speed {v[k]!r}", row=line_no)
        if f[k] < 0:
            return ParseError(f"line {line_no}: negative drag coefficient {f[k]!r}", row=line_no)
        if pc[k] < 0:
            return ParseError(f"line {line_no}: negative power demand {pc[k]!r}", row=line_no)
        if k > 0 and t[k] <= t[k - 1]:
            return ParseError(f"line {line_no}: time not increasing at {t[k]!r}", row=line_no)
    return ParseError(message)


def write_cycle(cycle: DriveCycle) -> str:
    rows = [CYCLE_HEADER]
    for k in range(cycle.n):
        rows.append(",".join(_fmt(x) for x in (
            cycle.t_s[k], cycle.v_kmh[k], cycle.f[k], cycle.pc_kw[k]
        )))
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# map and curve files

def parse_map_table(text: str):
    """Parse a component map CSV into ``(speed_grid, torque_grid, table)``.

    Layout: cell (1,1) blank, first row the speed grid, first column the
    torque grid, body the values. The returned table is indexed
    ``[speed, torque]``.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ParseError("map file needs a header row and at least one body row", row=1)
    head = lines[0].split(",")
    if head[0].strip() != "":
        raise ParseError("line 1: map corner cell must be blank", row=1)
    speed = [ _parse_float(tok.strip(), 1, "speed grid") for tok in head[1:] ]
    torque: list[float] = []
    body: list[list[float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(speed) + 1:
            raise ParseError(
                f"line {line_no}: expected {len(speed) + 1} fields, got {len(parts)}",
                row=line_no,
            )
        torque.append(_parse_float(parts[0].strip(), line_no, "torque grid"))
        body.append([_parse_float(tok.strip(), line_no, "value") for tok in parts[1:]])
    speed_grid = np.array(speed)
    torque_grid = np.array(torque)
    for grid, name in ((speed_grid, "speed"), (torque_grid, "torque")):
        if np.any(np.diff(grid) <= 0):
            raise ParseError(f"{name} grid must be strictly increasing")
    return speed_grid, torque_grid, np.array(body).T


def write_map_table(speed_grid, torque_grid, table) -> str:
    table = np.asarray(table)
    rows = ["," + ",".join(_fmt(s) for s in speed_grid)]
    for j, t in enumerate(torque_grid):
        rows.append(_fmt(t) + "," + ",".join(_fmt(v) for v in table[:, j]))
    return "\n".join(rows) + "\n"


def parse_curve(text: str):
    """Parse a two-column (abscissa, value) CSV."""
    xs, ys = [], []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty curve file", row=1)
    for line_no, line in enumerate(lines, start=1):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(
                f"line {line_no}: expected 2 fields, got {len(parts)}", row=line_no
            )
        xs.append(_parse_float(parts[0].strip(), line_no, "abscissa"))
        ys.append(_parse_float(parts[1].strip(), line_no, "value"))
    x = np.array(xs)
    if np.any(np.diff(x) <= 0):
        raise ParseError("curve abscissa must be strictly increasing")
    return x, np.array(ys)


def write_curve(x, y) -> str:
    return "\n".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y)) + "\n"


# ---------------------------------------------------------------------------
# bundled synthetic cycle

_V_WAYPOINTS = [
    (0, 0), (25, 10), (60, 14), (110, 26), (170, 20), (230, 31), (300, 24),
    (360, 30), (395, 48), (455, 42), (520, 56), (595, 46), (665, 54),
    (745, 47), (800, 50), (845, 64), (905, 72), (955, 66), (1010, 74),
    (1070, 67), (1125, 72), (1180, 69), (1250, 52), (1300, 46), (1330, 48),
    (1345, 18), (1420, 15), (1450, 9), (1472, 3), (1485, 0),
]
_F_WAYPOINTS = [
    (0, 0.08), (150, 0.09), (300, 0.075), (370, 0.06), (420, 0.05),
    (600, 0.045), (830, 0.032), (860, 0.026), (1100, 0.024), (1210, 0.03),
    (1240, 0.04), (1336, 0.035), (1360, 0.07), (1485, 0.08),
]
_PC_WAYPOINTS = [
    (0, 40), (100, 55), (250, 45), (360, 38), (400, 22), (700, 18),
    (830, 14), (1100, 12), (1220, 18), (1340, 22), (1420, 32), (1485, 35),
]


def synth_cycle(seed: int = 0) -> DriveCycle:
    """Deterministic bundled demo cycle of 1486 one-second records.

    Sustained low-speed running with elevated drag and electric demand,
    medium- and high-speed episodes, accelerations and one firm braking
    event. The profile is synthetic demo data, not a measurement of any
    real vehicle; only its length and staging match the solver's
    defaults.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(SYNTH_CYCLE_LENGTH, dtype=float)

    def interp_waypoints(waypoints):
        pts = np.array(waypoints, dtype=float)
        return np.interp(t, pts[:, 0], pts[:, 1])

    v = interp_waypoints(_V_WAYPOINTS)
    # gentle band-limited wiggle, faded out near standstill
    wiggle = np.zeros_like(t)
    for period, amp in ((97.0, 0.8), (53.0, 0.5), (31.0, 0.3)):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        scale = rng.uniform(0.7, 1.0)
        wiggle += amp * scale * np.sin(2.0 * np.pi * t / period + phase)
    v = np.maximum(v + wiggle * np.minimum(1.0, v / 5.0), 0.0)

    f = interp_waypoints(_F_WAYPOINTS)
    f_phase = rng.uniform(0.0, 2.0 * np.pi)
    f = np.clip(f + 0.002 * np.sin(2.0 * np.pi * t / 211.0 + f_phase), 0.02, 0.10)

    pc = interp_waypoints(_PC_WAYPOINTS)
    pc_phase = rng.uniform(0.0, 2.0 * np.pi)
    pc = np.maximum(pc + 2.0 * np.sin(2.0 * np.pi * t / 137.0 + pc_phase), 5.0)

    return DriveCycle(t, v, f, pc)


# ---------------------------------------------------------------------------
# trajectories

_PATTERN_LABELS = {p.label: int(p) for p in DrivingPattern}


@dataclass(frozen=True)
class Trajectory:
    """Per-stage record of one simulated strategy plus its totals."""

    t_s: np.ndarray
    v_kmh: np.ndarray
    pattern: np.ndarray  # DrivingPattern integer values
    soc: np.ndarray  # state of charge entering each stage
    ps_kw: np.ndarray
    pa_kw: np.ndarray
    pb_kw: np.ndarray
    pe_kw: np.ndarray
    pd_kw: np.ndarray
    pc_kw: np.ndarray
    ne_rpm: np.ndarray
    te_nm: np.ndarray
    fuel_gps: np.ndarray
    dsoc: np.ndarray
    j1_bar: np.ndarray
    j2_bar: np.ndarray
    j3_bar: np.ndarray
    stage_cost: np.ndarray
    fuel_density: float = 835.0
    strategy: str = "dp"
    flags: tuple = ()

    @property
    def n(self) -> int:
        return self.t_s.size

    def dt(self) -> np.ndarray:
        if self.n == 1:
            return np.array([1.0])
        d = np.diff(self.t_s)
        return np.append(d, d[-1])

    @property
    def total_fuel_l(self) -> float:
        return float(np.sum(self.fuel_gps * self.dt()) / self.fuel_density)

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.stage_cost))

    @property
    def soc_end(self) -> float:
        if self.n == 0:
            return float("nan")
        return float(self.soc[-1] + self.dsoc[-1])


def write_trajectory(traj: Trajectory) -> str:
    rows = [TRAJECTORY_HEADER]
    for k in range(traj.n):
        rows.append(",".join([
            _fmt(traj.t_s[k]), _fmt(traj.v_kmh[k]),
            DrivingPattern(int(traj.pattern[k])).label,
            _fmt(traj.soc[k]), _fmt(traj.ps_kw[k]), _fmt(traj.pa_kw[k]),
            _fmt(traj.pb_kw[k]), _fmt(traj.pe_kw[k]), _fmt(traj.pd_kw[k]),
            _fmt(traj.pc_kw[k]), _fmt(traj.ne_rpm[k]), _fmt(traj.te_nm[k]),
            _fmt(traj.fuel_gps[k]), _fmt(traj.dsoc[k]), _fmt(traj.j1_bar[k]),
            _fmt(traj.j2_bar[k]), _fmt(traj.j3_bar[k]), _fmt(traj.stage_cost[k]),
        ]))
    return "\n".join(rows) + "\n"


def parse_trajectory(text: str, fuel_density: float = 835.0, strategy: str = "") -> Trajectory:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != TRAJECTORY_HEADER:
        raise ParseError("missing or malformed trajectory header", row=1)
    names = TRAJECTORY_HEADER.split(",")
    pattern_col = names.index("pattern")
    cols: list[list[float]] = [[] for _ in names]
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(names):
            raise ParseError(
                f"line {line_no}: expected {len(names)} fields, got {len(parts)}",
                row=line_no,
            )
        for c, (name, token) in enumerate(zip(names, parts)):
            if c == pattern_col:
                label = token.strip()
                if label not in _PATTERN_LABELS:
                    raise ParseError(
                        f"line {line_no}: unknown pattern {label!r}", row=line_no
                    )
                cols[c].append(_PATTERN_LABELS[label])
            else:
                cols[c].append(_parse_float(token.strip(), line_no, name))
    arrays = [np.array(c) for c in cols]
    arrays[pattern_col] = arrays[pattern_col].astype(np.int64)
    return Trajectory(*arrays, fuel_density=fuel_density, strategy=strategy)


def segment_rows(cycle: DriveCycle, segments) -> str:
    """Pattern segments as CSV rows (start_s, end_s, pattern).

    End times are exclusive: the last segment ends one sample period
    after its final record.
    """
    dt = cycle.dt()
    rows = ["start_s,end_s,pattern"]
    for seg in segments:
        start = cycle.t_s[seg.start]
        end = cycle.t_s[seg.end - 1] + dt[seg.end - 1]
        rows.append(f"{_fmt(start)},{_fmt(end)},{seg.pattern.label}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# run summaries

def build_summary(
    traj: Trajectory,
    engine=None,
    soc0: float = 0.5,
    speed_bins: int = 8,
    torque_bins: int = 8,
    effective_config: dict | None = None,
    extra: dict | None = None,
) -> dict:
    """Aggregate a trajectory into the run-summary mapping.

    Includes per-pattern stage counts and mean normalized objectives,
    and a 2-D engine operating-point histogram whose counts sum to the
    stage count.
    """
    s: dict = {
        "strategy": traj.strategy,
        "n_stages": int(traj.n),
        "total_fuel_l": float(traj.total_fuel_l),
        "final_soc": float(traj.soc_end),
        "soc_drift": float(abs(traj.soc_end - soc0)),
        "composite_cost": float(traj.total_cost),
        "flags": list(traj.flags),
    }
    counts: dict = {}
    means: dict = {}
    for p in DrivingPattern:
        mask = traj.pattern == int(p)
        counts[p.label] = int(mask.sum())
        if mask.any():
            means[p.label] = {
                "j1_bar": float(traj.j1_bar[mask].mean()),
                "j2_bar": float(traj.j2_bar[mask].mean()),
                "j3_bar": float(traj.j3_bar[mask].mean()),
            }
        else:
            means[p.label] = None
    s["pattern_counts"] = counts
    s["pattern_mean_jbars"] = means

    if engine is not None:
        speed_edges = np.linspace(engine.speed_grid[0], engine.speed_grid[-1], speed_bins + 1)
        torque_edges = np.linspace(0.0, float(engine.max_torque.max()), torque_bins + 1)
        hist, _, _ = np.histogram2d(traj.ne_rpm, traj.te_nm, bins=[speed_edges, torque_edges])
        s["operating_points"] = {
            "speed_edges": [float(x) for x in speed_edges],
            "torque_edges": [float(x) for x in torque_edges],
            "counts": [[int(c) for c in row] for row in hist],
        }
    if effective_config is not None:
        s["effective_config"] = effective_config
    if extra:
        s.update(extra)
    return s


def write_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def parse_summary(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed summary JSON: {exc}", row=exc.lineno) from None
