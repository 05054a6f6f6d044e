"""Command-line entry point.

Subcommands: ``weights``, ``classify``, ``solve``, ``baseline``,
``compare``, ``report``. Exit codes: 0 success, 1 usage error, 2
data/parse error, 3 solve failure. No subcommand writes outside its
output directory.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ahp, config
from .baseline import simulate_rule
from .cycle_io import (
    build_summary,
    parse_cycle,
    parse_summary,
    parse_trajectory,
    segment_rows,
    write_summary,
    write_trajectory,
)
from .dp import SocGrid, StageTables, backward_solve, rollout
from .errors import EmtError, ParseError, RolloutError, SizeGuardError
from .patterns import DrivingPattern, segment_cycle

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="emtopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="objective weights and consistency report")
    w.add_argument("--pattern", choices=[p.label for p in DrivingPattern])
    w.add_argument("--matrix", type=Path, help="judgment matrix CSV (n x n)")
    w.add_argument("--recompute", action="store_true",
                   help="derive weights from the judgment matrix instead of the fixed triples")

    c = sub.add_parser("classify", help="segment a cycle into driving patterns")
    c.add_argument("--cycle", type=Path, required=True)
    c.add_argument("--min-segment", type=int, default=1)

    for name, help_text in (("solve", "optimal power split by dynamic programming"),
                            ("baseline", "rule-based power follower simulation")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--cycle", type=Path, required=True)
        p.add_argument("--config", type=Path)
        p.add_argument("--out", type=Path, required=True)
        p.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE")
        if name == "solve":
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--policy-format", choices=["csv", "npz"], default="npz")

    m = sub.add_parser("compare", help="compare two trajectories over the same cycle")
    m.add_argument("candidate", type=Path)
    m.add_argument("reference", type=Path)
    m.add_argument("--out", type=Path, required=True)

    r = sub.add_parser("report", help="render a run directory as markdown")
    r.add_argument("--run", type=Path, required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RolloutError, SizeGuardError) as exc:
        print(f"solve error: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except (EmtError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def _dispatch(args) -> int:
    return {
        "weights": _cmd_weights,
        "classify": _cmd_classify,
        "solve": _cmd_solve,
        "baseline": _cmd_baseline,
        "compare": _cmd_compare,
        "report": _cmd_report,
    }[args.command](args)


# ---------------------------------------------------------------------------

def _cmd_weights(args) -> int:
    if (args.pattern is None) == (args.matrix is None):
        raise UsageError("give exactly one of --pattern or --matrix")
    out: dict
    if args.matrix is not None:
        entries = _read_matrix_csv(args.matrix)
        result = ahp.sum_method(ahp.validate(entries))
        report = ahp.consistency(result.lambda_max, entries.shape[0])
        out = _weight_report("file", result, report)
    else:
        pattern = DrivingPattern[args.pattern.upper()]
        if args.recompute:
            result = ahp.sum_method(ahp.JUDGMENT_MATRICES[pattern])
            report = ahp.consistency(result.lambda_max, 3)
            out = _weight_report("recompute", result, report)
            if not report.passed:
                out["warning"] = (
                    f"judgment matrix fails the consistency check (CR={report.cr:.3f})"
                )
        else:
            w = ahp.pattern_weights(pattern, "constants")
            out = {
                "source": "constants",
                "weights": list(w.as_tuple()),
                "lambda_max": None, "ci": None, "cr": None, "ri": None,
                "pass": True,
            }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _weight_report(source, result, report) -> dict:
    return {
        "source": source,
        "weights": [float(x) for x in result.weights],
        "lambda_max": float(result.lambda_max),
        "ci": float(report.ci),
        "cr": float(report.cr),
        "ri": float(report.ri),
        "pass": bool(report.passed),
    }


def _read_matrix_csv(path: Path) -> np.ndarray:
    rows = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            raise ParseError(f"line {line_no}: non-numeric matrix entry", row=line_no) from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("judgment matrix file must be square")
    return np.array(rows)


def _cmd_classify(args) -> int:
    cycle = parse_cycle(args.cycle.read_text())
    segments = segment_cycle(cycle, min_segment_length=args.min_segment)
    print(segment_rows(cycle, segments), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _prepare_run(args):
    cfg = config.load_config(args.config)
    cfg = config.apply_overrides(cfg, getattr(args, "overrides", None))
    cycle = parse_cycle(args.cycle.read_text())
    model = config.build_model(cfg, args.cycle.parent)
    params = config.build_params(cfg)
    dp_cfg = config.build_dp_config(cfg)
    weights = config.build_weights(cfg)
    return cfg, cycle, model, params, dp_cfg, weights


def _cmd_solve(args) -> int:
    cfg, cycle, model, params, dp_cfg, weights = _prepare_run(args)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    tables = StageTables(cycle, model, dp_cfg)
    table, policy = backward_solve(
        cycle, model, weights, params, dp_cfg, tables=tables, threads=args.threads
    )
    traj = rollout(policy, table, cycle, model, weights, params, dp_cfg, tables=tables)

    (out_dir / "trajectory.csv").write_text(write_trajectory(traj))
    summary = build_summary(
        traj, engine=model.engine, soc0=params.soc0,
        effective_config=cfg, extra={"data_provenance": _provenance(cfg)},
    )
    (out_dir / "summary.json").write_text(write_summary(summary))

    grid = table.grid
    v0 = float(table.interp(0, model.battery.soc_init))
    table_summary = {
        "stages": int(table.values.shape[0] - 1),
        "soc_nodes": int(grid.count),
        "actions_per_stage": int(policy.actions.shape[0]),
        "value_at_soc_init": v0,
        "value_min": float(table.values[0].min()),
        "value_max": float(table.values[0].max()),
        "penalty_nodes": int(np.sum(table.values[:-1] >= dp_cfg.infeasible_penalty)),
    }
    (out_dir / "value_table.json").write_text(json.dumps(table_summary, indent=2, sort_keys=True) + "\n")

    if args.policy_format == "npz":
        np.savez_compressed(
            out_dir / "policy.npz",
            action_index=policy.action_index, actions=policy.actions,
            soc_nodes=grid.nodes, values=table.values,
        )
    else:
        _write_policy_csv(out_dir / "policy.csv", policy, grid)
    return EXIT_OK


def _write_policy_csv(path: Path, policy, grid: SocGrid):
    lines = ["stage,soc,ne_rpm,ta_nm,tb_nm"]
    for k in range(policy.action_index.shape[0]):
        for m, soc in enumerate(grid.nodes):
            idx = int(policy.action_index[k, m])
            if idx < 0:
                lines.append(f"{k},{float(soc)!r},,,")
            else:
                ne, ta, tb = (float(x) for x in policy.actions[idx])
                lines.append(f"{k},{float(soc)!r},{ne!r},{ta!r},{tb!r}")
    path.write_text("\n".join(lines) + "\n")


def _cmd_baseline(args) -> int:
    cfg, cycle, model, params, dp_cfg, weights = _prepare_run(args)
    rule_cfg = config.build_rule_config(cfg)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = simulate_rule(cycle, model, weights, params, rule_cfg, dp_cfg)
    (out_dir / "trajectory.csv").write_text(write_trajectory(traj))
    summary = build_summary(
        traj, engine=model.engine, soc0=params.soc0,
        effective_config=cfg, extra={"data_provenance": _provenance(cfg)},
    )
    (out_dir / "summary.json").write_text(write_summary(summary))
    return EXIT_OK


def _provenance(cfg) -> str:
    if any(v is not None for v in cfg["maps"].values()):
        return "user-supplied maps"
    return "synthetic default maps (demo placeholders, not vehicle measurements)"


# ---------------------------------------------------------------------------

def _cmd_compare(args) -> int:
    a = parse_trajectory(args.candidate.read_text(), strategy="candidate")
    b = parse_trajectory(args.reference.read_text(), strategy="reference")
    if a.n != b.n or np.max(np.abs(a.t_s - b.t_s)) > 1e-9 or np.max(np.abs(a.v_kmh - b.v_kmh)) > 1e-9:
        raise ParseError("trajectories do not cover the same cycle (time/speed mismatch)")
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    fuel_a, fuel_b = a.total_fuel_l, b.total_fuel_l
    improvement = 100.0 * (fuel_b - fuel_a) / fuel_b if fuel_b > 0 else 0.0
    comparison = {
        "candidate": _side_totals(a, args.candidate.name),
        "reference": _side_totals(b, args.reference.name),
        "fuel_improvement_pct": float(improvement),
        "composite_cost_delta": float(a.total_cost - b.total_cost),
        "soc_drift_delta": float(abs(a.soc_end - 0.5) - abs(b.soc_end - 0.5)),
        "per_pattern": _pattern_breakdown(a, b),
    }
    (out_dir / "comparison.json").write_text(json.dumps(comparison, indent=2, sort_keys=True) + "\n")
    _write_ops_hist(out_dir / "ops_candidate.csv", a, b)
    _write_ops_hist(out_dir / "ops_reference.csv", b, a)
    return EXIT_OK


def _side_totals(traj, name) -> dict:
    return {
        "file": name,
        "total_fuel_l": float(traj.total_fuel_l),
        "composite_cost": float(traj.total_cost),
        "final_soc": float(traj.soc_end),
    }


def _pattern_breakdown(a, b) -> dict:
    out = {}
    for p in DrivingPattern:
        mask = a.pattern == int(p)
        out[p.label] = {
            "stages": int(mask.sum()),
            "candidate_fuel_g": float(np.sum(a.fuel_gps[mask] * a.dt()[mask])),
            "reference_fuel_g": float(np.sum(b.fuel_gps[mask] * b.dt()[mask])),
            "candidate_cost": float(np.sum(a.stage_cost[mask])),
            "reference_cost": float(np.sum(b.stage_cost[mask])),
        }
    return out


def _write_ops_hist(path: Path, traj, other, bins=8):
    ne_all = np.concatenate([traj.ne_rpm, other.ne_rpm])
    te_all = np.concatenate([traj.te_nm, other.te_nm])
    ne_edges = np.linspace(ne_all.min(), ne_all.max() + 1e-9, bins + 1)
    te_edges = np.linspace(te_all.min(), te_all.max() + 1e-9, bins + 1)
    hist, _, _ = np.histogram2d(traj.ne_rpm, traj.te_nm, bins=[ne_edges, te_edges])
    lines = ["speed_rpm,torque_nm,count"]
    for i in range(bins):
        for j in range(bins):
            sc = float(0.5 * (ne_edges[i] + ne_edges[i + 1]))
            tc = float(0.5 * (te_edges[j] + te_edges[j + 1]))
            lines.append(f"{sc!r},{tc!r},{int(hist[i, j])}")
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------

def _cmd_report(args) -> int:
    run_dir = args.run
    summary_path = run_dir / "summary.json"
    traj_path = run_dir / "trajectory.csv"
    if not summary_path.exists() or not traj_path.exists():
        raise ParseError(f"run directory {run_dir} is missing summary.json or trajectory.csv")
    summary = parse_summary(summary_path.read_text())
    eff = summary.get("effective_config", {})
    fuel_density = eff.get("vehicle", {}).get("fuel_density", 835.0)
    traj = parse_trajectory(traj_path.read_text(), fuel_density=fuel_density,
                            strategy=summary.get("strategy", ""))

    violations = []
    soc_min = eff.get("battery", {}).get("soc_min", 0.0)
    soc_max = eff.get("battery", {}).get("soc_max", 1.0)
    if np.any(traj.soc < soc_min - 1e-9) or np.any(traj.soc > soc_max + 1e-9):
        violations.append(
            f"SOC leaves [{soc_min}, {soc_max}]: range "
            f"[{traj.soc.min():.4f}, {traj.soc.max():.4f}]"
        )
    for key, value in (("total_fuel_l", traj.total_fuel_l),
                       ("composite_cost", traj.total_cost),
                       ("final_soc", traj.soc_end)):
        if key in summary and abs(summary[key] - value) > 1e-9:
            violations.append(f"{key} in summary ({summary[key]!r}) != trajectory ({value!r})")

    text = _render_report(summary, traj, violations)
    (run_dir / "report.md").write_text(text)
    print(text, end="")
    return EXIT_OK


def _render_report(summary, traj, violations) -> str:
    lines = [
        f"# Run report: {summary.get('strategy', '?')}",
        "",
        f"- stages: {summary.get('n_stages')}",
        f"- total fuel: {summary.get('total_fuel_l'):.4f} L",
        f"- final SOC: {summary.get('final_soc'):.4f}",
        f"- SOC drift: {summary.get('soc_drift'):.4f}",
        f"- composite cost: {summary.get('composite_cost'):.4f}",
        "",
        "## Stages per pattern",
        "",
    ]
    for label, count in summary.get("pattern_counts", {}).items():
        lines.append(f"- {label}: {count}")
    flags = summary.get("flags", [])
    if flags:
        lines += ["", "## Run flags", ""]
        lines += [f"- {f}" for f in flags]
    lines += ["", "## Invariant checks", ""]
    if violations:
        lines += [f"- VIOLATION: {v}" for v in violations]
    else:
        lines.append("- no violations")
    if "data_provenance" in summary:
        lines += ["", f"Data provenance: {summary['data_provenance']}"]
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    sys.exit(main())
