"""Command-line interface: deterministic CSV on stdout, diagnostics on stderr.

Commands: solve, oracle, sweep-m, sweep-pe, compare, validate. Output is
RFC-4180 CSV with full-precision scientific notation; identical scenario and
seed produce byte-identical output. `--plot-dir` additionally renders each
command's figure and CSV into the given directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import allocation as alloc_mod
from . import ao, bench, closed_form
from . import placement as place_mod
from .model import (
    Allocation,
    Geometry,
    InvalidInputError,
    InvariantBreach,
    Placement,
    build_channels,
    per_element_power,
    snr_full,
)
from .scenario import DEFAULT_SCENARIO, Scenario, ScenarioError, format_scenario, parse_scenario

SCHEMAS = {
    "solve": ["record", "index", "value"],
    "oracle": ["record", "index", "value"],
    "sweep-m": ["m", "rate_bps_hz", "slope_bps_per_doubling"],
    "sweep-pe": ["pe_w", "rate_bps_hz", "slope_bps_per_doubling"],
    "compare": ["kind", "min_rate_bps_hz"],
    "validate": ["check", "status", "detail"],
}
SCHEMA_VERSION = "1"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return format(float(value), ".17e")


def _emit(command: str, rows: list[list], plot_dir: Path | None) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(SCHEMAS[command])
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                         for cell in row])
    text = buffer.getvalue()
    sys.stdout.write(text)
    if plot_dir is not None:
        plot_dir.mkdir(parents=True, exist_ok=True)
        (plot_dir / f"{command}.csv").write_text(text, encoding="utf-8",
                                                 newline="")
    return text


def _load_scenario(args) -> Scenario:
    if args.scenario:
        scenario = parse_scenario(Path(args.scenario).read_text(encoding="utf-8"))
    else:
        scenario = DEFAULT_SCENARIO
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    return scenario


def _parse_list(text: str, cast, flag: str) -> list:
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"cannot parse {flag} list {text!r}") from None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_solve(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    solution = ao.solve(sc.system_params(), sc.geometry(), x_min=sc.x_min)
    rows: list[list] = [
        ["x0", "", solution.placement.x0],
        ["x1", "", solution.placement.x1],
        ["x2", "", solution.placement.x2],
        ["m1", "", solution.allocation.m1],
        ["m2", "", solution.allocation.m2],
    ]
    for user, snr in enumerate(solution.report.snrs):
        rows.append(["snr", str(user), snr])
    for user, rate in enumerate(solution.report.rates):
        rows.append(["rate", str(user), rate])
    rows.append(["min_rate", "", solution.report.min_rate])
    rows.append(["worst_user", "", solution.report.worst_user])
    for i, value in enumerate(solution.trace):
        rows.append(["trace", str(i), value])
    _emit("solve", rows, plot_dir)
    if plot_dir is not None:
        from .report import save_trace_figure
        save_trace_figure(solution.trace, plot_dir / "solve.png",
                          "alternating-optimization trace")
    return 0


def _cmd_oracle(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    params, geometry = sc.system_params(), sc.geometry()
    solution = ao.solve(params, geometry, x_min=sc.x_min)
    baseline = ao.exhaustive_baseline(params, geometry, alloc_step=args.alloc_step,
                                      place_step=args.grid_step, x_min=sc.x_min)
    gap = (baseline.report.min_rate - solution.report.min_rate) \
        / baseline.report.min_rate
    rows: list[list] = [
        ["ao_min_rate", "", solution.report.min_rate],
        ["es_min_rate", "", baseline.report.min_rate],
        ["rel_gap", "", gap],
        ["ao_x0", "", solution.placement.x0],
        ["ao_x1", "", solution.placement.x1],
        ["ao_x2", "", solution.placement.x2],
        ["ao_m1", "", solution.allocation.m1],
        ["ao_m2", "", solution.allocation.m2],
        ["es_x0", "", baseline.placement.x0],
        ["es_x1", "", baseline.placement.x1],
        ["es_x2", "", baseline.placement.x2],
        ["es_m1", "", baseline.allocation.m1],
        ["es_m2", "", baseline.allocation.m2],
    ]
    _emit("oracle", rows, plot_dir)
    if plot_dir is not None:
        from .report import save_bars_figure
        save_bars_figure(["alternating", "exhaustive"],
                         [solution.report.min_rate, baseline.report.min_rate],
                         plot_dir / "oracle.png", "solver vs joint grid baseline")
    return 0


def _cmd_sweep_m(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    m_values = _parse_list(args.m_values, int, "--m-values")
    rows_data = bench.sweep_elements(sc.system_params(), sc.geometry(), m_values,
                                     kind=args.kind, alloc_policy=args.alloc_policy,
                                     reoptimize_placement=args.reoptimize_placement,
                                     x_min=sc.x_min)
    rows = [[r.value, r.rate, r.slope] for r in rows_data]
    _emit("sweep-m", rows, plot_dir)
    if plot_dir is not None:
        from .report import save_sweep_figure
        save_sweep_figure(rows_data, plot_dir / "sweep-m.png",
                          "total elements", f"capacity scaling ({args.kind})")
    return 0


def _cmd_sweep_pe(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    pe_values = _parse_list(args.pe_values, float, "--pe-values")
    rows_data = bench.sweep_power(sc.system_params(), sc.geometry(), pe_values,
                                  x_min=sc.x_min)
    rows = [[r.value, r.rate, r.slope] for r in rows_data]
    _emit("sweep-pe", rows, plot_dir)
    if plot_dir is not None:
        from .report import save_sweep_figure
        save_sweep_figure(rows_data, plot_dir / "sweep-pe.png",
                          "per-element power (W)", "capacity vs element power")
    return 0


def _cmd_compare(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    params, geometry = sc.system_params(), sc.geometry()
    rows = [[kind, bench.benchmark_rate(kind, params, geometry, x_min=sc.x_min,
                                        grid_step=args.grid_step)]
            for kind in bench.KINDS]
    _emit("compare", rows, plot_dir)
    if plot_dir is not None:
        from .report import save_bars_figure
        save_bars_figure([r[0] for r in rows], [r[1] for r in rows],
                         plot_dir / "compare.png", "benchmark systems")
    return 0


def _validate_checks(sc: Scenario) -> list[list]:
    """Oracle-equivalence and constraint-audit suite; status per check."""
    params, geometry = sc.system_params(), sc.geometry()
    rows: list[list] = []

    def record(name: str, ok: bool, detail: str) -> None:
        rows.append([name, "PASS" if ok else "FAIL", detail])

    rng = np.random.default_rng(sc.seed)
    worst_gap = 0.0
    worst_power = 0.0
    for _ in range(20):
        m1 = int(rng.integers(1, 33))
        m2 = int(rng.integers(1, 33))
        p = replace(params, total_elements=m1 + m2, n_users=1)
        span = sc.bs_user_distance - 3 * sc.x_min
        x0 = sc.x_min + float(rng.uniform(0, 0.6)) * span
        x1 = sc.x_min + float(rng.uniform(0, 1)) \
            * (sc.bs_user_distance - x0 - 2 * sc.x_min)
        placement = Placement(
            x0=x0, x1=x1, x2=sc.bs_user_distance - x0 - x1)
        radius = float(rng.uniform(0, sc.zone_radius))
        azimuth = float(rng.uniform(0, 2 * np.pi))
        geo = Geometry(bs_user_distance=sc.bs_user_distance,
                       irs_altitude=sc.irs_altitude,
                       users=((radius, azimuth),))
        allocation = Allocation(m1=m1, m2=m2)
        channels = build_channels(p, geo, placement, allocation, 0)
        config = closed_form.reflection_config(p, channels)
        gamma_matrix = snr_full(channels, config, p)
        gamma_closed, _ = closed_form.snr_closed_form(
            p, channels.d0, channels.d1, channels.d2, allocation)
        worst_gap = max(worst_gap,
                        abs(gamma_closed - gamma_matrix) / gamma_matrix)
        p1, p2 = per_element_power(channels, config, p)
        budget = p.per_element_power
        worst_power = max(worst_power,
                          float(np.max(np.abs(p1 / budget - 1.0))),
                          float(np.max(np.abs(p2 / budget - 1.0))))
    record("closed_form_vs_matrix", worst_gap <= 1e-9,
           f"max rel err {worst_gap:.3e}")
    record("per_element_power_equality", worst_power <= 1e-9,
           f"max rel err {worst_power:.3e}")

    placement = bench.bench_placement(geometry, sc.x_min)
    coeffs = alloc_mod.allocation_coefficients(params, geometry, placement)
    solved = alloc_mod.solve_allocation(coeffs, params.total_elements)
    oracle = alloc_mod.allocation_oracle(coeffs, params.total_elements)
    ratio = (alloc_mod.split_objective(coeffs, solved.m1, params.total_elements)
             / alloc_mod.split_objective(coeffs, oracle.m1, params.total_elements))
    record("allocation_vs_enumeration",
           abs(solved.m1 - oracle.m1) <= 1 and ratio <= 1 + 1e-6,
           f"split ({solved.m1},{solved.m2}) vs ({oracle.m1},{oracle.m2})")

    allocation = oracle
    sca = place_mod.solve_placement(params, geometry, allocation, x_min=sc.x_min)
    grid = place_mod.placement_oracle(params, geometry, allocation, step=1.0,
                                      x_min=sc.x_min)
    pc = place_mod.placement_coefficients(params, allocation)
    value_sca = place_mod.placement_objective(
        pc, *place_mod.hop_distances(geometry, sca.x0, sca.x1))
    value_grid = place_mod.placement_objective(
        pc, *place_mod.hop_distances(geometry, grid.x0, grid.x1))
    record("placement_vs_grid", value_sca <= 1.01 * value_grid,
           f"objective ratio {value_sca / value_grid:.6f}")

    try:
        solution = ao.solve(params, geometry, x_min=sc.x_min)
        ao.audit_solution(params, geometry, solution, x_min=sc.x_min)
        record("solution_constraint_audit", True,
               f"min rate {solution.report.min_rate:.6f}")
    except (InvariantBreach, InvalidInputError) as exc:
        record("solution_constraint_audit", False, str(exc))

    round_trip = parse_scenario(format_scenario(sc))
    record("scenario_round_trip", round_trip == sc, "parse(format(s)) == s")
    return rows


def _cmd_validate(args, plot_dir: Path | None) -> int:
    sc = _load_scenario(args)
    rows = _validate_checks(sc)
    _emit("validate", rows, plot_dir)
    return 0 if all(row[1] == "PASS" for row in rows) else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dual-irs-opt",
        description="Deployment optimization for a double amplifying-surface relay")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", help="scenario file (key = value lines)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--schema", action="store_true",
                       help="print the CSV header and exit")
        p.add_argument("--plot-dir",
                       help="also write <command>.csv and <command>.png here")

    common(sub.add_parser("solve", help="alternating-optimization solve"))

    oracle = sub.add_parser("oracle", help="joint grid baseline and solver gap")
    common(oracle)
    oracle.add_argument("--grid-step", type=float, default=2.0,
                        help="placement grid step in meters")
    oracle.add_argument("--alloc-step", type=int, default=1,
                        help="element-split grid step")

    sweep_m = sub.add_parser("sweep-m", help="capacity vs element budget")
    common(sweep_m)
    sweep_m.add_argument("--m-values", default="1024,2048,4096",
                         help="comma-separated even budgets")
    sweep_m.add_argument("--kind", choices=bench.KINDS, default="double-active")
    sweep_m.add_argument("--alloc-policy", choices=("optimize", "even"),
                         default="optimize")
    sweep_m.add_argument("--reoptimize-placement", action="store_true",
                         help="re-optimize placement at every swept budget")

    sweep_pe = sub.add_parser("sweep-pe", help="capacity vs per-element power")
    common(sweep_pe)
    sweep_pe.add_argument("--pe-values", default="0.001,0.01,0.1,1,10,100",
                          help="comma-separated powers in watts")

    compare = sub.add_parser("compare", help="four-system rate table")
    common(compare)
    compare.add_argument("--grid-step", type=float, default=1.0,
                         help="benchmark placement grid step in meters")

    common(sub.add_parser("validate",
                          help="oracle-equivalence and constraint audits"))
    return parser


_HANDLERS = {
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "sweep-m": _cmd_sweep_m,
    "sweep-pe": _cmd_sweep_pe,
    "compare": _cmd_compare,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        sys.stdout.write(",".join(SCHEMAS[args.command])
                         + f"  # schema v{SCHEMA_VERSION}\n")
        return 0
    plot_dir = Path(args.plot_dir) if args.plot_dir else None
    try:
        return _HANDLERS[args.command](args, plot_dir)
    except (ScenarioError, InvalidInputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
