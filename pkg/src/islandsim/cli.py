"""Command-line interface.

Verbs: ``validate`` a configuration, ``synthesize`` its series to CSV,
``run`` one scenario, ``sweep`` the whole grid, ``pareto`` the front of a
finished sweep, and ``report`` the full output bundle (CSVs, figures,
manifest).  ``--config`` takes a YAML path or ``builtin:default`` /
``builtin:reduced`` for the bundled systems.

Exit codes: 0 success, 2 validation failure, 3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import (economics_from_config, load_config, solver_from_config,
                     sweep_days, sweep_from_config, system_from_config)
from .defaults import BUILTIN_CONFIGS
from .domain import Scenario, validate_system
from .orchestrator import (ResultStore, ScenarioAborted, evaluate_economics,
                           run_scenario, run_sweep)
from .series import SeriesError, synthesize, write_csv
from .uced import ScheduleError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _load_doc(spec: str) -> dict:
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_CONFIGS:
            raise ValueError(f"unknown builtin config {name!r}; "
                             f"available: {sorted(BUILTIN_CONFIGS)}")
        return BUILTIN_CONFIGS[name]()
    return load_config(spec)


def _context(args):
    doc = _load_doc(args.config)
    system = system_from_config(doc)
    params = economics_from_config(doc)
    settings = solver_from_config(doc, gap=args.gap, time_limit=args.time_limit)
    plan = sweep_from_config(doc, params)
    days = args.days if getattr(args, "days", None) else sweep_days(doc)
    return doc, system, params, settings, plan, days


def _first_day_snapshot(system):
    from .orchestrator import _ScenarioRun
    from .config import SolverSettings
    run = _ScenarioRun(system, Scenario("base", 0, 0, 0), SolverSettings(), 1)
    return run._snapshot(0, 24, 0)


def cmd_validate(args) -> int:
    doc, system, params, _, plan, _ = _context(args)
    violations = validate_system(_first_day_snapshot(system))
    for v in violations:
        print(f"violation: {v}")
    problems = params.validate()
    for p in problems:
        print(f"violation: economics: {p}")
    print(f"system '{system.name}': {len(system.thermal_units)} thermal units, "
          f"{len(plan.scenarios)} scenarios, "
          f"{len(violations) + len(problems)} violations")
    return EXIT_VALIDATION if (violations or problems) else EXIT_OK


def cmd_synthesize(args) -> int:
    doc, _, _, _, _, _ = _context(args)
    series_cfg = doc.get("system", doc)["series"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for offset, name in enumerate(sorted(series_cfg)):
        spec = dict(series_cfg[name])
        if "csv" in spec:
            print(f"{name}: already file-backed ({spec['csv']}), skipped")
            continue
        kind = spec.pop("kind")
        seed = int(spec.pop("seed"))
        if args.seed is not None:
            seed = args.seed + offset
        series = synthesize(kind, spec, seed)
        path = out / f"{name}.csv"
        write_csv(series, path)
        stats = ", ".join(f"{k}={v:.4g}" for k, v in series.stats().items())
        print(f"{name}: wrote {path} ({stats})")
    return EXIT_OK


def _scenario_from_args(args, plan) -> Scenario:
    if args.scenario:
        return plan.by_id(args.scenario)
    if not args.concept:
        raise ValueError("give --scenario <id> or --concept (+ sizing flags)")
    return Scenario(args.concept, args.new_wind, args.bes_power, args.bes_hours)


def cmd_run(args) -> int:
    doc, system, params, settings, plan, days = _context(args)
    scenario = _scenario_from_args(args, plan)
    if scenario.economic_params is None:
        scenario = Scenario(scenario.concept, scenario.new_wind_mw,
                            scenario.bes_power_mw, scenario.bes_hours,
                            id=scenario.id, economic_params=params)
    store = ResultStore(args.out) if args.out else None
    t0 = time.perf_counter()
    ledger = run_scenario(system, scenario, settings, days=days, store=store,
                          resume=not args.no_resume)
    dt = time.perf_counter() - t0
    summary = ledger.summary()
    print(f"scenario {scenario.id}: {ledger.filled} h in {dt:.1f} s")
    print(f"  penetration {ledger.res_penetration() * 100:.2f}%  "
          f"energy identity residual {ledger.energy_identity_residual():.3e} MWh")
    report = evaluate_economics(system, scenario, summary, None, params)
    print(f"  lcoe {report.lcoe:.2f} EUR/MWh  curtailment (total) "
          f"{report.curtailment_total_share * 100:.2f}%")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc, system, params, settings, plan, days = _context(args)
    t0 = time.perf_counter()
    metas = run_sweep(system, plan, settings, out_dir=args.out, days=days,
                      workers=args.workers)
    dt = time.perf_counter() - t0
    for meta in metas:
        s = meta["summary"]
        print(f"{meta['scenario_id']}: load {s['load_mwh']:.0f} MWh, "
              f"slack cost {s['slack_cost']:.0f} EUR")
    print(f"sweep complete: {len(metas)} scenarios in {dt:.1f} s -> {args.out}")
    return EXIT_OK


def cmd_pareto(args) -> int:
    from .report import figure_pareto, pareto_from_reports, write_pareto_csv
    doc, system, params, settings, plan, days = _context(args)
    store = ResultStore(args.out)
    completed = [s for s in plan.scenarios if store.is_complete(s)]
    if not completed:
        raise FileNotFoundError(f"no completed scenarios under {args.out}")
    base = next((s for s in completed if s.concept == "base"), None)
    base_summary = store.load_meta(base)["summary"] if base else None
    reports = [evaluate_economics(system, s, store.load_meta(s)["summary"],
                                  base_summary, params) for s in completed]
    front = pareto_from_reports(reports)
    out = Path(args.out)
    write_pareto_csv(front, out / "pareto.csv")
    figure_pareto(reports, front, out / "pareto.png")
    for p in front:
        print(f"{p.scenario_id}: penetration {p.res_penetration * 100:.2f}%, "
              f"lcoe {p.lcoe:.2f} EUR/MWh")
    print(f"front of {len(front)} points -> {out / 'pareto.csv'}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import generate_report
    doc, system, params, settings, plan, days = _context(args)
    written = generate_report(args.out, system, plan, params, week=args.week,
                              week_scenario=args.scenario, config_doc=doc,
                              settings=settings, days=days, workers=args.workers)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="islandsim",
        description="Island power system operation simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--config", required=True,
                       help="YAML config path or builtin:<name>")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--gap", type=float, default=None, help="MIP gap tolerance")
        p.add_argument("--time-limit", type=float, default=None,
                       help="seconds per solve")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel scenario workers")
        p.add_argument("--days", type=int, default=None,
                       help="override simulated days (default: config, 365)")

    p = sub.add_parser("validate", help="check a configuration")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synthesize", help="write the configured series as CSV")
    common(p, out_default="series")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("run", help="simulate one scenario")
    common(p, out_default=None)
    p.add_argument("--scenario", default=None, help="scenario id from the sweep")
    p.add_argument("--concept", choices=["central", "self", "base"], default=None)
    p.add_argument("--bes-power", type=float, default=0.0, help="MW")
    p.add_argument("--bes-hours", type=float, default=0.0, help="h at rated power")
    p.add_argument("--new-wind", type=float, default=75.0, help="MW")
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run every scenario of the plan")
    common(p, out_default="results")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pareto", help="extract the front from a finished sweep")
    common(p, out_default="results")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("report", help="emit CSVs, figures and the manifest")
    common(p, out_default="results")
    p.add_argument("--week", type=int, default=1, help="week for the extract (1-52)")
    p.add_argument("--scenario", default=None, help="scenario for the extract")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScheduleError, ScenarioAborted) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SeriesError, ValueError, KeyError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
