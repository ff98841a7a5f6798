"""Sweep reporting: delimited outputs plus rendered figures.

``generate_report`` turns a sweep's result store into the study deliverables:
one economics row per scenario, the Pareto front, a weekly operation extract
(hourly production stack and storage state of charge), a run manifest, and
PNG figures rendered next to each CSV.  All delimited output uses fixed float
formatting so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .config import (IslandSystem, SolverSettings, SweepPlan, config_hash)
from .domain import Scenario
from .economics import EconomicParams, EconomicReport
from .orchestrator import ResultStore, evaluate_economics
from .pareto import ParetoPoint, extract_pareto

WEEK_HOURS = 168


# ----------------------------------------------------------------------
# Delimited outputs
# ----------------------------------------------------------------------

def write_economics_csv(reports: list[EconomicReport], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EconomicReport.CSV_FIELDS)
        for r in reports:
            w.writerow(r.csv_row())
    return path


def write_pareto_csv(front: list[ParetoPoint], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario_id", "res_penetration", "lcoe"])
        for p in front:
            w.writerow([p.scenario_id, f"{p.res_penetration:.6f}", f"{p.lcoe:.6f}"])
    return path


def load_record(path) -> dict[str, np.ndarray]:
    """Read one scenario record file back into named columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows) if rows else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def _week_slice(record: dict[str, np.ndarray], week: int) -> dict[str, np.ndarray]:
    n_hours = len(record["hour"])
    max_week = n_hours // WEEK_HOURS
    if not 1 <= week <= min(max_week, 52):
        raise ValueError(f"week must be in 1..{min(max_week, 52)}, got {week}")
    lo = (week - 1) * WEEK_HOURS
    return {k: v[lo:lo + WEEK_HOURS] for k, v in record.items()}


def write_week_csv(record: dict[str, np.ndarray], week: int, path) -> Path:
    data = _week_slice(record, week)
    path = Path(path)
    names = list(data)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(WEEK_HOURS):
            w.writerow([f"{data[c][i]:.6f}" for c in names])
    return path


# ----------------------------------------------------------------------
# Figures
# ----------------------------------------------------------------------

def _column_group(data: dict[str, np.ndarray], prefix: str) -> np.ndarray:
    cols = [v for k, v in data.items() if k.startswith(prefix)]
    return np.sum(cols, axis=0) if cols else np.zeros(WEEK_HOURS)


def figure_week(record: dict[str, np.ndarray], week: int, path,
                title: str = "") -> Path:
    """Production stack, load line and storage state for one week."""
    d = _week_slice(record, week)
    h = np.arange(WEEK_HOURS)
    thermal = _column_group(d, "p.")
    discharge = _column_group(d, "discharge.")
    charge = _column_group(d, "charge.")
    hps_out = d.get("hps.delivered", np.zeros(WEEK_HOURS))
    hps_draw = d.get("hps.grid_draw", np.zeros(WEEK_HOURS))

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(12.0, 7.0), sharex=True,
                                   gridspec_kw={"height_ratios": [2.2, 1.0]})
    layers = [thermal, d["pv_injected"], d["wind_injected"]]
    labels = ["conventional", "pv", "wind"]
    colors = ["#8c8c8c", "#f2b134", "#4c9f70"]
    if hps_out.any():
        layers.append(hps_out)
        labels.append("hps")
        colors.append("#c45ab3")
    if discharge.any():
        layers.append(discharge)
        labels.append("bes discharge")
        colors.append("#4169b0")
    ax1.stackplot(h, layers, labels=labels, colors=colors, linewidth=0)
    drawdown = charge + hps_draw
    if drawdown.any():
        ax1.fill_between(h, 0.0, -drawdown, color="#9bb7e0", label="storage charging")
    ax1.plot(h, d["load"], "k-", lw=1.4, label="load")
    if d["ens"].any():
        ax1.plot(h, d["ens"], "r--", lw=1.0, label="ens")
    ax1.set_ylabel("MW")
    ax1.legend(loc="upper right", ncol=3, fontsize=8)
    ax1.set_title(title or f"week {week}")

    plotted = False
    for key, v in d.items():
        if key.startswith("soc."):
            ax2.plot(h, v, lw=1.2, label=key)
            plotted = True
    if "hps.soc" in d:
        ax2.plot(h, d["hps.soc"], lw=1.2, label="hps storage")
        plotted = True
    if "plan.soc.BES1" in d:
        ax2.plot(h, d["plan.soc.BES1"], "k:", lw=1.0, label="planned floor")
        plotted = True
    if plotted:
        ax2.legend(loc="upper right", fontsize=8)
    ax2.set_ylabel("MWh stored")
    ax2.set_xlabel("hour of week")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def figure_pareto(reports: list[EconomicReport], front: list[ParetoPoint],
                  path) -> Path:
    fig, ax = plt.subplots(figsize=(8.0, 5.5))
    styles = {"central": ("o", "#2a6fb0", "central dispatch"),
              "self": ("s", "#c0392b", "self dispatch (HPS)")}
    for concept, (marker, color, label) in styles.items():
        xs = [r.res_penetration * 100 for r in reports
              if r.concept == concept and np.isfinite(r.lcoe)]
        ys = [r.lcoe for r in reports if r.concept == concept and np.isfinite(r.lcoe)]
        if xs:
            ax.scatter(xs, ys, marker=marker, s=28, alpha=0.65, color=color,
                       label=label)
    if front:
        ax.plot([p.res_penetration * 100 for p in front],
                [p.lcoe for p in front], "k-", lw=1.2, marker=".", ms=8,
                label="pareto front")
    ax.set_xlabel("annual RES penetration [%]")
    ax.set_ylabel("LCOE [EUR/MWh]")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


# ----------------------------------------------------------------------
# Report assembly
# ----------------------------------------------------------------------

def pareto_from_reports(reports: list[EconomicReport]) -> list[ParetoPoint]:
    return extract_pareto([ParetoPoint(r.scenario_id, r.res_penetration, r.lcoe)
                           for r in reports if np.isfinite(r.lcoe)])


def write_manifest(out_dir, config_doc: dict | None, settings: SolverSettings,
                   days: int, workers: int, wall_time_s: float,
                   extra: dict | None = None) -> Path:
    doc = {
        "islandsim_version": __version__,
        "config_hash": config_hash(config_doc) if config_doc else None,
        "solver": settings.to_dict(),
        "days": days,
        "workers": workers,
        "wall_time_s": round(wall_time_s, 3),
    }
    if config_doc:
        seeds = {}
        series = config_doc.get("system", {}).get("series", {})
        for name, spec in series.items():
            if isinstance(spec, dict) and "seed" in spec:
                seeds[name] = spec["seed"]
        doc["seeds"] = seeds
    if extra:
        doc.update(extra)
    path = Path(out_dir) / "run_manifest.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
    return path


def generate_report(out_dir, system: IslandSystem, plan: SweepPlan,
                    params: EconomicParams, week: int = 1,
                    week_scenario: str | None = None,
                    config_doc: dict | None = None,
                    settings: SolverSettings | None = None,
                    days: int = 365, workers: int = 1,
                    wall_time_s: float = 0.0) -> list[Path]:
    """Emit every report artifact for the completed scenarios of a sweep."""
    out = Path(out_dir)
    store = ResultStore(out)
    settings = settings or SolverSettings()

    completed: list[Scenario] = [s for s in plan.scenarios if store.is_complete(s)]
    if not completed:
        raise FileNotFoundError(f"no completed scenarios under {out}")
    summaries = {s.id: store.load_meta(s)["summary"] for s in completed}
    base = next((s for s in completed if s.concept == "base"), None)
    base_summary = summaries[base.id] if base else None

    reports = [evaluate_economics(system, s, summaries[s.id], base_summary, params)
               for s in completed]
    written = [write_economics_csv(reports, out / "economics.csv")]

    front = pareto_from_reports(reports)
    written.append(write_pareto_csv(front, out / "pareto.csv"))
    written.append(figure_pareto(reports, front, out / "pareto.png"))

    target_id = week_scenario or next(
        (s.id for s in completed if s.concept != "base"), completed[0].id)
    target = next((s for s in completed if s.id == target_id), None)
    if target is None:
        raise ValueError(f"scenario {target_id!r} has no completed run under {out}")
    record = load_record(store.record_path(target))
    stem = f"week{week:02d}_{target.id}"
    written.append(write_week_csv(record, week, out / f"{stem}.csv"))
    written.append(figure_week(record, week, out / f"{stem}.png",
                               title=f"{target.id}, week {week}"))

    written.append(write_manifest(out, config_doc, settings, days, workers,
                                  wall_time_s,
                                  extra={"scenarios": [s.id for s in completed]}))
    return written
