"""Annual simulation loop, scenario sweeps and the on-disk result store.

Per scenario and day: build hybrid-station offers, solve the 24-h day-ahead
schedule, realize hours 1-12 (station self-dispatch, then the system
real-time hour, with a second balancing pass when the station deviates),
re-solve a 12-h intraday schedule with updated offers at midday, then
realize hours 13-24.  Realized state (commitment history, battery and
station storage, undispatched station energy) carries hour to hour and
across days.

Each scenario appends its realized hours to one record file per scenario,
in a per-concept store directory, after every completed day; a failed day
leaves a checkpoint so a re-run resumes where it stopped.  Sweeps fan
scenarios out across processes; all state lives inside a scenario, so
parallel runs stay deterministic.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import IslandSystem, SolverSettings, SweepPlan
from .domain import (AnnualLedger, Scenario, SystemSnapshot, validate_system)
from .economics import (EconomicParams, EconomicReport, capacity_credit,
                        lcoe_central, lcoe_self, system_cost_impact,
                        total_cost_impact)
from .hps import HpsOrder, self_dispatch
from .rt import RtProblem, solve_rt
from .uced import (ScheduleError, UcedProblem, build_intraday_offer,
                   build_offer, solve_uced)

_DEV_TOL = 1e-6      # MW deviation that triggers the second balancing pass


class ScenarioAborted(RuntimeError):
    """A scenario stopped mid-year; completed days are checkpointed."""

    def __init__(self, scenario_id: str, day: int, hour: int, cause: Exception):
        super().__init__(f"scenario {scenario_id} aborted on day {day} "
                         f"hour {hour}: {cause}")
        self.scenario_id = scenario_id
        self.day = day
        self.hour = hour
        self.cause = cause


# ----------------------------------------------------------------------
# Mutable per-run state
# ----------------------------------------------------------------------

class _State:
    def __init__(self, system: IslandSystem, bes, hps):
        lookback = max([max(u.min_up_time, u.min_down_time)
                        for u in system.thermal_units] + [1])
        self.lookback = lookback
        self.commit_hist = {u.id: [0] * lookback for u in system.thermal_units}
        self.prev_output = {u.id: 0.0 for u in system.thermal_units}
        self.soc = {b.id: b.initial_soc for b in bes}
        self.hps_soc = {h.id: h.storage.initial_soc for h in hps}
        self.hps_carry = {h.id: 0.0 for h in hps}

    def to_dict(self) -> dict:
        return {"commit_hist": self.commit_hist, "prev_output": self.prev_output,
                "soc": self.soc, "hps_soc": self.hps_soc,
                "hps_carry": self.hps_carry}

    def load_dict(self, d: dict) -> None:
        self.commit_hist = {k: [int(x) for x in v] for k, v in d["commit_hist"].items()}
        self.prev_output = dict(d["prev_output"])
        self.soc = dict(d["soc"])
        self.hps_soc = dict(d["hps_soc"])
        self.hps_carry = dict(d["hps_carry"])


def _ledger_columns(system: IslandSystem, bes, hps) -> tuple[list[str], list[str]]:
    cols = ["load", "wind_available", "existing_wind_available", "new_wind_available",
            "wind_curtail", "wind_injected", "existing_wind_injected",
            "new_wind_injected", "pv_injected", "ens", "reserve_slack_mw",
            "cost_fuel", "cost_startup", "cost_shutdown", "cost_reserve",
            "cost_hps_grid", "cost_slack"]
    for u in system.thermal_units:
        cols += [f"p.{u.id}", f"st.{u.id}"]
    for b in bes:
        cols += [f"charge.{b.id}", f"discharge.{b.id}", f"soc.{b.id}"]
    plan_cols = ["wind_curtail", "ens"]
    for b in bes:
        plan_cols.append(f"soc.{b.id}")
    if hps:
        cols += ["hps.order_p", "hps.order_gr", "hps.res_available", "hps.res_g",
                 "hps.res_s", "hps.res_r", "hps.dch", "hps.ch", "hps.imb_p",
                 "hps.imb_a", "hps.soc", "hps.delivered", "hps.grid_draw",
                 "hps.carry"]
        plan_cols.append("hps_p")
    return cols, plan_cols


# ----------------------------------------------------------------------
# The annual loop
# ----------------------------------------------------------------------

class _ScenarioRun:
    def __init__(self, system: IslandSystem, scenario: Scenario,
                 settings: SolverSettings, days: int, forecast_fn=None):
        self.system = system
        self.scenario = scenario
        self.settings = settings
        self.days = days
        self.forecast_fn = forecast_fn or (lambda kind, values, day: values)
        bes = system.bes_for(scenario)
        hps = system.hps_for(scenario)
        self.bes = (bes,) if bes else ()
        self.hps = (hps,) if hps else ()
        existing, new, station = system.wind_layout(scenario)
        n = days * 24
        self.load = system.load.values[:n]
        self.pv = system.pv.values[:n]
        self.wind_existing = existing[:n]
        self.wind_new = new[:n]
        self.wind_external = self.wind_existing + self.wind_new
        self.hps_res = station[:n]
        self.rt_rules = tuple(r for r in system.reserve_rules
                              if r.kind.split("_")[0] not in system.rt_released)
        self.state = _State(system, self.bes, self.hps)
        cols, plan_cols = _ledger_columns(system, self.bes, self.hps)
        self.ledger = AnnualLedger(scenario.id, scenario.concept, cols, plan_cols, n)
        self.gap_events = 0

    # -- snapshots ------------------------------------------------------

    def _snapshot(self, start: int, hours: int, day: int) -> SystemSnapshot:
        sl = slice(start, start + hours)
        fc = self.forecast_fn
        return SystemSnapshot(
            horizon=np.arange(start, start + hours),
            load=fc("load", self.load[sl], day),
            wind_available=fc("wind", self.wind_external[sl], day),
            pv_available=fc("pv", self.pv[sl], day),
            hps_res_available={h.id: fc("hps_res", self.hps_res[sl], day)
                               for h in self.hps},
            thermal_units=self.system.thermal_units,
            bes_units=self.bes,
            hps_plants=self.hps,
            prior_commitment={u: tuple(v) for u, v in self.state.commit_hist.items()},
            prior_output=dict(self.state.prev_output),
            prior_soc=dict(self.state.soc),
            ens_penalty=self.system.ens_penalty,
            hps_grid_energy_cost=self.system.hps_grid_energy_cost,
            reserve_rules=self.system.reserve_rules,
        )

    def _solve_stage(self, stage: str, start: int, hours: int, day: int,
                     offers: dict[str, float]):
        snap = self._snapshot(start, hours, day)
        problem = UcedProblem(snap, stage, offers)
        plan = solve_uced(problem, gap=self.settings.gap,
                          time_limit=self.settings.time_limit)
        if plan.status != "optimal":
            self.gap_events += 1
        return plan

    # -- one realized hour ----------------------------------------------

    def _step_hour(self, t: int, plan, k: int) -> None:
        st_now = {u.id: int(round(plan.st[u.id][k])) for u in self.system.thermal_units}
        stopped = {}
        started = {}
        for uid, flag in st_now.items():
            prev = self.state.commit_hist[uid][-1]
            started[uid] = 1 if flag == 1 and prev == 0 else 0
            stopped[uid] = 1 if flag == 0 and prev == 1 else 0

        problem = RtProblem(
            hour=t, load=float(self.load[t]),
            wind_available=float(self.wind_external[t]),
            pv_available=float(self.pv[t]),
            thermal_units=self.system.thermal_units,
            commitment=st_now, stopped=stopped,
            prev_output=dict(self.state.prev_output),
            bes_units=self.bes, prev_soc=dict(self.state.soc),
            soc_floor={b.id: float(plan.soc[b.id][k]) for b in self.bes},
            hps_plants=self.hps,
            hps_available_energy={h.id: float(plan.hps_p[h.id][k])
                                  + self.state.hps_carry[h.id] for h in self.hps},
            ens_penalty=self.system.ens_penalty,
            hps_grid_energy_cost=self.system.hps_grid_energy_cost,
            reserve_rules=self.rt_rules,
        )
        rt = solve_rt(problem, gap=self.settings.gap,
                      time_limit=self.settings.time_limit)
        if rt.status != "optimal":
            self.gap_events += 1

        realization = None
        order = None
        if self.hps:
            h = self.hps[0]
            order = HpsOrder(
                production=float(rt.hps_p[h.id][0]) if rt.hps_p[h.id][0] > _DEV_TOL else 0.0,
                absorption=float(rt.hps_gr[h.id][0]) if rt.hps_gr[h.id][0] > _DEV_TOL else 0.0,
                interval=t)
            realization = self_dispatch(h, order, float(self.hps_res[t]),
                                        self.state.hps_soc[h.id])
            deviates = (abs(realization.delivered - order.production) > _DEV_TOL
                        or abs(realization.grid_draw - order.absorption) > _DEV_TOL)
            if deviates:
                fixed = RtProblem(**{**problem.__dict__,
                                     "hps_fixed": {h.id: (realization.delivered,
                                                          realization.grid_draw)}})
                rt = solve_rt(fixed, gap=self.settings.gap,
                              time_limit=self.settings.time_limit)
                if rt.status != "optimal":
                    self.gap_events += 1
            avail = float(plan.hps_p[h.id][k]) + self.state.hps_carry[h.id]
            self.state.hps_carry[h.id] = max(
                0.0, avail - order.production
                + h.roundtrip_eff * realization.grid_draw)
            self.state.hps_soc[h.id] = realization.end_soc

        self._record_hour(t, plan, k, rt, order, realization, started, stopped)

        for uid in st_now:
            self.state.prev_output[uid] = float(rt.p[uid][0])
            hist = self.state.commit_hist[uid]
            hist.append(st_now[uid])
            del hist[:-self.state.lookback]
        for b in self.bes:
            self.state.soc[b.id] = float(rt.soc[b.id][0])

    def _record_hour(self, t, plan, k, rt, order, realization,
                     started, stopped) -> None:
        ext_avail = float(self.wind_existing[t])
        new_avail = float(self.wind_new[t])
        total_avail = ext_avail + new_avail
        curtail = float(rt.wind_curtail[0])
        injected = total_avail - curtail
        share = injected / total_avail if total_avail > 0 else 0.0
        startup_cost = sum(u.startup_cost * started[u.id]
                           for u in self.system.thermal_units)
        shutdown_cost = sum(u.shutdown_cost * stopped[u.id]
                            for u in self.system.thermal_units)
        slack_mw = float(sum(arr[0] for arr in rt.reserve_slack.values())) \
            if rt.reserve_slack else 0.0

        row = {
            "load": float(self.load[t]),
            "wind_available": total_avail,
            "existing_wind_available": ext_avail,
            "new_wind_available": new_avail,
            "wind_curtail": curtail,
            "wind_injected": injected,
            "existing_wind_injected": ext_avail * share,
            "new_wind_injected": new_avail * share,
            "pv_injected": float(self.pv[t]),
            "ens": float(rt.ens[0]),
            "reserve_slack_mw": slack_mw,
            "cost_fuel": float(rt.cost_fuel[0]),
            "cost_startup": startup_cost,
            "cost_shutdown": shutdown_cost,
            "cost_reserve": float(rt.cost_reserve[0]),
            "cost_hps_grid": float(rt.cost_hps_grid[0]),
            "cost_slack": float(rt.cost_slack[0]),
        }
        for u in self.system.thermal_units:
            row[f"p.{u.id}"] = float(rt.p[u.id][0])
            row[f"st.{u.id}"] = float(rt.st[u.id][0])
        for b in self.bes:
            row[f"charge.{b.id}"] = float(rt.charge[b.id][0])
            row[f"discharge.{b.id}"] = float(rt.discharge[b.id][0])
            row[f"soc.{b.id}"] = float(rt.soc[b.id][0])
        planned = {"wind_curtail": float(plan.wind_curtail[k]),
                   "ens": float(plan.ens[k])}
        for b in self.bes:
            planned[f"soc.{b.id}"] = float(plan.soc[b.id][k])
        if self.hps:
            h = self.hps[0]
            r = realization
            row.update({
                "hps.order_p": order.production, "hps.order_gr": order.absorption,
                "hps.res_available": float(self.hps_res[t]),
                "hps.res_g": r.res_to_grid, "hps.res_s": r.res_to_storage,
                "hps.res_r": r.res_rejected, "hps.dch": r.discharge,
                "hps.ch": r.charge, "hps.imb_p": r.imbalance_production,
                "hps.imb_a": r.imbalance_absorption, "hps.soc": r.end_soc,
                "hps.delivered": r.delivered, "hps.grid_draw": r.grid_draw,
                "hps.carry": self.state.hps_carry[h.id],
            })
            planned["hps_p"] = float(plan.hps_p[h.id][k])
        self.ledger.append_hour(row, planned)

    # -- day and year ----------------------------------------------------

    def _sellable_stored(self, h) -> float:
        """Grid-deliverable energy already sitting in the station's storage.

        The safety coefficients hedge the uncertain RES forecast; energy
        banked in storage is certain and is offered on top, which is what
        lets a large store turn a windy week into sales on calm days.
        """
        return max(0.0, self.state.hps_soc[h.id] - h.storage.e_min) * h.eff_sqrt

    def run_day(self, day: int) -> None:
        start = day * 24
        offers = {}
        for h in self.hps:
            # yesterday's undispatched promises are superseded by the fresh
            # offer; whatever was stored reappears through the storage credit
            self.state.hps_carry[h.id] = 0.0
            offers[h.id] = build_offer(
                h, self.forecast_fn("hps_res", self.hps_res[start:start + 24], day)
            ) + self._sellable_stored(h)
        plan = self._solve_stage("day_ahead", start, 24, day, offers)
        for k in range(12):
            self._step_hour(start + k, plan, k)
        offers_id = {}
        for h in self.hps:
            offers_id[h.id] = build_intraday_offer(
                h, self.forecast_fn("hps_res", self.hps_res[start + 12:start + 24], day),
                self._sellable_stored(h))
            self.state.hps_carry[h.id] = 0.0   # rolled into the updated offer
        plan_id = self._solve_stage("intraday", start + 12, 12, day, offers_id)
        for k in range(12):
            self._step_hour(start + 12 + k, plan_id, k)


def run_scenario(system: IslandSystem, scenario: Scenario,
                 settings: SolverSettings | None = None, days: int = 365,
                 store: "ResultStore | None" = None, resume: bool = True,
                 forecast_fn=None) -> AnnualLedger:
    """Simulate one scenario day by day; returns the filled hourly ledger."""
    settings = settings or SolverSettings()
    run = _ScenarioRun(system, scenario, settings, days, forecast_fn)

    violations = validate_system(run._snapshot(0, 24, 0))
    if violations:
        raise ValueError(f"invalid system for {scenario.id}: "
                         + "; ".join(str(v) for v in violations[:5]))

    start_day = 0
    if store is not None and resume:
        start_day = store.restore(scenario, run)
    t0 = time.perf_counter()
    for day in range(start_day, days):
        try:
            run.run_day(day)
        except ScheduleError as exc:
            if store is not None:
                store.save_state(scenario, run, day)
            raise ScenarioAborted(scenario.id, day, run.ledger.filled, exc) from exc
        if store is not None:
            store.append_day(scenario, run, day)
    if store is not None:
        store.finalize(scenario, run, wall_time=time.perf_counter() - t0)
    return run.ledger


# ----------------------------------------------------------------------
# Result store
# ----------------------------------------------------------------------

class ResultStore:
    """One directory per sweep; scenarios keyed into per-concept stores."""

    FLOAT_FMT = "%.9f"

    def __init__(self, root):
        self.root = Path(root)

    def scenario_dir(self, scenario: Scenario) -> Path:
        d = self.root / f"store_{scenario.flag}"
        d.mkdir(parents=True, exist_ok=True)
        return d

    def record_path(self, scenario: Scenario) -> Path:
        return self.scenario_dir(scenario) / f"{scenario.id}.csv"

    def meta_path(self, scenario: Scenario) -> Path:
        return self.scenario_dir(scenario) / f"{scenario.id}.meta.json"

    def state_path(self, scenario: Scenario) -> Path:
        return self.scenario_dir(scenario) / f"{scenario.id}.state.json"

    def is_complete(self, scenario: Scenario) -> bool:
        try:
            with open(self.meta_path(scenario), encoding="utf-8") as fh:
                return bool(json.load(fh).get("complete"))
        except (OSError, ValueError):
            return False

    def load_meta(self, scenario: Scenario) -> dict:
        with open(self.meta_path(scenario), encoding="utf-8") as fh:
            return json.load(fh)

    def _header(self, run: _ScenarioRun) -> list[str]:
        return (["hour"] + sorted(run.ledger.columns)
                + [f"plan.{c}" for c in sorted(run.ledger.plan)])

    def append_day(self, scenario: Scenario, run: _ScenarioRun, day: int) -> None:
        path = self.record_path(scenario)
        new_file = not path.exists() or day == 0
        mode = "w" if new_file else "a"
        cols = sorted(run.ledger.columns)
        plan_cols = sorted(run.ledger.plan)
        with open(path, mode, newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if new_file:
                w.writerow(self._header(run))
            for i in range(day * 24, day * 24 + 24):
                row = [str(i)]
                row += [self.FLOAT_FMT % run.ledger.columns[c][i] for c in cols]
                row += [self.FLOAT_FMT % run.ledger.plan[c][i] for c in plan_cols]
                w.writerow(row)
        self.save_state(scenario, run, day + 1)

    def save_state(self, scenario: Scenario, run: _ScenarioRun, next_day: int) -> None:
        doc = {"next_day": next_day, "gap_events": run.gap_events,
               "state": run.state.to_dict()}
        tmp = self.state_path(scenario).with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc), encoding="utf-8")
        tmp.replace(self.state_path(scenario))

    def restore(self, scenario: Scenario, run: _ScenarioRun) -> int:
        """Reload checkpointed days into the run; returns the next day index."""
        state_path = self.state_path(scenario)
        record = self.record_path(scenario)
        if not state_path.exists() or not record.exists():
            return 0
        doc = json.loads(state_path.read_text(encoding="utf-8"))
        next_day = int(doc["next_day"])
        if next_day <= 0:
            return 0
        run.state.load_dict(doc["state"])
        run.gap_events = int(doc.get("gap_events", 0))
        with open(record, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            cols = header[1:]
            keep = next_day * 24
            for row_no, row in enumerate(reader):
                if row_no >= keep:
                    break
                realized, planned = {}, {}
                for name, value in zip(cols, row[1:]):
                    if name.startswith("plan."):
                        planned[name[5:]] = float(value)
                    else:
                        realized[name] = float(value)
                run.ledger.append_hour(realized, planned)
        return next_day

    def finalize(self, scenario: Scenario, run: _ScenarioRun, wall_time: float) -> None:
        meta = {
            "complete": True,
            "scenario": {"id": scenario.id, "concept": scenario.concept,
                         "flag": scenario.flag,
                         "new_wind_mw": scenario.new_wind_mw,
                         "bes_power_mw": scenario.bes_power_mw,
                         "bes_hours": scenario.bes_hours},
            "summary": run.ledger.summary(),
            "wall_time_s": round(wall_time, 3),
            "gap_events": run.gap_events,
            "hours": run.ledger.filled,
        }
        tmp = self.meta_path(scenario).with_suffix(".json.tmp")
        tmp.write_text(json.dumps(meta, indent=1, sort_keys=True), encoding="utf-8")
        tmp.replace(self.meta_path(scenario))
        state = self.state_path(scenario)
        if state.exists():
            state.unlink()


# ----------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------

def _sweep_worker(args):
    system, scenario, settings, days, root = args
    store = ResultStore(root)
    run_scenario(system, scenario, settings, days=days, store=store)
    return scenario.id


def run_sweep(system: IslandSystem, plan: SweepPlan,
              settings: SolverSettings | None = None, out_dir="results",
              days: int = 365, workers: int = 1) -> list[dict]:
    """Run every missing scenario of the plan; returns all meta records."""
    settings = settings or SolverSettings()
    store = ResultStore(out_dir)
    pending = [s for s in plan.scenarios if not store.is_complete(s)]
    if workers > 1 and len(pending) > 1:
        jobs = [(system, s, settings, days, str(store.root)) for s in pending]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for _ in pool.map(_sweep_worker, jobs):
                pass
    else:
        for s in pending:
            run_scenario(system, s, settings, days=days, store=store)
    return [store.load_meta(s) | {"scenario_id": s.id} for s in plan.scenarios]


# ----------------------------------------------------------------------
# Scenario economics
# ----------------------------------------------------------------------

def evaluate_economics(system: IslandSystem, scenario: Scenario, summary: dict,
                       base_summary: dict | None,
                       params: EconomicParams) -> EconomicReport:
    """Combine a scenario's annual summary into its economic report row."""
    years = params.evaluation_years
    load_mwh = summary["load_mwh"]
    new_energy = summary.get("hps_delivered_mwh", summary["new_wind_injected_mwh"])
    penetration = (summary["existing_wind_injected_mwh"] + summary["pv_injected_mwh"]
                   + new_energy) / load_mwh

    if scenario.concept == "central" and scenario.new_wind_mw > 0:
        lcoe = lcoe_central(params, scenario.bes_power_mw, scenario.bes_energy_mwh,
                            scenario.new_wind_mw,
                            [summary["new_wind_injected_mwh"]] * years)
    elif scenario.concept == "self":
        hps = system.hps_for(scenario)
        imb = (summary["hps_imbalance_production_mwh"]
               + summary["hps_imbalance_absorption_mwh"])
        lcoe = lcoe_self(params, hps, [summary["hps_delivered_mwh"]] * years,
                         [imb] * years)
    else:
        lcoe = float("nan")

    ext_injected = summary["existing_wind_injected_mwh"]
    ext_available = summary["existing_wind_available_mwh"]
    ext_curt_share = (1.0 - ext_injected / ext_available) if ext_available > 0 else 0.0
    if scenario.concept == "self":
        avail_new = summary["hps_res_available_mwh"]
        new_curt_share = (summary["hps_rejected_mwh"] / avail_new) if avail_new > 0 else 0.0
        total_avail = summary["wind_available_mwh"] + avail_new
        total_curt = summary["wind_curtailed_mwh"] + summary["hps_rejected_mwh"]
    else:
        avail_new = summary.get("new_wind_available_mwh", 0.0)
        new_injected = summary["new_wind_injected_mwh"]
        new_curt_share = (1.0 - new_injected / avail_new) if avail_new > 0 else 0.0
        total_avail = summary["wind_available_mwh"]
        total_curt = summary["wind_curtailed_mwh"]
    total_curt_share = total_curt / total_avail if total_avail > 0 else 0.0

    if base_summary is not None and scenario.concept != "base":
        delta = system_cost_impact(base_summary, summary, lcoe,
                                   params.existing_res_fit)
    else:
        delta = 0.0
    hours = int(summary["hours"])
    if scenario.concept in ("central", "self") and scenario.bes_power_mw > 0:
        eff = (system.bes_template.roundtrip_eff if scenario.concept == "central"
               else system.hps_template.roundtrip_eff)
        credit = capacity_credit(system.load.values[:hours], scenario.bes_power_mw,
                                 scenario.bes_energy_mwh, eff)
    else:
        credit = 0.0
    total_delta = total_cost_impact(delta, credit, params.thermal_capex,
                                    params.thermal_annualized_fixed)
    return EconomicReport(
        scenario_id=scenario.id, concept=scenario.concept,
        bes_power_mw=scenario.bes_power_mw, bes_hours=scenario.bes_hours,
        new_wind_mw=scenario.new_wind_mw, lcoe=lcoe,
        res_penetration=penetration,
        curtailment_existing_share=ext_curt_share,
        curtailment_new_share=new_curt_share,
        curtailment_total_share=total_curt_share,
        system_variable_cost_delta=delta, capacity_credit_mw=credit,
        total_cost_delta=total_delta,
    )
