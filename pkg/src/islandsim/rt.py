"""System real-time economic dispatch for a single hour.

Commitment of conventional units is frozen at whatever the day-ahead or
intraday run decided; the static problem re-balances the hour at minimum
cost (no start/stop charges), maximizing absorption of actual renewable
output.  Centrally managed batteries may deviate from their plan but must
end the hour at or above the planned state of charge, preserving the
arbitrage energy the scheduling stages set aside.  Hybrid stations are
dispatchable up to the energy scheduled for the hour plus whatever earlier
hours left undispatched; on a second pass their realized output can be
pinned so conventional units re-balance any station imbalance.

Secondary and tertiary reserve requirements are typically released here
(the orchestrator filters the rule set); the primary requirement stays and
again co-varies with the dispatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import BesUnit, DispatchSchedule, HpsPlant, ReserveRule, ThermalUnit
from .milp import LinearModel, solve, write_lp
from .uced import ScheduleError

#: EUR/MWh nudge on end-of-hour stored energy.  The static problem sees no
#: future, so absorbing otherwise-curtailed renewables into a battery would
#: tie with curtailing them; this keeps the tie-break on the absorption side
#: while staying orders of magnitude below any marginal cost.
SOC_TIEBREAK = 0.1


@dataclass(frozen=True)
class RtProblem:
    """One hour of actuals plus the frozen commitment and reference state."""

    hour: int                          # absolute hour index
    load: float
    wind_available: float              # external wind actual, MW
    pv_available: float
    thermal_units: tuple[ThermalUnit, ...]
    commitment: dict[str, int]         # unit id -> st flag from the plan
    stopped: dict[str, int]            # unit id -> sd flag for this hour
    prev_output: dict[str, float]      # realized output of the previous hour
    bes_units: tuple[BesUnit, ...] = ()
    prev_soc: dict[str, float] = field(default_factory=dict)
    soc_floor: dict[str, float] = field(default_factory=dict)   # planned end-of-hour SoC
    hps_plants: tuple[HpsPlant, ...] = ()
    hps_available_energy: dict[str, float] = field(default_factory=dict)  # MWh this hour
    hps_fixed: dict[str, tuple[float, float]] = field(default_factory=dict)  # (injection, draw)
    ens_penalty: float = 10_000.0
    hps_grid_energy_cost: float = 50.0
    reserve_rules: tuple[ReserveRule, ...] = ()

    def __post_init__(self):
        for bid, floor in self.soc_floor.items():
            b = next((x for x in self.bes_units if x.id == bid), None)
            if b is not None and not (b.e_min - 1e-6 <= floor <= b.e_max + 1e-6):
                raise ValueError(f"reference SoC {floor} for {bid} outside "
                                 f"[{b.e_min}, {b.e_max}]")


def build_rt_model(problem: RtProblem) -> LinearModel:
    p = problem
    m = LinearModel(name=f"rt.{p.hour}", sense="min")
    up_kinds = [r.kind for r in p.reserve_rules if r.direction == "up"]
    dn_kinds = [r.kind for r in p.reserve_rules if r.direction == "down"]
    free_hps = [h for h in p.hps_plants if h.id not in p.hps_fixed]
    providers = ([u.id for u in p.thermal_units] + [b.id for b in p.bes_units]
                 + [h.id for h in free_hps])

    for rule in p.reserve_rules:
        for aid in providers:
            v = m.add_var(f"r.{aid}.{rule.kind}.0", 0.0)
            if rule.reserve_cost:
                m.add_objective(v, rule.reserve_cost)

    for u in p.thermal_units:
        st = int(p.commitment[u.id])
        sd = int(p.stopped.get(u.id, 0))
        prev = p.prev_output.get(u.id, 0.0)
        pv_ = m.add_var(f"p.{u.id}.0", 0.0, u.p_max * st)
        identity = {pv_: 1.0}
        for b, (width, marginal) in enumerate(u.cost_blocks):
            dp = m.add_var(f"dp.{u.id}.0.{b}", 0.0, width * st)
            identity[dp] = -1.0
            m.add_objective(dp, marginal)
        m.add_eq(identity, u.p_min * st, name=f"blocks.{u.id}")
        m.obj_const += u.cost_at_pmin * st
        m.add_le({pv_: 1.0}, prev + u.ramp_up * st, name=f"rampup.{u.id}")
        m.add_ge({pv_: 1.0}, prev - u.ramp_down * st - u.p_max * sd, name=f"rampdn.{u.id}")
        cap = {pv_: 1.0}
        for kind in up_kinds:
            cap[m.var(f"r.{u.id}.{kind}.0")] = 1.0
        m.add_le(cap, u.p_max * st, name=f"cap.{u.id}")
        floor = {pv_: 1.0}
        for kind in dn_kinds:
            floor[m.var(f"r.{u.id}.{kind}.0")] = -1.0
        m.add_ge(floor, u.p_min * st, name=f"floor.{u.id}")

    for b in p.bes_units:
        sq = b.eff_sqrt
        prior = p.prev_soc[b.id]
        # plan values carry solver tolerance; keep the floor inside the window
        lo = min(max(b.e_min, p.soc_floor.get(b.id, b.e_min)), b.e_max)
        c = m.add_var(f"c.{b.id}.0", 0.0, b.p_charge_max)
        d = m.add_var(f"d.{b.id}.0", 0.0, b.p_discharge_max)
        soc = m.add_var(f"soc.{b.id}.0", lo, b.e_max)
        m.add_objective(soc, -SOC_TIEBREAK)
        stc = m.add_binary(f"stc.{b.id}.0")
        std = m.add_binary(f"std.{b.id}.0")
        m.add_le({c: 1.0, stc: -b.p_charge_max}, 0.0, name=f"cgate.{b.id}")
        m.add_le({d: 1.0, std: -b.p_discharge_max}, 0.0, name=f"dgate.{b.id}")
        m.add_le({stc: 1.0, std: 1.0}, 1.0, name=f"cdx.{b.id}")
        m.add_eq({soc: 1.0, c: -sq, d: 1.0 / sq}, prior, name=f"socrec.{b.id}")
        if up_kinds:
            row = {d: 1.0, c: -1.0}
            for kind in up_kinds:
                row[m.var(f"r.{b.id}.{kind}.0")] = 1.0
            m.add_le(row, b.p_discharge_max, name=f"rescap.{b.id}")
        if dn_kinds:
            row = {c: 1.0, d: -1.0}
            for kind in dn_kinds:
                row[m.var(f"r.{b.id}.{kind}.0")] = 1.0
            m.add_le(row, b.p_charge_max, name=f"resfloor.{b.id}")

    for h in free_hps:
        avail = max(0.0, p.hps_available_energy.get(h.id, 0.0))
        ph = m.add_var(f"p.{h.id}.0", 0.0, h.p_max)
        on = m.add_binary(f"l.{h.id}.0")
        gr = m.add_var(f"pgr.{h.id}.0", 0.0, h.grid_absorb_max)
        m.add_objective(gr, p.hps_grid_energy_cost)
        cap = {ph: 1.0, on: -h.p_max}
        for kind in up_kinds:
            cap[m.var(f"r.{h.id}.{kind}.0")] = 1.0
        m.add_le(cap, 0.0, name=f"cap.{h.id}")
        floor = {ph: 1.0, on: -h.p_min_component}
        for kind in dn_kinds:
            floor[m.var(f"r.{h.id}.{kind}.0")] = -1.0
        m.add_ge(floor, 0.0, name=f"floor.{h.id}")
        m.add_le({gr: 1.0, on: h.grid_absorb_max}, h.grid_absorb_max, name=f"grgate.{h.id}")
        m.add_le({ph: 1.0}, avail, name=f"avuse.{h.id}")

    xw = m.add_var("xw.0", 0.0, p.wind_available)
    ens = m.add_var("ens.0", 0.0)
    m.add_objective(ens, p.ens_penalty)
    balance = {ens: 1.0, xw: -1.0}
    rhs = p.load - p.wind_available - p.pv_available
    for u in p.thermal_units:
        balance[m.var(f"p.{u.id}.0")] = 1.0
    for b in p.bes_units:
        balance[m.var(f"d.{b.id}.0")] = 1.0
        balance[m.var(f"c.{b.id}.0")] = -1.0
    for h in free_hps:
        balance[m.var(f"p.{h.id}.0")] = 1.0
        balance[m.var(f"pgr.{h.id}.0")] = -1.0
    for hid, (injection, draw) in p.hps_fixed.items():
        rhs -= injection - draw
        m.obj_const += p.hps_grid_energy_cost * draw
    m.add_eq(balance, rhs, name="balance")

    for rule in p.reserve_rules:
        slack = m.add_var(f"xe.{rule.kind}.0", 0.0)
        m.add_objective(slack, rule.violation_penalty)
        fulfil = {slack: 1.0}
        for aid in providers:
            fulfil[m.var(f"r.{aid}.{rule.kind}.0")] = 1.0
        if rule.rule == "fraction_of_load":
            m.add_ge(fulfil, rule.param_dict.get("fraction", 0.0) * p.load,
                     name=f"rreq.{rule.kind}")
            continue
        if rule.rule == "fixed":
            m.add_ge(fulfil, rule.param_dict.get("mw", 0.0), name=f"rreq.{rule.kind}")
            continue
        rr = m.add_var(f"rr.{rule.kind}.0", 0.0)
        fulfil[rr] = -1.0
        m.add_ge(fulfil, 0.0, name=f"rreq.{rule.kind}")
        if rule.rule == "largest_online_infeed":
            for u in p.thermal_units:
                m.add_ge({rr: 1.0, m.var(f"p.{u.id}.0"): -1.0}, 0.0,
                         name=f"rrinf.{u.id}.{rule.kind}")
            for h in free_hps:
                m.add_ge({rr: 1.0, m.var(f"p.{h.id}.0"): -1.0}, 0.0,
                         name=f"rrinf.{h.id}.{rule.kind}")
            for hid, (injection, _) in p.hps_fixed.items():
                m.add_ge({rr: 1.0}, injection, name=f"rrinf.{hid}.{rule.kind}")
            m.add_ge({rr: 1.0, xw: 1.0}, p.wind_available, name=f"rrwind.{rule.kind}")
        elif rule.rule == "largest_committed_pmax":
            for u in p.thermal_units:
                if p.commitment[u.id]:
                    m.add_ge({rr: 1.0}, u.p_max, name=f"rrcomm.{u.id}.{rule.kind}")
            for h in free_hps:
                m.add_ge({rr: 1.0, m.var(f"l.{h.id}.0"): -h.p_max}, 0.0,
                         name=f"rrcomm.{h.id}.{rule.kind}")
    return m


def solve_rt(problem: RtProblem, gap: float = 1e-4, time_limit: float = 60.0,
             dump_lp: str | None = None) -> DispatchSchedule:
    """Solve one real-time hour; raises ScheduleError when no solution exists."""
    p = problem
    model = build_rt_model(p)
    if dump_lp:
        write_lp(model, dump_lp)
    sol = solve(model, gap_tolerance=gap, time_limit=time_limit)
    if not sol.ok:
        raise ScheduleError(f"real-time hour {p.hour} {sol.status}: {sol.message}",
                            status=sol.status)
    v = sol.values
    sched = DispatchSchedule(stage="real_time", horizon=np.array([p.hour]),
                             status=sol.status, objective=sol.objective, gap=sol.gap)

    fuel = 0.0
    for u in p.thermal_units:
        st = int(p.commitment[u.id])
        sched.p[u.id] = np.array([v[f"p.{u.id}.0"]])
        sched.st[u.id] = np.array([float(st)])
        sched.su[u.id] = np.zeros(1)
        sched.sd[u.id] = np.array([float(p.stopped.get(u.id, 0))])
        fuel += u.cost_at_pmin * st
        for b, (_, marginal) in enumerate(u.cost_blocks):
            fuel += marginal * v[f"dp.{u.id}.0.{b}"]

    for b in p.bes_units:
        sched.charge[b.id] = np.array([v[f"c.{b.id}.0"]])
        sched.discharge[b.id] = np.array([v[f"d.{b.id}.0"]])
        sched.soc[b.id] = np.array([v[f"soc.{b.id}.0"]])

    hps_grid = 0.0
    for h in p.hps_plants:
        if h.id in p.hps_fixed:
            injection, draw = p.hps_fixed[h.id]
            sched.hps_p[h.id] = np.array([injection])
            sched.hps_gr[h.id] = np.array([draw])
            sched.hps_on[h.id] = np.array([1.0 if injection > 1e-9 else 0.0])
            hps_grid += p.hps_grid_energy_cost * draw
        else:
            sched.hps_p[h.id] = np.array([v[f"p.{h.id}.0"]])
            sched.hps_gr[h.id] = np.array([v[f"pgr.{h.id}.0"]])
            sched.hps_on[h.id] = np.array([v[f"l.{h.id}.0"]])
            hps_grid += p.hps_grid_energy_cost * v[f"pgr.{h.id}.0"]

    sched.wind_curtail = np.array([v["xw.0"]])
    sched.ens = np.array([v["ens.0"]])

    reserve_cost = 0.0
    slack = p.ens_penalty * v["ens.0"]
    free_ids = ([u.id for u in p.thermal_units] + [b.id for b in p.bes_units]
                + [h.id for h in p.hps_plants if h.id not in p.hps_fixed])
    for rule in p.reserve_rules:
        sched.reserve[rule.kind] = {
            aid: np.array([v[f"r.{aid}.{rule.kind}.0"]]) for aid in free_ids}
        if rule.rule == "fraction_of_load":
            req = rule.param_dict.get("fraction", 0.0) * p.load
        elif rule.rule == "fixed":
            req = rule.param_dict.get("mw", 0.0)
        else:
            req = v[f"rr.{rule.kind}.0"]
        sched.reserve_req[rule.kind] = np.array([req])
        sched.reserve_slack[rule.kind] = np.array([v[f"xe.{rule.kind}.0"]])
        slack += rule.violation_penalty * v[f"xe.{rule.kind}.0"]
        reserve_cost += rule.reserve_cost * sum(
            arr[0] for arr in sched.reserve[rule.kind].values())

    sched.cost_fuel = np.array([fuel])
    sched.cost_startup = np.zeros(1)
    sched.cost_shutdown = np.zeros(1)
    sched.cost_reserve = np.array([reserve_cost])
    sched.cost_hps_grid = np.array([hps_grid])
    sched.cost_slack = np.array([slack])
    return sched
