"""Day-ahead and intraday unit commitment / economic dispatch.

The system operator's scheduling problem: commit thermal units and dispatch
all assets over a 24-h (day-ahead) or 12-h (intraday) horizon at minimum
variable cost.  Hybrid stations participate as aggregate dispatchable
elements limited by their submitted energy offers; centrally managed
batteries are free system assets.  Hard balance and reserve constraints are
backed by heavily penalized slack variables so the problem stays feasible
under stress, with the slack cost recording how hard it was pushed.

Offers from hybrid stations are built with the safety-coefficient method:
fractions of the forecasted station RES energy per 8-h block of the day,
with the intraday update reusing the later tiers plus any energy the morning
run left undispatched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import DispatchSchedule, SystemSnapshot
from .milp import LinearModel, add_piecewise_cost, solve, write_lp

DAY_AHEAD_HOURS = 24
INTRADAY_HOURS = 12


class ScheduleError(RuntimeError):
    """A scheduling problem failed to produce a usable solution."""

    def __init__(self, message: str, status: str = "error"):
        super().__init__(message)
        self.status = status


# ----------------------------------------------------------------------
# Hybrid-station energy offers
# ----------------------------------------------------------------------

def build_offer(hps, res_forecast) -> float:
    """Day-ahead energy offer (MWh) from a 24-h station RES forecast."""
    f = np.asarray(res_forecast, dtype=float)
    if len(f) != DAY_AHEAD_HOURS:
        raise ValueError(f"day-ahead forecast must cover {DAY_AHEAD_HOURS} h, got {len(f)}")
    c1, c2, c3 = hps.offer_coefficients
    return float(c1 * f[0:8].sum() + c2 * f[8:16].sum() + c3 * f[16:24].sum())


def build_intraday_offer(hps, res_forecast, undelivered_energy: float) -> float:
    """Offer update for the back half of the day (MWh).

    Uses the two later safety tiers over the 12-h window and carries over
    whatever energy of the morning offer was not dispatched.
    """
    f = np.asarray(res_forecast, dtype=float)
    if len(f) != INTRADAY_HOURS:
        raise ValueError(f"intraday forecast must cover {INTRADAY_HOURS} h, got {len(f)}")
    if undelivered_energy < 0:
        raise ValueError(f"carry-over energy must be >= 0, got {undelivered_energy}")
    _, c2, c3 = hps.offer_coefficients
    return float(c2 * f[0:6].sum() + c3 * f[6:12].sum() + undelivered_energy)


@dataclass(frozen=True)
class UcedProblem:
    """One scheduling-stage instance.

    ``day_ahead`` and ``intraday`` carry their fixed 24-h / 12-h horizons;
    ``window`` admits any positive length for reduced studies and tests.
    """

    snapshot: SystemSnapshot
    stage: str                        # day_ahead | intraday | window
    hps_offers: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        expected = {"day_ahead": DAY_AHEAD_HOURS, "intraday": INTRADAY_HOURS,
                    "window": None}
        if self.stage not in expected:
            raise ValueError(f"unknown stage {self.stage!r}")
        want = expected[self.stage]
        if want is not None and self.snapshot.n_hours != want:
            raise ValueError(f"{self.stage} horizon must be {want} h, "
                             f"got {self.snapshot.n_hours}")
        if self.snapshot.n_hours < 1:
            raise ValueError("empty horizon")
        for hid, offer in self.hps_offers.items():
            if offer < 0:
                raise ValueError(f"offer for {hid} must be >= 0, got {offer}")


# ----------------------------------------------------------------------
# Reserve requirement rules
# ----------------------------------------------------------------------

EPIGRAPH_RULES = ("largest_online_infeed", "largest_committed_pmax")


def requirement_series(rule, snapshot: SystemSnapshot) -> np.ndarray | None:
    """Constant requirement per hour, or None when the rule is decision-coupled."""
    if rule.rule == "fraction_of_load":
        return rule.param_dict.get("fraction", 0.0) * snapshot.load
    if rule.rule == "fixed":
        return np.full(snapshot.n_hours, rule.param_dict.get("mw", 0.0))
    if rule.rule in EPIGRAPH_RULES:
        return None
    raise ValueError(f"unknown reserve rule {rule.rule!r}")


def primary_up_requirement(snapshot: SystemSnapshot,
                           schedule: DispatchSchedule) -> np.ndarray:
    """Evaluate the single-largest-infeed requirement for a candidate dispatch.

    Per hour, the larger of the biggest dispatched unit (thermal or hybrid)
    and the net wind injection of external farms.  Inside the MILP the same
    quantity is an epigraph variable so the requirement follows the dispatch
    decision.
    """
    t = schedule.n_hours
    req = np.zeros(t)
    for series in schedule.p.values():
        req = np.maximum(req, series)
    for series in schedule.hps_p.values():
        req = np.maximum(req, series)
    net_wind = snapshot.wind_available[:t] - schedule.wind_curtail
    return np.maximum(req, net_wind)


# ----------------------------------------------------------------------
# Model construction
# ----------------------------------------------------------------------

def _prior_transitions(history: tuple[int, ...]) -> tuple[list[int], list[int]]:
    """Start/stop flags aligned with an on/off history (state held flat before it)."""
    su, sd = [], []
    for k, st in enumerate(history):
        prev = history[k - 1] if k > 0 else history[0]
        su.append(1 if st == 1 and prev == 0 else 0)
        sd.append(1 if st == 0 and prev == 1 else 0)
    return su, sd


def _add_thermal(m: LinearModel, u, t_range, snapshot: SystemSnapshot,
                 up_kinds, dn_kinds) -> None:
    hist = snapshot.prior_commitment[u.id]
    prior_su, prior_sd = _prior_transitions(hist)
    prior_p = snapshot.prior_output[u.id]

    add_piecewise_cost(m, u, t_range)
    for t in t_range:
        su = m.add_binary(f"su.{u.id}.{t}")
        sd = m.add_binary(f"sd.{u.id}.{t}")
        m.add_objective(su, u.startup_cost)
        m.add_objective(sd, u.shutdown_cost)
        st = m.var(f"st.{u.id}.{t}")
        p = m.var(f"p.{u.id}.{t}")
        m.add_le({su: 1.0, sd: 1.0}, 1.0, name=f"ssx.{u.id}.{t}")
        if t == 0:
            m.add_eq({su: 1.0, sd: -1.0, st: -1.0}, -float(hist[-1]),
                     name=f"logic.{u.id}.{t}")
        else:
            st_prev = m.var(f"st.{u.id}.{t - 1}")
            m.add_eq({su: 1.0, sd: -1.0, st: -1.0, st_prev: 1.0}, 0.0,
                     name=f"logic.{u.id}.{t}")

        # ramping, with the shutdown term letting a stopping unit fall to zero
        if t == 0:
            m.add_le({p: 1.0, st: -u.ramp_up}, prior_p, name=f"rampup.{u.id}.{t}")
            m.add_le({p: -1.0, st: -u.ramp_down, sd: -u.p_max}, -prior_p,
                     name=f"rampdn.{u.id}.{t}")
        else:
            p_prev = m.var(f"p.{u.id}.{t - 1}")
            m.add_le({p: 1.0, p_prev: -1.0, st: -u.ramp_up}, 0.0,
                     name=f"rampup.{u.id}.{t}")
            m.add_le({p_prev: 1.0, p: -1.0, st: -u.ramp_down, sd: -u.p_max}, 0.0,
                     name=f"rampdn.{u.id}.{t}")

        # headroom / footroom shared with reserve provision
        cap = {p: 1.0, st: -u.p_max}
        for kind in up_kinds:
            cap[m.var(f"r.{u.id}.{kind}.{t}")] = 1.0
        m.add_le(cap, 0.0, name=f"cap.{u.id}.{t}")
        floor = {p: 1.0, st: -u.p_min}
        for kind in dn_kinds:
            floor[m.var(f"r.{u.id}.{kind}.{t}")] = -1.0
        m.add_ge(floor, 0.0, name=f"floor.{u.id}.{t}")

        # minimum run / stop windows, counting starts and stops before the horizon
        if u.min_up_time > 1:
            row = {}
            const = 0.0
            for k in range(t - u.min_up_time + 1, t + 1):
                if k >= 0:
                    row[m.var(f"su.{u.id}.{k}")] = 1.0
                elif len(prior_su) + k >= 0:
                    const += prior_su[len(prior_su) + k]
            row[st] = row.get(st, 0.0) - 1.0
            m.add_le(row, -const, name=f"minup.{u.id}.{t}")
        if u.min_down_time > 1:
            row = {}
            const = 0.0
            for k in range(t - u.min_down_time + 1, t + 1):
                if k >= 0:
                    row[m.var(f"sd.{u.id}.{k}")] = 1.0
                elif len(prior_sd) + k >= 0:
                    const += prior_sd[len(prior_sd) + k]
            row[st] = row.get(st, 0.0) + 1.0
            m.add_le(row, 1.0 - const, name=f"mindn.{u.id}.{t}")


def _add_bes(m: LinearModel, b, t_range, snapshot: SystemSnapshot,
             up_kinds, dn_kinds) -> None:
    sq = b.eff_sqrt
    prior = snapshot.prior_soc[b.id]
    for t in t_range:
        c = m.add_var(f"c.{b.id}.{t}", 0.0, b.p_charge_max)
        d = m.add_var(f"d.{b.id}.{t}", 0.0, b.p_discharge_max)
        soc = m.add_var(f"soc.{b.id}.{t}", b.e_min, b.e_max)
        stc = m.add_binary(f"stc.{b.id}.{t}")
        std = m.add_binary(f"std.{b.id}.{t}")
        m.add_le({c: 1.0, stc: -b.p_charge_max}, 0.0, name=f"cgate.{b.id}.{t}")
        m.add_le({d: 1.0, std: -b.p_discharge_max}, 0.0, name=f"dgate.{b.id}.{t}")
        m.add_le({stc: 1.0, std: 1.0}, 1.0, name=f"cdx.{b.id}.{t}")
        if t == 0:
            m.add_eq({soc: 1.0, c: -sq, d: 1.0 / sq}, prior, name=f"socrec.{b.id}.{t}")
        else:
            soc_prev = m.var(f"soc.{b.id}.{t - 1}")
            m.add_eq({soc: 1.0, soc_prev: -1.0, c: -sq, d: 1.0 / sq}, 0.0,
                     name=f"socrec.{b.id}.{t}")
        # upward capability counts halted charging; mirror for downward
        if up_kinds:
            row = {d: 1.0, c: -1.0}
            for kind in up_kinds:
                row[m.var(f"r.{b.id}.{kind}.{t}")] = 1.0
            m.add_le(row, b.p_discharge_max, name=f"rescap.{b.id}.{t}")
        if dn_kinds:
            row = {c: 1.0, d: -1.0}
            for kind in dn_kinds:
                row[m.var(f"r.{b.id}.{kind}.{t}")] = 1.0
            m.add_le(row, b.p_charge_max, name=f"resfloor.{b.id}.{t}")


def _add_hps(m: LinearModel, h, t_range, offer: float, grid_cost: float,
             up_kinds, dn_kinds) -> None:
    eff = h.roundtrip_eff
    for t in t_range:
        p = m.add_var(f"p.{h.id}.{t}", 0.0, h.p_max)
        on = m.add_binary(f"l.{h.id}.{t}")
        gr = m.add_var(f"pgr.{h.id}.{t}", 0.0, h.grid_absorb_max)
        av = m.add_var(f"eav.{h.id}.{t}", 0.0)
        m.add_objective(gr, grid_cost)

        # commitment window doubles as the reserve capability bound
        cap = {p: 1.0, on: -h.p_max}
        for kind in up_kinds:
            cap[m.var(f"r.{h.id}.{kind}.{t}")] = 1.0
        m.add_le(cap, 0.0, name=f"cap.{h.id}.{t}")
        floor = {p: 1.0, on: -h.p_min_component}
        for kind in dn_kinds:
            floor[m.var(f"r.{h.id}.{kind}.{t}")] = -1.0
        m.add_ge(floor, 0.0, name=f"floor.{h.id}.{t}")

        # no production and absorption at once
        m.add_le({gr: 1.0, on: h.grid_absorb_max}, h.grid_absorb_max,
                 name=f"grgate.{h.id}.{t}")

        # declining dispatchable-energy account seeded by the offer
        if t == 0:
            m.add_le({av: 1.0}, offer, name=f"avinit.{h.id}.{t}")
        else:
            av_prev = m.var(f"eav.{h.id}.{t - 1}")
            p_prev = m.var(f"p.{h.id}.{t - 1}")
            gr_prev = m.var(f"pgr.{h.id}.{t - 1}")
            m.add_le({av: 1.0, av_prev: -1.0, gr_prev: -eff, p_prev: 1.0}, 0.0,
                     name=f"avrec.{h.id}.{t}")
        m.add_le({p: 1.0, av: -1.0}, 0.0, name=f"avuse.{h.id}.{t}")

    # undispatched energy closes the offer account over the horizon
    xh = m.add_var(f"xh.{h.id}", 0.0)
    row = {xh: 1.0}
    for t in t_range:
        row[m.var(f"p.{h.id}.{t}")] = 1.0
        row[m.var(f"pgr.{h.id}.{t}")] = -eff
    m.add_eq(row, offer, name=f"offerbal.{h.id}")


def build_uced_model(problem: UcedProblem) -> LinearModel:
    """Assemble the full scheduling MILP for one stage."""
    snap = problem.snapshot
    t_range = range(snap.n_hours)
    m = LinearModel(name=f"uced-{problem.stage}", sense="min")

    rules = list(snap.reserve_rules)
    up_kinds = [r.kind for r in rules if r.direction == "up"]
    dn_kinds = [r.kind for r in rules if r.direction == "down"]
    providers = ([u.id for u in snap.thermal_units]
                 + [b.id for b in snap.bes_units]
                 + [h.id for h in snap.hps_plants])

    # reserve allocations come first so asset constraints can reference them
    for rule in rules:
        for aid in providers:
            for t in t_range:
                v = m.add_var(f"r.{aid}.{rule.kind}.{t}", 0.0)
                if rule.reserve_cost:
                    m.add_objective(v, rule.reserve_cost)

    for u in snap.thermal_units:
        _add_thermal(m, u, t_range, snap, up_kinds, dn_kinds)
    for b in snap.bes_units:
        _add_bes(m, b, t_range, snap, up_kinds, dn_kinds)
    for h in snap.hps_plants:
        offer = problem.hps_offers.get(h.id, 0.0)
        _add_hps(m, h, t_range, offer, snap.hps_grid_energy_cost, up_kinds, dn_kinds)

    # system balance and curtailment / lost-load slacks
    for t in t_range:
        xw = m.add_var(f"xw.{t}", 0.0, float(snap.wind_available[t]))
        ens = m.add_var(f"ens.{t}", 0.0)
        m.add_objective(ens, snap.ens_penalty)
        balance = {ens: 1.0, xw: -1.0}
        for u in snap.thermal_units:
            balance[m.var(f"p.{u.id}.{t}")] = 1.0
        for h in snap.hps_plants:
            balance[m.var(f"p.{h.id}.{t}")] = 1.0
            balance[m.var(f"pgr.{h.id}.{t}")] = -1.0
        for b in snap.bes_units:
            balance[m.var(f"d.{b.id}.{t}")] = 1.0
            balance[m.var(f"c.{b.id}.{t}")] = -1.0
        rhs = float(snap.load[t] - snap.wind_available[t] - snap.pv_available[t])
        m.add_eq(balance, rhs, name=f"balance.{t}")

    # reserve requirements, epigraph-coupled where the rule tracks the dispatch
    for rule in rules:
        const_req = requirement_series(rule, snap)
        for t in t_range:
            slack = m.add_var(f"xe.{rule.kind}.{t}", 0.0)
            m.add_objective(slack, rule.violation_penalty)
            fulfil = {slack: 1.0}
            for aid in providers:
                fulfil[m.var(f"r.{aid}.{rule.kind}.{t}")] = 1.0
            if const_req is not None:
                m.add_ge(fulfil, float(const_req[t]), name=f"rreq.{rule.kind}.{t}")
                continue
            rr = m.add_var(f"rr.{rule.kind}.{t}", 0.0)
            fulfil[rr] = -1.0
            m.add_ge(fulfil, 0.0, name=f"rreq.{rule.kind}.{t}")
            if rule.rule == "largest_online_infeed":
                for u in snap.thermal_units:
                    m.add_ge({rr: 1.0, m.var(f"p.{u.id}.{t}"): -1.0}, 0.0,
                             name=f"rrinf.{u.id}.{rule.kind}.{t}")
                for h in snap.hps_plants:
                    m.add_ge({rr: 1.0, m.var(f"p.{h.id}.{t}"): -1.0}, 0.0,
                             name=f"rrinf.{h.id}.{rule.kind}.{t}")
                m.add_ge({rr: 1.0, m.var(f"xw.{t}"): 1.0},
                         float(snap.wind_available[t]),
                         name=f"rrwind.{rule.kind}.{t}")
            elif rule.rule == "largest_committed_pmax":
                for u in snap.thermal_units:
                    m.add_ge({rr: 1.0, m.var(f"st.{u.id}.{t}"): -u.p_max}, 0.0,
                             name=f"rrcomm.{u.id}.{rule.kind}.{t}")
                for h in snap.hps_plants:
                    m.add_ge({rr: 1.0, m.var(f"l.{h.id}.{t}"): -h.p_max}, 0.0,
                             name=f"rrcomm.{h.id}.{rule.kind}.{t}")
    return m


# ----------------------------------------------------------------------
# Solve and extract
# ----------------------------------------------------------------------

def _series(values, pattern: str, t_count: int) -> np.ndarray:
    return np.array([values[pattern.format(t=t)] for t in range(t_count)])


def extract_schedule(problem: UcedProblem, values: dict[str, float],
                     status: str, objective: float, gap: float) -> DispatchSchedule:
    snap = problem.snapshot
    t_count = snap.n_hours
    sched = DispatchSchedule(stage=problem.stage, horizon=snap.horizon.copy(),
                             status=status, objective=objective, gap=gap)

    fuel = np.zeros(t_count)
    startup = np.zeros(t_count)
    shutdown = np.zeros(t_count)
    for u in snap.thermal_units:
        sched.p[u.id] = _series(values, f"p.{u.id}.{{t}}", t_count)
        sched.st[u.id] = _series(values, f"st.{u.id}.{{t}}", t_count)
        sched.su[u.id] = _series(values, f"su.{u.id}.{{t}}", t_count)
        sched.sd[u.id] = _series(values, f"sd.{u.id}.{{t}}", t_count)
        fuel += u.cost_at_pmin * sched.st[u.id]
        for b, (_, marginal) in enumerate(u.cost_blocks):
            fuel += marginal * _series(values, f"dp.{u.id}.{{t}}.{b}", t_count)
        startup += u.startup_cost * sched.su[u.id]
        shutdown += u.shutdown_cost * sched.sd[u.id]

    for b in snap.bes_units:
        sched.charge[b.id] = _series(values, f"c.{b.id}.{{t}}", t_count)
        sched.discharge[b.id] = _series(values, f"d.{b.id}.{{t}}", t_count)
        sched.soc[b.id] = _series(values, f"soc.{b.id}.{{t}}", t_count)

    hps_grid = np.zeros(t_count)
    for h in snap.hps_plants:
        sched.hps_p[h.id] = _series(values, f"p.{h.id}.{{t}}", t_count)
        sched.hps_gr[h.id] = _series(values, f"pgr.{h.id}.{{t}}", t_count)
        sched.hps_on[h.id] = _series(values, f"l.{h.id}.{{t}}", t_count)
        sched.hps_undispatched[h.id] = values[f"xh.{h.id}"]
        hps_grid += snap.hps_grid_energy_cost * sched.hps_gr[h.id]

    sched.wind_curtail = _series(values, "xw.{t}", t_count)
    sched.ens = _series(values, "ens.{t}", t_count)

    reserve_cost = np.zeros(t_count)
    slack = snap.ens_penalty * sched.ens
    providers = ([u.id for u in snap.thermal_units]
                 + [b.id for b in snap.bes_units]
                 + [h.id for h in snap.hps_plants])
    for rule in snap.reserve_rules:
        sched.reserve[rule.kind] = {
            aid: _series(values, f"r.{aid}.{rule.kind}.{{t}}", t_count)
            for aid in providers
        }
        const_req = requirement_series(rule, snap)
        if const_req is not None:
            sched.reserve_req[rule.kind] = const_req.copy()
        else:
            sched.reserve_req[rule.kind] = _series(values, f"rr.{rule.kind}.{{t}}", t_count)
        sched.reserve_slack[rule.kind] = _series(values, f"xe.{rule.kind}.{{t}}", t_count)
        slack += rule.violation_penalty * sched.reserve_slack[rule.kind]
        for r_series in sched.reserve[rule.kind].values():
            reserve_cost += rule.reserve_cost * r_series

    sched.cost_fuel = fuel
    sched.cost_startup = startup
    sched.cost_shutdown = shutdown
    sched.cost_reserve = reserve_cost
    sched.cost_hps_grid = hps_grid
    sched.cost_slack = slack
    return sched


def solve_uced(problem: UcedProblem, gap: float = 1e-4, time_limit: float = 60.0,
               dump_lp: str | None = None) -> DispatchSchedule:
    """Build and solve one scheduling stage; raises ScheduleError when unusable."""
    model = build_uced_model(problem)
    if dump_lp:
        write_lp(model, dump_lp)
    sol = solve(model, gap_tolerance=gap, time_limit=time_limit)
    if not sol.ok:
        raise ScheduleError(f"{problem.stage} schedule {sol.status}: {sol.message}",
                            status=sol.status)
    return extract_schedule(problem, sol.values, sol.status, sol.objective, sol.gap)
