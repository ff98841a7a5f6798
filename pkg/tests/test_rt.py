"""Real-time dispatch tests: plan tracking, storage floor, station fixing."""

import numpy as np
import pytest

from islandsim.rt import RtProblem, solve_rt
from islandsim.uced import UcedProblem, solve_uced
from util import make_bes, make_hps, make_snapshot, make_unit, reserve_rule


def _plan_system():
    units = [make_unit("G1", 10, 60, [100, 120], su=500.0),
             make_unit("G2", 10, 50, [150, 170], su=800.0)]
    bes = make_bes("B1", 10, 30, eff=0.8)
    load = np.array([55, 60, 72, 66] * 6, dtype=float)
    wind = np.array([10, 5, 0, 8] * 6, dtype=float)
    snap = make_snapshot(units, load, bes=(bes,), wind=wind)
    plan = solve_uced(UcedProblem(snap, "day_ahead"), gap=1e-9)
    return units, bes, snap, plan


def _rt_problem_from_plan(units, bes, snap, plan, k, prev_soc=None,
                          prev_out=None, rules=()):
    commitment = {u.id: int(round(plan.st[u.id][k])) for u in units}
    stopped = {}
    for u in units:
        prev = snap.prior_commitment[u.id][-1] if k == 0 else int(round(plan.st[u.id][k - 1]))
        stopped[u.id] = 1 if commitment[u.id] == 0 and prev == 1 else 0
    if prev_out is None:
        prev_out = ({u.id: snap.prior_output[u.id] for u in units} if k == 0
                    else {u.id: float(plan.p[u.id][k - 1]) for u in units})
    if prev_soc is None:
        prev_soc = ({bes.id: snap.prior_soc[bes.id]} if k == 0
                    else {bes.id: float(plan.soc[bes.id][k - 1])})
    return RtProblem(
        hour=int(snap.horizon[k]), load=float(snap.load[k]),
        wind_available=float(snap.wind_available[k]),
        pv_available=float(snap.pv_available[k]),
        thermal_units=tuple(units), commitment=commitment, stopped=stopped,
        prev_output=prev_out, bes_units=(bes,), prev_soc=prev_soc,
        soc_floor={bes.id: float(plan.soc[bes.id][k])},
        ens_penalty=snap.ens_penalty,
        hps_grid_energy_cost=snap.hps_grid_energy_cost,
        reserve_rules=rules,
    )


def test_rt_reproduces_plan_hour_when_actuals_match():
    units, bes, snap, plan = _plan_system()
    for k in (0, 1, 5, 11):
        rt = solve_rt(_rt_problem_from_plan(units, bes, snap, plan, k), gap=1e-9)
        for u in units:
            assert rt.p[u.id][0] == pytest.approx(plan.p[u.id][k], abs=1e-6)
        assert rt.soc[bes.id][0] == pytest.approx(plan.soc[bes.id][k], abs=1e-6)
        assert rt.wind_curtail[0] == pytest.approx(plan.wind_curtail[k], abs=1e-6)
        assert rt.ens[0] == pytest.approx(plan.ens[k], abs=1e-6)


def test_rt_soc_never_below_reference():
    units, bes, snap, plan = _plan_system()
    rng = np.random.default_rng(4)
    for k in range(12):
        problem = _rt_problem_from_plan(units, bes, snap, plan, k)
        # surplus wind beyond the forecast tempts extra charging, deficits
        # tempt dipping into the battery
        jitter = float(rng.uniform(-6, 6))
        problem = RtProblem(**{**problem.__dict__,
                               "wind_available": max(0.0, problem.wind_available + jitter)})
        rt = solve_rt(problem, gap=1e-9)
        assert rt.soc[bes.id][0] >= plan.soc[bes.id][k] - 1e-6


def test_rt_surplus_absorbed_by_battery_before_curtailment():
    unit = make_unit("G1", 20, 60, [100.0])
    bes = make_bes("B1", 10, 40, soc0=10.0)
    problem = RtProblem(
        hour=0, load=30.0, wind_available=25.0, pv_available=0.0,
        thermal_units=(unit,), commitment={"G1": 1}, stopped={"G1": 0},
        prev_output={"G1": 25.0}, bes_units=(bes,), prev_soc={"B1": 10.0},
        soc_floor={"B1": 10.0},
    )
    rt = solve_rt(problem, gap=1e-9)
    # unit pinned at its 20 MW minimum leaves 15 MW of wind surplus: the
    # battery absorbs its 10 MW charging limit, the remainder is curtailed
    assert rt.p["G1"][0] == pytest.approx(20.0, abs=1e-6)
    assert rt.charge["B1"][0] == pytest.approx(10.0, abs=1e-6)
    assert rt.wind_curtail[0] == pytest.approx(5.0, abs=1e-6)
    assert rt.ens[0] == pytest.approx(0.0, abs=1e-6)


def test_rt_unit_trip_covered_by_battery_then_lost_load():
    unit = make_unit("G1", 10, 60, [100.0])
    bes = make_bes("B1", 10, 40, soc0=20.0)
    problem = RtProblem(
        hour=0, load=18.0, wind_available=0.0, pv_available=0.0,
        thermal_units=(unit,), commitment={"G1": 0}, stopped={"G1": 1},
        prev_output={"G1": 18.0}, bes_units=(bes,), prev_soc={"B1": 20.0},
        soc_floor={"B1": 0.0},
    )
    rt = solve_rt(problem, gap=1e-9)
    assert rt.p["G1"][0] == pytest.approx(0.0, abs=1e-9)
    assert rt.discharge["B1"][0] == pytest.approx(10.0, abs=1e-6)
    assert rt.ens[0] == pytest.approx(8.0, abs=1e-6)


def test_released_reserves_cannot_increase_curtailment():
    units = [make_unit("G1", 10, 50, [100.0]), make_unit("G2", 10, 40, [130.0])]
    rules = (reserve_rule("primary_up", "largest_online_infeed"),
             reserve_rule("secondary_up", "fraction_of_load", fraction=0.3),
             reserve_rule("tertiary_up", "largest_committed_pmax"))
    wind = [30.0] * 24
    snap = make_snapshot(units, [45.0] * 24, wind=wind, reserves=rules)
    plan = solve_uced(UcedProblem(snap, "day_ahead"), gap=1e-9)
    for k in (0, 3, 7):
        commitment = {u.id: int(round(plan.st[u.id][k])) for u in units}
        prev_out = ({u.id: 0.0 for u in units} if k == 0
                    else {u.id: float(plan.p[u.id][k - 1]) for u in units})
        base = dict(
            hour=k, load=45.0, wind_available=30.0, pv_available=0.0,
            thermal_units=tuple(units), commitment=commitment,
            stopped={u.id: 0 for u in units}, prev_output=prev_out,
        )
        released = solve_rt(RtProblem(**base, reserve_rules=rules[:1]), gap=1e-9)
        assert released.wind_curtail[0] <= plan.wind_curtail[k] + 1e-6


def test_rt_hps_energy_budget_enforced():
    unit = make_unit("G1", 10, 80, [150.0])
    hps = make_hps("H1", p_max=20.0, power=15.0, energy=60.0)
    problem = RtProblem(
        hour=0, load=60.0, wind_available=0.0, pv_available=0.0,
        thermal_units=(unit,), commitment={"G1": 1}, stopped={"G1": 0},
        prev_output={"G1": 60.0}, hps_plants=(hps,),
        hps_available_energy={"H1": 7.5},
    )
    rt = solve_rt(problem, gap=1e-9)
    assert rt.hps_p["H1"][0] == pytest.approx(7.5, abs=1e-6)   # cheap energy, capped
    assert rt.p["G1"][0] == pytest.approx(52.5, abs=1e-6)


def test_rt_fixed_station_rebalanced_by_units():
    unit = make_unit("G1", 10, 80, [150.0])
    hps = make_hps("H1", p_max=20.0)
    base = dict(
        hour=0, load=60.0, wind_available=0.0, pv_available=0.0,
        thermal_units=(unit,), commitment={"G1": 1}, stopped={"G1": 0},
        prev_output={"G1": 50.0}, hps_plants=(hps,),
        hps_available_energy={"H1": 15.0},
    )
    first = solve_rt(RtProblem(**base), gap=1e-9)
    assert first.hps_p["H1"][0] == pytest.approx(15.0, abs=1e-6)
    # station actually delivered only 11 MW: conventional picks up the slack
    second = solve_rt(RtProblem(**base, hps_fixed={"H1": (11.0, 0.0)}), gap=1e-9)
    assert second.hps_p["H1"][0] == pytest.approx(11.0)
    assert second.p["G1"][0] == pytest.approx(49.0, abs=1e-6)
    assert second.ens[0] == pytest.approx(0.0, abs=1e-9)


def test_rt_infeasible_commitment_errors():
    unit = make_unit("G1", 10, 60, [100.0])
    problem = RtProblem(
        hour=0, load=200.0, wind_available=0.0, pv_available=0.0,
        thermal_units=(unit,), commitment={"G1": 1}, stopped={"G1": 0},
        prev_output={"G1": 0.0}, ens_penalty=10_000.0,
    )
    rt = solve_rt(problem, gap=1e-9)   # lost load absorbs the gap, no error
    assert rt.ens[0] == pytest.approx(200.0 - 60.0, abs=1e-5)


def test_rt_balance_residual_zero():
    units, bes, snap, plan = _plan_system()
    rt = solve_rt(_rt_problem_from_plan(units, bes, snap, plan, 2), gap=1e-9)
    produced = sum(rt.p[u.id][0] for u in units) + rt.discharge[bes.id][0]
    produced += snap.wind_available[2] - rt.wind_curtail[0] + rt.ens[0]
    consumed = snap.load[2] + rt.charge[bes.id][0]
    assert produced - consumed == pytest.approx(0.0, abs=1e-6)
