"""Domain type invariants, validation and serialization round-trips."""

import numpy as np
import pytest
import yaml

from islandsim.domain import (BesUnit, HpsPlant, ReserveRule, Scenario,
                              ThermalUnit, validate_schedule, validate_system)
from islandsim.config import canonical_yaml
from islandsim.uced import UcedProblem, solve_uced
from util import make_bes, make_hps, make_snapshot, make_unit


def test_validate_flags_pmin_above_pmax():
    bad = ThermalUnit(id="X1", p_min=30.0, p_max=20.0, cost_at_pmin=100.0,
                      cost_blocks=((-10.0, 100.0),), startup_cost=0.0,
                      shutdown_cost=0.0, ramp_up=10.0, ramp_down=10.0,
                      min_up_time=1, min_down_time=1)
    snap = make_snapshot([bad], [10.0] * 4,
                         prior_st={"X1": (0,)}, prior_out={"X1": 0.0})
    violations = validate_system(snap)
    assert any(v.asset == "X1" and "p_min" in v.field for v in violations)


def test_validate_consistent_system_is_clean():
    units = [make_unit("G1", 10, 40, [100, 120]), make_unit("G2", 8, 30, [110, 130])]
    snap = make_snapshot(units, [25.0] * 6, bes=(make_bes(),), hps=(make_hps(),))
    assert validate_system(snap) == []


def test_validate_series_length_mismatch():
    units = [make_unit("G1", 10, 40, [100, 120])]
    snap = make_snapshot(units, [25.0] * 24, wind=[0.0] * 23)
    violations = validate_system(snap)
    assert any(v.rule == "series length mismatch" for v in violations)


def test_validate_nonconvex_blocks():
    bad = make_unit("G1", 10, 40, [150, 120])
    snap = make_snapshot([bad], [20.0] * 4)
    assert any("non-decreasing" in v.message for v in validate_system(snap))


def test_validate_prior_history_coverage():
    unit = make_unit("G1", 10, 40, [100, 110], min_up=4, min_down=2)
    snap = make_snapshot([unit], [20.0] * 4, prior_st={"G1": (1, 1)},
                         prior_out={"G1": 20.0})
    violations = validate_system(snap)
    assert any("history covers" in v.rule for v in violations)


def test_validate_reserve_penalty_ordering():
    from util import reserve_rule
    unit = make_unit("G1", 10, 40, [100, 110])
    rule = reserve_rule("primary_up", "fraction_of_load", penalty=20_000.0,
                        fraction=0.1)
    snap = make_snapshot([unit], [20.0] * 4, reserves=(rule,))
    violations = validate_system(snap)
    assert any("lost-load" in v.rule for v in violations)


def test_bes_invariants():
    with_bad_soc = BesUnit("B1", 10, 10, 0.0, 20.0, 0.8, initial_soc=25.0)
    snap = make_snapshot([make_unit("G1", 10, 40, [100, 110])], [20.0] * 4,
                         bes=(with_bad_soc,))
    assert any(v.field == "initial_soc" for v in validate_system(snap))


def test_hps_price_ordering_flagged():
    hps = make_hps(prices=(100.0, 80.0, 50.0))   # imbalance below purchase
    snap = make_snapshot([make_unit("G1", 10, 40, [100, 110])], [20.0] * 4,
                         hps=(hps,))
    assert any(v.field == "market_prices" for v in validate_system(snap))


# ----------------------------------------------------------------------
# serialization round-trips
# ----------------------------------------------------------------------

def _roundtrip(obj, cls):
    doc = canonical_yaml(obj.to_dict())
    back = cls.from_dict(yaml.safe_load(doc))
    assert back == obj
    assert canonical_yaml(back.to_dict()) == doc


def test_roundtrip_thermal_unit():
    _roundtrip(make_unit("G1", 7.5, 33.25, [101.25, 127.5], su=1234.5, sd=67.8,
                         min_up=3, min_down=2), ThermalUnit)


def test_roundtrip_bes():
    _roundtrip(make_bes("B9", 12.5, 47.25, 0.8, soc0=11.125), BesUnit)


def test_roundtrip_hps():
    _roundtrip(make_hps("H7", 22.5, 17.5, 61.25), HpsPlant)


def test_roundtrip_reserve_rule():
    _roundtrip(ReserveRule("secondary_up", "fraction_of_load",
                           params=(("fraction", 0.1),), reserve_cost=1.5,
                           violation_penalty=400.0), ReserveRule)


def test_scenario_energy_identity():
    s = Scenario("central", 75.0, 30.0, 8.0)
    assert s.bes_energy_mwh == pytest.approx(240.0)
    assert s.flag == "1"
    assert s.id == "central_p30_h8"
    assert Scenario("self", 75.0, 40.0, 6.0).flag == "2"


# ----------------------------------------------------------------------
# schedule audit
# ----------------------------------------------------------------------

def test_solved_schedule_passes_audit_and_balance_recomputes():
    units = [make_unit("G1", 10, 50, [100, 120]), make_unit("G2", 10, 50, [150, 170])]
    bes = make_bes("B1", 8, 16)
    snap = make_snapshot(units, [60, 55, 70, 62] * 6, bes=(bes,))
    sched = solve_uced(UcedProblem(snap, "day_ahead"))
    assert validate_schedule(snap, sched) == []
    assert np.abs(sched.balance_residual(snap)).max() < 1e-6


def test_audit_catches_corrupted_schedule():
    units = [make_unit("G1", 10, 50, [100, 120])]
    snap = make_snapshot(units, [30.0] * 24)
    sched = solve_uced(UcedProblem(snap, "day_ahead"))
    sched.p["G1"] = sched.p["G1"] + 1.0   # break the balance
    violations = validate_schedule(snap, sched)
    assert any(v.field == "balance" for v in violations)
