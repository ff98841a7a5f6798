"""Builders for micro systems used across the test modules."""

from __future__ import annotations

import numpy as np

from islandsim.domain import BesUnit, HpsPlant, ReserveRule, SystemSnapshot, ThermalUnit


def make_unit(uid: str, p_min: float, p_max: float, marginals, *, su=0.0, sd=0.0,
              ramp_up=None, ramp_down=None, min_up=1, min_down=1,
              cost_at_pmin=None) -> ThermalUnit:
    span = p_max - p_min
    widths = [span / len(marginals)] * len(marginals)
    return ThermalUnit(
        id=uid, p_min=p_min, p_max=p_max,
        cost_at_pmin=cost_at_pmin if cost_at_pmin is not None else p_min * marginals[0],
        cost_blocks=tuple(zip(widths, marginals)),
        startup_cost=su, shutdown_cost=sd,
        ramp_up=ramp_up if ramp_up is not None else p_max,
        ramp_down=ramp_down if ramp_down is not None else p_max,
        min_up_time=min_up, min_down_time=min_down,
    )


def make_bes(bid: str = "B1", power: float = 10.0, energy: float = 20.0,
             eff: float = 0.8, soc0: float | None = None, e_min: float = 0.0) -> BesUnit:
    return BesUnit(id=bid, p_charge_max=power, p_discharge_max=power,
                   e_min=e_min, e_max=energy, roundtrip_eff=eff,
                   initial_soc=soc0 if soc0 is not None else 0.5 * energy)


def make_hps(hid: str = "H1", p_max: float = 20.0, power: float = 15.0,
             energy: float = 60.0, eff: float = 0.8, soc0: float | None = None,
             prices=(100.0, 50.0, 150.0), absorb: float | None = None) -> HpsPlant:
    return HpsPlant(
        id=hid, p_max=p_max, p_min_component=1.0,
        grid_absorb_max=absorb if absorb is not None else power,
        roundtrip_eff=eff,
        storage=make_bes(f"{hid}.store", power, energy, eff, soc0),
        wind_capacity=p_max * 2, offer_coefficients=(0.6, 0.5, 0.4),
        market_prices=prices,
    )


def make_snapshot(units, load, *, bes=(), hps=(), wind=None, pv=None,
                  hps_res=None, prior_st=None, prior_out=None, prior_soc=None,
                  reserves=(), ens_penalty=10_000.0, grid_cost=50.0,
                  start_hour=0) -> SystemSnapshot:
    load = np.asarray(load, dtype=float)
    t = len(load)
    zeros = np.zeros(t)
    lookback = max([max(u.min_up_time, u.min_down_time) for u in units] + [1])
    return SystemSnapshot(
        horizon=np.arange(start_hour, start_hour + t),
        load=load,
        wind_available=np.asarray(wind, dtype=float) if wind is not None else zeros,
        pv_available=np.asarray(pv, dtype=float) if pv is not None else zeros,
        hps_res_available={h.id: (np.asarray(hps_res, dtype=float)
                                  if hps_res is not None else zeros) for h in hps},
        thermal_units=tuple(units),
        bes_units=tuple(bes),
        hps_plants=tuple(hps),
        prior_commitment=(prior_st if prior_st is not None
                          else {u.id: (0,) * lookback for u in units}),
        prior_output=(prior_out if prior_out is not None
                      else {u.id: 0.0 for u in units}),
        prior_soc=(prior_soc if prior_soc is not None
                   else {b.id: b.initial_soc for b in bes}),
        ens_penalty=ens_penalty,
        hps_grid_energy_cost=grid_cost,
        reserve_rules=tuple(reserves),
    )


def random_micro_system(rng: np.random.Generator, horizon: int = 4):
    """2 thermal units + 1 battery, loads high enough that no commitment
    forces renewable-free surplus (keeps the oracle's battery relaxation exact)."""
    units = []
    for k in range(2):
        p_min = float(rng.uniform(5, 15))
        p_max = p_min + float(rng.uniform(20, 40))
        g0 = float(rng.uniform(80, 150))
        g1 = g0 + float(rng.uniform(5, 60))
        ramp = float(p_min + rng.uniform(0.3, 1.0) * (p_max - p_min))
        units.append(make_unit(
            f"G{k + 1}", p_min, p_max, [g0, g1],
            su=float(rng.uniform(0, 2000)), sd=float(rng.uniform(0, 300)),
            ramp_up=ramp, ramp_down=ramp,
            min_up=int(rng.integers(1, 3)), min_down=int(rng.integers(1, 3)),
            cost_at_pmin=float(p_min * rng.uniform(60, 120)),
        ))
    bes = make_bes("B1", power=float(rng.uniform(3, 10)),
                   energy=float(rng.uniform(5, 20)), eff=0.8)
    floor = sum(u.p_min for u in units)
    cap = sum(u.p_max for u in units)
    load = rng.uniform(floor, 0.9 * cap, size=horizon)
    snap = make_snapshot(units, load, bes=(bes,))
    return units, bes, snap


def reserve_rule(kind: str, rule: str, penalty: float = 500.0, cost: float = 0.0,
                 **params) -> ReserveRule:
    return ReserveRule(kind=kind, rule=rule, params=tuple(sorted(params.items())),
                       reserve_cost=cost, violation_penalty=penalty)
