"""Bundled synthetic study systems.

The default island mirrors the study-case aggregates (210 MW peak, 46% load
factor, 55 MW wind + 36 MW PV with good capacity factors) over an invented
18-unit oil-fired fleet spanning 5-30 MW with convex cost blocks.  The fleet
is representative, not any real island's data.  A reduced 3-unit variant
trades fidelity for speed and backs the test and acceptance suites.

Unit ramp rates are kept at or above the minimum loading so a unit can reach
stable output within its first online hour, which the ramp formulation
requires for start-ups.
"""

from __future__ import annotations


def _unit(uid: str, p_max: float, p_min: float, g0: float, g1: float,
          ramp: float, minup: int, mindn: int, su: float, sd: float) -> dict:
    span = p_max - p_min
    w0 = round(span * 0.55, 3)
    w1 = round(span - w0, 3)
    return {
        "id": uid, "p_min": p_min, "p_max": p_max,
        "cost_at_pmin": round(p_min * (g0 - 10.0), 2),
        "cost_blocks": [[w0, g0], [w1, g1]],
        "startup_cost": su, "shutdown_cost": sd,
        "ramp_up": ramp, "ramp_down": ramp,
        "min_up_time": minup, "min_down_time": mindn,
    }


def default_fleet() -> list[dict]:
    """18 units, 5-30 MW, merit-ordered convex marginal costs."""
    fleet = []
    classes = [
        # count, p_max, p_min, g0, spread, ramp, minup, mindn, su, sd
        (4, 30.0, 12.0, 126.0, 16.0, 24.0, 4, 4, 2600.0, 160.0),
        (4, 25.0, 10.0, 134.0, 16.0, 20.0, 3, 3, 2000.0, 130.0),
        (4, 15.0, 6.0, 146.0, 15.0, 13.0, 2, 2, 1000.0, 80.0),
        (3, 10.0, 4.0, 158.0, 14.0, 9.0, 1, 1, 550.0, 50.0),
        (3, 5.0, 2.0, 172.0, 14.0, 4.5, 1, 1, 280.0, 30.0),
    ]
    n = 0
    for count, p_max, p_min, g0, spread, ramp, minup, mindn, su, sd in classes:
        for j in range(count):
            n += 1
            base = g0 + 2.0 * j
            fleet.append(_unit(f"T{n:02d}", p_max, p_min, base, base + spread,
                               ramp, minup, mindn, su + 60.0 * j, sd))
    return fleet


def reduced_fleet() -> list[dict]:
    """Three large units for fast annual runs."""
    return [
        _unit("U1", 100.0, 20.0, 128.0, 146.0, 60.0, 3, 3, 4200.0, 210.0),
        _unit("U2", 85.0, 16.0, 138.0, 156.0, 55.0, 2, 2, 3100.0, 160.0),
        _unit("U3", 70.0, 13.0, 150.0, 170.0, 48.0, 1, 1, 1600.0, 110.0),
    ]


def _reserves(include_tertiary: bool) -> list[dict]:
    rules = [
        {"kind": "primary_up", "rule": "largest_online_infeed", "params": {},
         "reserve_cost": 0.0, "violation_penalty": 500.0},
        {"kind": "secondary_up", "rule": "fraction_of_load",
         "params": {"fraction": 0.10}, "reserve_cost": 0.0, "violation_penalty": 500.0},
        {"kind": "secondary_down", "rule": "fraction_of_load",
         "params": {"fraction": 0.05}, "reserve_cost": 0.0, "violation_penalty": 500.0},
    ]
    if include_tertiary:
        rules.insert(2, {"kind": "tertiary_up", "rule": "largest_committed_pmax",
                         "params": {}, "reserve_cost": 0.0, "violation_penalty": 500.0})
    return rules


def _series_block(peak: float = 210.0, wind_existing_mw: float = 55.0,
                  pv_mw: float = 36.0) -> dict:
    return {
        "load": {"kind": "load", "peak_mw": peak, "load_factor": 0.46, "seed": 11},
        "wind_existing": {"kind": "wind", "capacity_factor": 0.40, "seed": 12,
                          "capacity_mw": wind_existing_mw},
        "wind_new": {"kind": "wind", "capacity_factor": 0.40, "seed": 13},
        "pv": {"kind": "pv", "capacity_factor": 0.21, "seed": 14,
               "capacity_mw": pv_mw},
    }


def _common(system: dict) -> dict:
    return {
        "system": system,
        "economics": {},          # EconomicParams defaults
        "solver": {"gap": 1.0e-4, "time_limit": 60.0},
        "sweep": {"new_wind_mw": 75.0, "include_base": True},
    }


def default_island_config() -> dict:
    """Full-size study system: 18 units, published aggregates, paper sweep grids."""
    system = {
        "name": "island-default",
        "thermal_units": default_fleet(),
        "series": _series_block(),
        "reserves": _reserves(include_tertiary=True),
        "penalties": {"ens": 10_000.0, "hps_grid_energy_cost": 50.0},
        "rt_released": ["secondary", "tertiary"],
        "bes_template": {"roundtrip_eff": 0.8, "soc_init_frac": 0.5, "e_min_frac": 0.0},
        "hps_template": {"p_min_component": 1.0, "roundtrip_eff": 0.8,
                         "soc_init_frac": 0.5, "grid_absorb_ratio": 1.0,
                         "offer_coefficients": [0.6, 0.5, 0.4],
                         "market_prices": [100.0, 50.0, 150.0]},
    }
    return _common(system)


def reduced_island_config() -> dict:
    """Fast 3-unit variant of the study system, same series and scale.

    A committed-largest-unit tertiary rule is overwhelming for a 3-unit
    fleet (the 100 MW unit would demand its own capacity in reserve around
    the clock), so the reduced system only carries primary and secondary
    products.
    """
    system = {
        "name": "island-reduced",
        "thermal_units": reduced_fleet(),
        "series": _series_block(),
        "reserves": _reserves(include_tertiary=False),
        "penalties": {"ens": 10_000.0, "hps_grid_energy_cost": 50.0},
        "rt_released": ["secondary", "tertiary"],
        "bes_template": {"roundtrip_eff": 0.8, "soc_init_frac": 0.5, "e_min_frac": 0.0},
        "hps_template": {"p_min_component": 1.0, "roundtrip_eff": 0.8,
                         "soc_init_frac": 0.5, "grid_absorb_ratio": 1.0,
                         "offer_coefficients": [0.6, 0.5, 0.4],
                         "market_prices": [100.0, 50.0, 150.0]},
    }
    return _common(system)


BUILTIN_CONFIGS = {
    "default": default_island_config,
    "reduced": reduced_island_config,
}
