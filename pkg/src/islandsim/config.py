"""YAML configuration loading and the assembled runtime system bundle.

A study is described by two human-editable documents: a system file (fleet,
series, reserve rules, penalties, storage/station templates) and a sweep file
(scenario grids plus economics and solver settings).  Both may also live
under ``system:`` / ``sweep:`` keys of a single file.  Series are either
ingested from CSV or synthesized from targets and a seed, so a config fully
determines a run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .domain import (BesUnit, HpsPlant, ReserveRule, Scenario, ThermalUnit,
                     scenario_id)
from .economics import EconomicParams
from .series import HourlySeries, ingest_csv, synthesize


@dataclass(frozen=True)
class SolverSettings:
    gap: float = 1e-4
    time_limit: float = 60.0          # seconds per problem

    def to_dict(self) -> dict:
        return {"gap": self.gap, "time_limit": self.time_limit}


@dataclass(frozen=True)
class StorageTemplate:
    """How scenario-created batteries are parameterized."""

    roundtrip_eff: float = 0.8
    soc_init_frac: float = 0.5        # of e_max
    e_min_frac: float = 0.0


@dataclass(frozen=True)
class HpsTemplate:
    """How scenario-created hybrid stations are parameterized."""

    p_min_component: float = 1.0      # MW
    roundtrip_eff: float = 0.8
    soc_init_frac: float = 0.5
    e_min_frac: float = 0.0
    grid_absorb_ratio: float = 1.0    # of station power
    offer_coefficients: tuple[float, float, float] = (0.6, 0.5, 0.4)
    market_prices: tuple[float, float, float] = (100.0, 50.0, 150.0)


@dataclass(frozen=True)
class IslandSystem:
    """Everything scenario runs share: fleet, series, rules and templates."""

    name: str
    thermal_units: tuple[ThermalUnit, ...]
    load: HourlySeries
    wind_existing: HourlySeries       # MW of installed external wind
    wind_new_profile: HourlySeries    # per-MW profile for scenario wind
    pv: HourlySeries
    reserve_rules: tuple[ReserveRule, ...]
    ens_penalty: float = 10_000.0
    hps_grid_energy_cost: float = 50.0
    rt_released: tuple[str, ...] = ("secondary", "tertiary")
    bes_template: StorageTemplate = field(default_factory=StorageTemplate)
    hps_template: HpsTemplate = field(default_factory=HpsTemplate)

    def bes_for(self, scenario: Scenario) -> BesUnit | None:
        if scenario.concept != "central" or scenario.bes_power_mw <= 0:
            return None
        t = self.bes_template
        e_max = scenario.bes_energy_mwh
        return BesUnit(id="BES1", p_charge_max=scenario.bes_power_mw,
                       p_discharge_max=scenario.bes_power_mw,
                       e_min=t.e_min_frac * e_max, e_max=e_max,
                       roundtrip_eff=t.roundtrip_eff,
                       initial_soc=t.soc_init_frac * e_max)

    def hps_for(self, scenario: Scenario) -> HpsPlant | None:
        if scenario.concept != "self":
            return None
        t = self.hps_template
        e_max = scenario.bes_energy_mwh
        storage = BesUnit(id="HPS1.store", p_charge_max=scenario.bes_power_mw,
                          p_discharge_max=scenario.bes_power_mw,
                          e_min=t.e_min_frac * e_max, e_max=e_max,
                          roundtrip_eff=t.roundtrip_eff,
                          initial_soc=t.soc_init_frac * e_max)
        return HpsPlant(id="HPS1", p_max=scenario.bes_power_mw,
                        p_min_component=t.p_min_component,
                        grid_absorb_max=t.grid_absorb_ratio * scenario.bes_power_mw,
                        roundtrip_eff=t.roundtrip_eff, storage=storage,
                        wind_capacity=scenario.new_wind_mw,
                        offer_coefficients=t.offer_coefficients,
                        market_prices=t.market_prices)

    def wind_layout(self, scenario: Scenario):
        """(existing MW series, new-wind MW series, station RES MW series)."""
        existing = self.wind_existing.values
        new = self.wind_new_profile.values * scenario.new_wind_mw
        zero = np.zeros_like(existing)
        if scenario.concept == "central":
            return existing, new, zero
        if scenario.concept == "self":
            return existing, zero, new
        return existing, zero, zero


@dataclass(frozen=True)
class SweepPlan:
    """The scenario grid of one study, base case included when requested."""

    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        ids = [s.id for s in self.scenarios]
        dupes = {x for x in ids if ids.count(x) > 1}
        if dupes:
            raise ValueError(f"duplicate scenario ids: {sorted(dupes)}")

    def by_id(self, sid: str) -> Scenario:
        for s in self.scenarios:
            if s.id == sid:
                return s
        raise KeyError(sid)


def paper_grids(new_wind_mw: float = 75.0,
                central_powers=None, central_hours=None,
                self_powers=None, self_hours=None,
                include_base: bool = True,
                economic_params: EconomicParams | None = None) -> SweepPlan:
    """The study sweep: central 7.5..75 MW x {1,2.5,5,7.5,10} h,
    self-dispatch 30..70 MW x 6..15 h, plus the no-new-assets base case."""
    central_powers = central_powers if central_powers is not None else \
        [7.5 * k for k in range(1, 11)]
    central_hours = central_hours if central_hours is not None else [1.0, 2.5, 5.0, 7.5, 10.0]
    self_powers = self_powers if self_powers is not None else [30.0, 40.0, 50.0, 60.0, 70.0]
    self_hours = self_hours if self_hours is not None else [float(h) for h in range(6, 16)]
    scenarios = []
    if include_base:
        scenarios.append(Scenario("base", 0.0, 0.0, 0.0, economic_params=economic_params))
    for p in central_powers:
        for h in central_hours:
            scenarios.append(Scenario("central", new_wind_mw, p, h,
                                      economic_params=economic_params))
    for p in self_powers:
        for h in self_hours:
            scenarios.append(Scenario("self", new_wind_mw, p, h,
                                      economic_params=economic_params))
    return SweepPlan(tuple(scenarios))


# ----------------------------------------------------------------------
# YAML plumbing
# ----------------------------------------------------------------------

def canonical_yaml(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)


def config_hash(doc: dict) -> str:
    public = {k: v for k, v in doc.items() if not str(k).startswith("_")}
    return hashlib.sha256(canonical_yaml(public).encode()).hexdigest()


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    doc.setdefault("_config_dir", str(Path(path).resolve().parent))
    return doc


def _series_from_spec(spec: dict, base_dir: str, default_label: str) -> HourlySeries:
    spec = dict(spec)
    if "csv" in spec:
        path = Path(spec["csv"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        series = ingest_csv(path, label=default_label)
        if "capacity_mw" in spec:
            return HourlySeries(series.values, series.label, float(spec["capacity_mw"]))
        return series
    kind = spec.pop("kind")
    seed = int(spec.pop("seed"))
    return synthesize(kind, spec, seed)


def system_from_config(doc: dict) -> IslandSystem:
    cfg = doc.get("system", doc)
    base_dir = doc.get("_config_dir", ".")
    units = tuple(ThermalUnit.from_dict(d) for d in cfg["thermal_units"])
    series = cfg["series"]
    rules = tuple(ReserveRule.from_dict(d) for d in cfg.get("reserves", []))
    penalties = cfg.get("penalties", {})
    bes_t = StorageTemplate(**cfg.get("bes_template", {}))
    hps_cfg = dict(cfg.get("hps_template", {}))
    for key in ("offer_coefficients", "market_prices"):
        if key in hps_cfg:
            hps_cfg[key] = tuple(hps_cfg[key])
    return IslandSystem(
        name=cfg.get("name", "island"),
        thermal_units=units,
        load=_series_from_spec(series["load"], base_dir, "load"),
        wind_existing=_series_from_spec(series["wind_existing"], base_dir, "wind_existing"),
        wind_new_profile=_series_from_spec(series["wind_new"], base_dir, "wind_new"),
        pv=_series_from_spec(series["pv"], base_dir, "pv"),
        reserve_rules=rules,
        ens_penalty=float(penalties.get("ens", 10_000.0)),
        hps_grid_energy_cost=float(penalties.get("hps_grid_energy_cost", 50.0)),
        rt_released=tuple(cfg.get("rt_released", ("secondary", "tertiary"))),
        bes_template=bes_t,
        hps_template=HpsTemplate(**hps_cfg),
    )


def economics_from_config(doc: dict) -> EconomicParams:
    cfg = doc.get("economics", {})
    params = EconomicParams(**cfg)
    problems = params.validate()
    if problems:
        raise ValueError("economics config invalid: " + "; ".join(problems))
    return params


def solver_from_config(doc: dict, gap: float | None = None,
                       time_limit: float | None = None) -> SolverSettings:
    cfg = doc.get("solver", {})
    return SolverSettings(
        gap=gap if gap is not None else float(cfg.get("gap", 1e-4)),
        time_limit=time_limit if time_limit is not None else float(cfg.get("time_limit", 60.0)),
    )


def sweep_from_config(doc: dict, economic_params: EconomicParams | None = None) -> SweepPlan:
    cfg = doc.get("sweep", {})
    if "scenarios" in cfg:   # explicit list beats grids
        scenarios = []
        for s in cfg["scenarios"]:
            scenarios.append(Scenario(
                concept=s["concept"], new_wind_mw=float(s.get("new_wind_mw", 0.0)),
                bes_power_mw=float(s.get("bes_power_mw", 0.0)),
                bes_hours=float(s.get("bes_hours", 0.0)),
                id=s.get("id", ""), economic_params=economic_params))
        return SweepPlan(tuple(scenarios))
    central = cfg.get("central", {})
    self_ = cfg.get("self", {})
    return paper_grids(
        new_wind_mw=float(cfg.get("new_wind_mw", 75.0)),
        central_powers=central.get("powers"), central_hours=central.get("hours"),
        self_powers=self_.get("powers"), self_hours=self_.get("hours"),
        include_base=bool(cfg.get("include_base", True)),
        economic_params=economic_params,
    )


def sweep_days(doc: dict) -> int:
    return int(doc.get("sweep", {}).get("days", 365))


__all__ = [
    "SolverSettings", "StorageTemplate", "HpsTemplate", "IslandSystem",
    "SweepPlan", "paper_grids", "canonical_yaml", "config_hash", "load_config",
    "system_from_config", "economics_from_config", "solver_from_config",
    "sweep_from_config", "sweep_days", "scenario_id",
]
