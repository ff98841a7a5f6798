"""Domain types for the island generation-scheduling simulator.

Everything the optimization layers and the economics consume lives here:
dispatchable assets (thermal units, batteries, hybrid wind-storage stations),
reserve rules, the per-problem ``SystemSnapshot``, solved ``DispatchSchedule``
objects, scenario definitions and the annual operating ledger.

All asset types are immutable after construction so snapshots can be shared
freely across concurrently evaluated scenarios.  ``validate_system`` reports
invariant breaches as data (a list of violations), not exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import TYPE_CHECKING

import numpy as np

from .milp import NonConvexCostError, check_convex_blocks

if TYPE_CHECKING:  # pragma: no cover
    from .economics import EconomicParams

HOURS_PER_YEAR = 8760

RESERVE_KINDS = (
    "primary_up", "primary_down",
    "secondary_up", "secondary_down",
    "tertiary_up", "tertiary_down",
)

#: Named reserve-requirement rules (see uced.requirement_series for semantics).
RESERVE_RULES = ("largest_online_infeed", "fraction_of_load",
                 "largest_committed_pmax", "fixed")


# ======================================================================
# Assets
# ======================================================================

@dataclass(frozen=True)
class ThermalUnit:
    """Conventional dispatchable unit with a convex block cost curve."""

    id: str
    p_min: float                      # MW
    p_max: float                      # MW
    cost_at_pmin: float               # EUR/h while online at minimum load
    cost_blocks: tuple[tuple[float, float], ...]  # (width MW, marginal EUR/MWh)
    startup_cost: float               # EUR per start
    shutdown_cost: float              # EUR per stop
    ramp_up: float                    # MW/h
    ramp_down: float                  # MW/h
    min_up_time: int                  # h
    min_down_time: int                # h

    def __post_init__(self):
        object.__setattr__(self, "cost_blocks",
                           tuple((float(w), float(g)) for w, g in self.cost_blocks))

    def to_dict(self) -> dict:
        return {
            "id": self.id, "p_min": self.p_min, "p_max": self.p_max,
            "cost_at_pmin": self.cost_at_pmin,
            "cost_blocks": [[w, g] for w, g in self.cost_blocks],
            "startup_cost": self.startup_cost, "shutdown_cost": self.shutdown_cost,
            "ramp_up": self.ramp_up, "ramp_down": self.ramp_down,
            "min_up_time": self.min_up_time, "min_down_time": self.min_down_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThermalUnit":
        return cls(**{**d, "cost_blocks": tuple(tuple(b) for b in d["cost_blocks"])})


@dataclass(frozen=True)
class BesUnit:
    """Battery storage: power ratings, energy window and roundtrip efficiency."""

    id: str
    p_charge_max: float               # MW
    p_discharge_max: float            # MW
    e_min: float                      # MWh
    e_max: float                      # MWh
    roundtrip_eff: float              # fraction in (0, 1]
    initial_soc: float                # MWh

    @property
    def eff_sqrt(self) -> float:
        # charge and discharge each carry sqrt(eff) of the roundtrip loss
        return math.sqrt(self.roundtrip_eff)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "BesUnit":
        return cls(**d)


@dataclass(frozen=True)
class HpsPlant:
    """Hybrid power station: wind plus internal storage, self-dispatched.

    ``roundtrip_eff`` is the station efficiency used in both the operator's
    energy-offer accounting and the internal storage balance; the nested
    ``storage`` carries the energy window and charger ratings.
    """

    id: str
    p_max: float                      # MW, declared station capacity
    p_min_component: float            # MW, smallest stable output when committed
    grid_absorb_max: float            # MW, maximum absorption order
    roundtrip_eff: float              # fraction
    storage: BesUnit
    wind_capacity: float              # MW of RES inside the station
    offer_coefficients: tuple[float, float, float]   # per 8-h block of the day
    market_prices: tuple[float, float, float]        # (sale, purchase, imbalance) EUR/MWh

    def __post_init__(self):
        object.__setattr__(self, "offer_coefficients", tuple(float(x) for x in self.offer_coefficients))
        object.__setattr__(self, "market_prices", tuple(float(x) for x in self.market_prices))

    @property
    def eff_sqrt(self) -> float:
        return math.sqrt(self.roundtrip_eff)

    def to_dict(self) -> dict:
        return {
            "id": self.id, "p_max": self.p_max,
            "p_min_component": self.p_min_component,
            "grid_absorb_max": self.grid_absorb_max,
            "roundtrip_eff": self.roundtrip_eff,
            "storage": self.storage.to_dict(),
            "wind_capacity": self.wind_capacity,
            "offer_coefficients": list(self.offer_coefficients),
            "market_prices": list(self.market_prices),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HpsPlant":
        d = dict(d)
        d["storage"] = BesUnit.from_dict(d["storage"])
        d["offer_coefficients"] = tuple(d["offer_coefficients"])
        d["market_prices"] = tuple(d["market_prices"])
        return cls(**d)


@dataclass(frozen=True)
class ReserveRule:
    """One reserve product: how much is required and what shortfall costs."""

    kind: str                         # one of RESERVE_KINDS
    rule: str                         # one of RESERVE_RULES
    params: tuple[tuple[str, float], ...] = ()
    reserve_cost: float = 0.0         # EUR/MW allocated
    violation_penalty: float = 500.0  # EUR/MW short

    def __post_init__(self):
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def direction(self) -> str:
        return self.kind.rsplit("_", 1)[1]   # "up" | "down"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rule": self.rule,
                "params": {k: v for k, v in self.params},
                "reserve_cost": self.reserve_cost,
                "violation_penalty": self.violation_penalty}

    @classmethod
    def from_dict(cls, d: dict) -> "ReserveRule":
        return cls(kind=d["kind"], rule=d["rule"],
                   params=tuple(sorted(d.get("params", {}).items())),
                   reserve_cost=d.get("reserve_cost", 0.0),
                   violation_penalty=d.get("violation_penalty", 500.0))


# ======================================================================
# Scheduling problem instance
# ======================================================================

def _freeze(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SystemSnapshot:
    """One scheduling problem: horizon, series, assets and prior state.

    ``prior_commitment`` maps unit id to its on/off history (most recent
    last) and must reach back at least max(min_up_time, min_down_time)
    hours; ``prior_output`` carries the last realized output for ramp
    continuity across the horizon boundary.
    """

    horizon: np.ndarray               # absolute hour-of-year indices
    load: np.ndarray                  # MW per interval
    wind_available: np.ndarray        # MW, wind farms outside any HPS
    pv_available: np.ndarray          # MW
    hps_res_available: dict[str, np.ndarray]
    thermal_units: tuple[ThermalUnit, ...]
    bes_units: tuple[BesUnit, ...]
    hps_plants: tuple[HpsPlant, ...]
    prior_commitment: dict[str, tuple[int, ...]]
    prior_output: dict[str, float]
    prior_soc: dict[str, float]       # MWh per BES id
    ens_penalty: float = 10_000.0     # EUR/MWh not served
    hps_grid_energy_cost: float = 50.0  # EUR/MWh absorbed from the grid
    reserve_rules: tuple[ReserveRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "horizon", _freeze(self.horizon))
        object.__setattr__(self, "load", _freeze(self.load))
        object.__setattr__(self, "wind_available", _freeze(self.wind_available))
        object.__setattr__(self, "pv_available", _freeze(self.pv_available))
        object.__setattr__(self, "hps_res_available",
                           {k: _freeze(v) for k, v in self.hps_res_available.items()})
        object.__setattr__(self, "thermal_units", tuple(self.thermal_units))
        object.__setattr__(self, "bes_units", tuple(self.bes_units))
        object.__setattr__(self, "hps_plants", tuple(self.hps_plants))
        object.__setattr__(self, "prior_commitment",
                           {k: tuple(int(x) for x in v) for k, v in self.prior_commitment.items()})
        object.__setattr__(self, "prior_output",
                           {k: float(v) for k, v in self.prior_output.items()})
        object.__setattr__(self, "prior_soc",
                           {k: float(v) for k, v in self.prior_soc.items()})
        object.__setattr__(self, "reserve_rules", tuple(self.reserve_rules))

    @property
    def n_hours(self) -> int:
        return len(self.horizon)


# ======================================================================
# Solved schedules
# ======================================================================

@dataclass
class DispatchSchedule:
    """Per-interval solution of one scheduling problem.

    Arrays are indexed by position within the problem horizon.  Cost terms
    are recomputed from the solution values, not read off the solver, so the
    breakdown can be audited against the objective.
    """

    stage: str                        # day_ahead | intraday | real_time
    horizon: np.ndarray               # absolute hour indices
    status: str
    objective: float
    gap: float = 0.0
    # thermal, keyed by unit id
    p: dict[str, np.ndarray] = field(default_factory=dict)
    st: dict[str, np.ndarray] = field(default_factory=dict)
    su: dict[str, np.ndarray] = field(default_factory=dict)
    sd: dict[str, np.ndarray] = field(default_factory=dict)
    # batteries, keyed by BES id
    charge: dict[str, np.ndarray] = field(default_factory=dict)
    discharge: dict[str, np.ndarray] = field(default_factory=dict)
    soc: dict[str, np.ndarray] = field(default_factory=dict)
    # hybrid stations, keyed by HPS id
    hps_p: dict[str, np.ndarray] = field(default_factory=dict)
    hps_gr: dict[str, np.ndarray] = field(default_factory=dict)
    hps_on: dict[str, np.ndarray] = field(default_factory=dict)
    hps_undispatched: dict[str, float] = field(default_factory=dict)
    # system-level series
    wind_curtail: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ens: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reserve: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)  # kind -> asset -> MW
    reserve_req: dict[str, np.ndarray] = field(default_factory=dict)
    reserve_slack: dict[str, np.ndarray] = field(default_factory=dict)
    # per-hour cost terms, EUR
    cost_fuel: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cost_startup: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cost_shutdown: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cost_reserve: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cost_hps_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cost_slack: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_hours(self) -> int:
        return len(self.horizon)

    def cost_breakdown(self) -> dict[str, float]:
        return {
            "fuel": float(self.cost_fuel.sum()),
            "startup": float(self.cost_startup.sum()),
            "shutdown": float(self.cost_shutdown.sum()),
            "reserve": float(self.cost_reserve.sum()),
            "hps_grid": float(self.cost_hps_grid.sum()),
            "slack": float(self.cost_slack.sum()),
        }

    def balance_residual(self, snapshot: SystemSnapshot) -> np.ndarray:
        """Active-power balance residual per interval (MW, should be ~0)."""
        t = self.n_hours
        lhs = np.zeros(t)
        for series in self.p.values():
            lhs += series
        for series in self.discharge.values():
            lhs += series
        for series in self.hps_p.values():
            lhs += series
        lhs += snapshot.pv_available[:t]
        lhs += snapshot.wind_available[:t] - self.wind_curtail
        lhs += self.ens
        rhs = snapshot.load[:t].copy()
        for series in self.charge.values():
            rhs += series
        for series in self.hps_gr.values():
            rhs += series
        return lhs - rhs

    def schedule_rows(self):
        """Long-format rows (hour, asset, quantity, value) for CSV dumps."""
        for quantity, table in (("p", self.p), ("st", self.st), ("su", self.su),
                                ("sd", self.sd), ("charge", self.charge),
                                ("discharge", self.discharge), ("soc", self.soc),
                                ("hps_p", self.hps_p), ("hps_gr", self.hps_gr),
                                ("hps_on", self.hps_on)):
            for asset, series in sorted(table.items()):
                for k, hour in enumerate(self.horizon):
                    yield int(hour), asset, quantity, float(series[k])
        for quantity, series in (("wind_curtail", self.wind_curtail), ("ens", self.ens)):
            for k, hour in enumerate(self.horizon):
                yield int(hour), "system", quantity, float(series[k])
        for kind, series in sorted(self.reserve_req.items()):
            for k, hour in enumerate(self.horizon):
                yield int(hour), "system", f"rr.{kind}", float(series[k])


def write_schedule_csv(schedule: DispatchSchedule, path) -> None:
    """Dump a schedule in long format, one row per hour x asset x quantity."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "asset", "quantity", "value"])
        for row in schedule.schedule_rows():
            w.writerow([row[0], row[1], row[2], f"{row[3]:.6f}"])


# ======================================================================
# Scenario and annual ledger
# ======================================================================

CONCEPT_FLAGS = {"central": "1", "self": "2", "base": "0"}


@dataclass(frozen=True)
class Scenario:
    """One storage-plus-wind configuration under one management concept."""

    concept: str                      # central | self | base
    new_wind_mw: float
    bes_power_mw: float
    bes_hours: float                  # equivalent hours at rated power
    id: str = ""
    economic_params: "EconomicParams | None" = None

    def __post_init__(self):
        if not self.id:
            object.__setattr__(self, "id", scenario_id(self.concept, self.bes_power_mw,
                                                       self.bes_hours))

    @property
    def bes_energy_mwh(self) -> float:
        return self.bes_power_mw * self.bes_hours

    @property
    def flag(self) -> str:
        return CONCEPT_FLAGS[self.concept]


def scenario_id(concept: str, power: float, hours: float) -> str:
    if concept == "base":
        return "base"
    return f"{concept}_p{power:g}_h{hours:g}"


class AnnualLedger:
    """Hourly operating record of one scenario plus the governing plan values.

    ``columns`` holds realized quantities (one array per column, one row per
    simulated hour); ``plan`` holds the day-ahead/intraday values that governed
    each hour (used for the state-of-charge floor audit and weekly extracts).
    """

    def __init__(self, scenario_id: str, concept: str, column_names: list[str],
                 plan_names: list[str], n_hours: int):
        self.scenario_id = scenario_id
        self.concept = concept
        self.flag = CONCEPT_FLAGS[concept]
        self.n_hours = n_hours
        self.columns: dict[str, np.ndarray] = {c: np.zeros(n_hours) for c in column_names}
        self.plan: dict[str, np.ndarray] = {c: np.zeros(n_hours) for c in plan_names}
        self.filled = 0

    def append_hour(self, realized: dict[str, float], planned: dict[str, float]) -> None:
        i = self.filled
        if i >= self.n_hours:
            raise IndexError("ledger is full")
        for k, v in realized.items():
            self.columns[k][i] = v
        for k, v in planned.items():
            self.plan[k][i] = v
        self.filled += 1

    def col(self, name: str) -> np.ndarray:
        return self.columns[name][: self.filled]

    def plan_col(self, name: str) -> np.ndarray:
        return self.plan[name][: self.filled]

    def unit_ids(self) -> list[str]:
        return sorted(c.split(".", 1)[1] for c in self.columns if c.startswith("p."))

    def bes_ids(self) -> list[str]:
        return sorted(c.split(".", 1)[1] for c in self.columns if c.startswith("soc."))

    def has_hps(self) -> bool:
        return "hps.order_p" in self.columns

    # -- annual accounting -------------------------------------------------

    def energy_identity_residual(self) -> float:
        """Production + ENS minus (load + charging + HPS absorption), MWh."""
        produced = sum(self.col(f"p.{u}").sum() for u in self.unit_ids())
        produced += sum(self.col(f"discharge.{b}").sum() for b in self.bes_ids())
        produced += self.col("wind_injected").sum() + self.col("pv_injected").sum()
        produced += self.col("ens").sum()
        consumed = self.col("load").sum()
        consumed += sum(self.col(f"charge.{b}").sum() for b in self.bes_ids())
        if self.has_hps():
            produced += self.col("hps.delivered").sum()
            consumed += self.col("hps.grid_draw").sum()
        return float(produced - consumed)

    def summary(self) -> dict[str, float]:
        s: dict[str, float] = {
            "hours": float(self.filled),
            "load_mwh": float(self.col("load").sum()),
            "wind_available_mwh": float(self.col("wind_available").sum()),
            "wind_injected_mwh": float(self.col("wind_injected").sum()),
            "wind_curtailed_mwh": float(self.col("wind_curtail").sum()),
            "existing_wind_available_mwh": float(self.col("existing_wind_available").sum()),
            "new_wind_available_mwh": float(self.col("new_wind_available").sum()),
            "new_wind_injected_mwh": float(self.col("new_wind_injected").sum()),
            "existing_wind_injected_mwh": float(self.col("existing_wind_injected").sum()),
            "pv_injected_mwh": float(self.col("pv_injected").sum()),
            "ens_mwh": float(self.col("ens").sum()),
            "fuel_cost": float(self.col("cost_fuel").sum()),
            "startup_cost": float(self.col("cost_startup").sum()),
            "shutdown_cost": float(self.col("cost_shutdown").sum()),
            "reserve_cost": float(self.col("cost_reserve").sum()),
            "hps_grid_cost": float(self.col("cost_hps_grid").sum()),
            "slack_cost": float(self.col("cost_slack").sum()),
            "thermal_mwh": float(sum(self.col(f"p.{u}").sum() for u in self.unit_ids())),
        }
        s["conventional_cost"] = s["fuel_cost"] + s["startup_cost"] + s["shutdown_cost"]
        if self.has_hps():
            s["hps_delivered_mwh"] = float(self.col("hps.delivered").sum())
            s["hps_rejected_mwh"] = float(self.col("hps.res_r").sum())
            s["hps_res_available_mwh"] = float(self.col("hps.res_available").sum())
            s["hps_imbalance_production_mwh"] = float(self.col("hps.imb_p").sum())
            s["hps_imbalance_absorption_mwh"] = float(self.col("hps.imb_a").sum())
            s["hps_grid_draw_mwh"] = float(self.col("hps.grid_draw").sum())
        return s

    def res_delivered_mwh(self) -> float:
        delivered = self.col("wind_injected").sum() + self.col("pv_injected").sum()
        if self.has_hps():
            delivered += self.col("hps.delivered").sum()
        return float(delivered)

    def res_penetration(self) -> float:
        return self.res_delivered_mwh() / float(self.col("load").sum())


# ======================================================================
# Validation
# ======================================================================

@dataclass(frozen=True)
class Violation:
    asset: str
    field: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.asset}.{self.field}: {self.rule} ({self.message})"


def _check_thermal(u: ThermalUnit, out: list[Violation]) -> None:
    def bad(fieldname, rule, msg):
        out.append(Violation(u.id, fieldname, rule, msg))

    if not 0 < u.p_min <= u.p_max:
        bad("p_min", "0 < p_min <= p_max", f"p_min={u.p_min}, p_max={u.p_max}")
    width_sum = sum(w for w, _ in u.cost_blocks)
    if abs(width_sum - (u.p_max - u.p_min)) > 1e-9 * max(1.0, u.p_max):
        bad("cost_blocks", "block widths sum to p_max - p_min",
            f"sum={width_sum}, span={u.p_max - u.p_min}")
    try:
        check_convex_blocks(u.cost_blocks)
    except NonConvexCostError as exc:
        bad("cost_blocks", "convex non-negative marginal costs", str(exc))
    if u.ramp_up <= 0 or u.ramp_down <= 0:
        bad("ramp_up", "ramp rates positive", f"ru={u.ramp_up}, rd={u.ramp_down}")
    if u.min_up_time < 1 or u.min_down_time < 1:
        bad("min_up_time", "min up/down times >= 1 h",
            f"up={u.min_up_time}, down={u.min_down_time}")
    if u.startup_cost < 0 or u.shutdown_cost < 0:
        bad("startup_cost", "transition costs non-negative",
            f"su={u.startup_cost}, sd={u.shutdown_cost}")


def _check_bes(b: BesUnit, out: list[Violation], owner: str = "") -> None:
    name = f"{owner}{b.id}"

    def bad(fieldname, rule, msg):
        out.append(Violation(name, fieldname, rule, msg))

    if not 0 <= b.e_min <= b.initial_soc <= b.e_max:
        bad("initial_soc", "0 <= e_min <= initial_soc <= e_max",
            f"e_min={b.e_min}, soc0={b.initial_soc}, e_max={b.e_max}")
    if b.p_charge_max <= 0 or b.p_discharge_max <= 0:
        bad("p_charge_max", "charge/discharge ratings positive",
            f"c={b.p_charge_max}, d={b.p_discharge_max}")
    if not 0 < b.roundtrip_eff <= 1:
        bad("roundtrip_eff", "efficiency in (0, 1]", f"eff={b.roundtrip_eff}")


def _check_hps(h: HpsPlant, out: list[Violation]) -> None:
    def bad(fieldname, rule, msg):
        out.append(Violation(h.id, fieldname, rule, msg))

    if not 0 < h.p_min_component <= h.p_max:
        bad("p_min_component", "0 < p_min_component <= p_max",
            f"min={h.p_min_component}, max={h.p_max}")
    if h.grid_absorb_max < 0:
        bad("grid_absorb_max", "grid absorption limit >= 0", f"{h.grid_absorb_max}")
    if any(not 0 <= c <= 1 for c in h.offer_coefficients):
        bad("offer_coefficients", "coefficients in [0, 1]", f"{h.offer_coefficients}")
    if len(h.offer_coefficients) != 3:
        bad("offer_coefficients", "three 8-h block coefficients",
            f"got {len(h.offer_coefficients)}")
    m1, m2, m3 = h.market_prices
    if not (m3 >= m2 >= 0):
        bad("market_prices", "imbalance penalty >= purchase price >= 0",
            f"m2={m2}, m3={m3}")
    if not 0 < h.roundtrip_eff <= 1:
        bad("roundtrip_eff", "efficiency in (0, 1]", f"{h.roundtrip_eff}")
    if h.wind_capacity < 0:
        bad("wind_capacity", "wind capacity >= 0", f"{h.wind_capacity}")
    _check_bes(h.storage, out, owner=f"{h.id}.")


def validate_system(snapshot: SystemSnapshot) -> list[Violation]:
    """Check every type invariant; an empty list means the snapshot is sound."""
    out: list[Violation] = []
    for u in snapshot.thermal_units:
        _check_thermal(u, out)
    for b in snapshot.bes_units:
        _check_bes(b, out)
    for h in snapshot.hps_plants:
        _check_hps(h, out)

    t = snapshot.n_hours
    for name, series in (("load", snapshot.load),
                         ("wind_available", snapshot.wind_available),
                         ("pv_available", snapshot.pv_available)):
        if len(series) != t:
            out.append(Violation("system", name, "series length mismatch",
                                 f"expected {t}, got {len(series)}"))
        if len(series) and series.min() < 0:
            out.append(Violation("system", name, "series non-negative",
                                 f"min={series.min()}"))
    for hid, series in snapshot.hps_res_available.items():
        if len(series) != t:
            out.append(Violation(hid, "hps_res_available", "series length mismatch",
                                 f"expected {t}, got {len(series)}"))
        if len(series) and series.min() < 0:
            out.append(Violation(hid, "hps_res_available", "series non-negative",
                                 f"min={series.min()}"))

    for u in snapshot.thermal_units:
        hist = snapshot.prior_commitment.get(u.id)
        need = max(u.min_up_time, u.min_down_time)
        if hist is None:
            out.append(Violation(u.id, "prior_commitment", "history present",
                                 "missing on/off history"))
        elif len(hist) < need:
            out.append(Violation(u.id, "prior_commitment",
                                 "history covers max(min_up, min_down)",
                                 f"need {need} h, got {len(hist)}"))
        if u.id not in snapshot.prior_output:
            out.append(Violation(u.id, "prior_output", "prior output present",
                                 "missing last realized output"))
    for b in snapshot.bes_units:
        if b.id not in snapshot.prior_soc:
            out.append(Violation(b.id, "prior_soc", "prior SoC present",
                                 "missing stored energy state"))

    for r in snapshot.reserve_rules:
        if r.kind not in RESERVE_KINDS:
            out.append(Violation("reserves", "kind", "known reserve kind", r.kind))
        if r.rule not in RESERVE_RULES:
            out.append(Violation("reserves", "rule", "known requirement rule", r.rule))
        if r.violation_penalty <= r.reserve_cost:
            out.append(Violation("reserves", "violation_penalty",
                                 "penalty exceeds allocation cost",
                                 f"f_e={r.violation_penalty}, c_e={r.reserve_cost}"))
        if r.violation_penalty >= snapshot.ens_penalty:
            out.append(Violation("reserves", "violation_penalty",
                                 "reserve penalty far below lost-load penalty",
                                 f"f_e={r.violation_penalty}, f_ens={snapshot.ens_penalty}"))
    if snapshot.ens_penalty <= 0:
        out.append(Violation("system", "ens_penalty", "positive lost-load penalty",
                             f"{snapshot.ens_penalty}"))
    return out


def validate_schedule(snapshot: SystemSnapshot, schedule: DispatchSchedule,
                      tol: float = 1e-6) -> list[Violation]:
    """Audit a solved schedule: balance residual, flags, SoC and curtailment."""
    out: list[Violation] = []
    residual = schedule.balance_residual(snapshot)
    worst = float(np.abs(residual).max()) if len(residual) else 0.0
    if worst > tol:
        out.append(Violation("system", "balance", "power balance residual < tol",
                             f"max |residual| = {worst:.3e} MW"))
    for table_name, table in (("st", schedule.st), ("su", schedule.su),
                              ("sd", schedule.sd), ("hps_on", schedule.hps_on)):
        for asset, series in table.items():
            off = np.abs(series - np.round(series)).max() if len(series) else 0.0
            if off > tol:
                out.append(Violation(asset, table_name, "flags binary",
                                     f"max deviation {off:.3e}"))
    by_id = {b.id: b for b in snapshot.bes_units}
    for bid, series in schedule.soc.items():
        b = by_id.get(bid)
        if b is None:
            continue
        if len(series) and (series.min() < b.e_min - tol or series.max() > b.e_max + tol):
            out.append(Violation(bid, "soc", "SoC within energy window",
                                 f"range [{series.min():.3f}, {series.max():.3f}]"))
    t = schedule.n_hours
    if len(schedule.wind_curtail):
        excess = float((schedule.wind_curtail - snapshot.wind_available[:t]).max())
        if excess > tol:
            out.append(Violation("system", "wind_curtail",
                                 "curtailment bounded by availability",
                                 f"excess {excess:.3e} MW"))
    return out
