"""Real-time self-dispatch of a hybrid wind-storage station.

Each hour the station operator receives a production or absorption order
from the system operator and splits the station's actual RES output among
direct grid injection, internal storage and rejection, topping production up
from storage where needed.  The decision is a tiny static MILP maximizing
sale revenue net of purchase cost and imbalance penalties; shortfalls against
either order become penalized imbalances, so the problem is always feasible.

Deliberate tie-breaking: surplus RES is stored rather than rejected whenever
there is headroom, and orders are met from RES before storage discharge.
Both preferences are expressed as epsilon-scale objective terms, far below
any price, so the reported revenue is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import HpsPlant
from .milp import LinearModel, solve

#: Orders and realizations smaller than this are treated as zero (MW).
_SNAP = 1e-9


@dataclass(frozen=True)
class HpsOrder:
    """Dispatch order for one hour: produce or absorb, never both."""

    production: float                 # MW
    absorption: float                 # MW
    interval: int = 0                 # absolute hour index

    def __post_init__(self):
        if self.production < 0 or self.absorption < 0:
            raise ValueError(f"orders must be >= 0, got {self.production}, {self.absorption}")
        if self.production > _SNAP and self.absorption > _SNAP:
            raise ValueError("production and absorption orders are mutually exclusive")


@dataclass(frozen=True)
class HpsRealization:
    """How the station actually ran: RES split, storage flows, imbalances."""

    res_to_grid: float                # MW
    res_to_storage: float             # MW
    res_rejected: float               # MW
    discharge: float                  # MW
    charge: float                     # MW
    imbalance_production: float       # MW short on the production order
    imbalance_absorption: float       # MW short on the absorption order
    end_soc: float                    # MWh
    objective: float                  # EUR for the hour

    @property
    def delivered(self) -> float:
        return self.res_to_grid + self.discharge

    @property
    def grid_draw(self) -> float:
        return self.charge - self.res_to_storage


def revenue(hps: HpsPlant, order: HpsOrder, realization) -> float:
    """Hourly revenue: sales minus purchases minus imbalance charges."""
    m1, m2, m3 = hps.market_prices
    return (m1 * (realization.res_to_grid + realization.discharge)
            - m2 * order.absorption
            - m3 * (realization.imbalance_production + realization.imbalance_absorption))


def self_dispatch(hps: HpsPlant, order: HpsOrder, res_available: float,
                  soc: float) -> HpsRealization:
    """Optimal station response to one hour's order given actual RES and SoC."""
    if res_available < 0:
        raise ValueError(f"res_available must be >= 0, got {res_available}")
    store = hps.storage
    if not store.e_min - 1e-9 <= soc <= store.e_max + 1e-9:
        raise ValueError(f"soc {soc} outside [{store.e_min}, {store.e_max}]")
    soc = min(max(soc, store.e_min), store.e_max)
    m1, _, m3 = hps.market_prices
    sq = hps.eff_sqrt
    eps = 1e-6 * (1.0 + m1)

    m = LinearModel(name=f"selfdispatch.{hps.id}", sense="max")
    res_g = m.add_var("res_g", 0.0, min(res_available, order.production))
    res_s = m.add_var("res_s", 0.0, res_available)
    res_r = m.add_var("res_r", 0.0, res_available)
    dch = m.add_var("dch", 0.0, store.p_discharge_max)
    ch = m.add_var("ch", 0.0, store.p_charge_max)
    imb_p = m.add_var("imb_p", 0.0, order.production)
    imb_a = m.add_var("imb_a", 0.0, order.absorption)
    end_soc = m.add_var("end_soc", store.e_min, store.e_max)
    charging = m.add_binary("charging")

    m.add_eq({res_g: 1.0, res_s: 1.0, res_r: 1.0}, res_available, name="res_split")
    m.add_eq({res_g: 1.0, dch: 1.0, imb_p: 1.0}, order.production, name="production_order")
    # grid draw plus shortfall equals the absorption order
    m.add_eq({ch: 1.0, res_s: -1.0, imb_a: 1.0}, order.absorption, name="absorption_order")
    m.add_eq({end_soc: 1.0, ch: -sq, dch: 1.0 / sq}, soc, name="soc_update")
    m.add_le({ch: 1.0, charging: -store.p_charge_max}, 0.0, name="charge_gate")
    m.add_le({dch: 1.0, charging: store.p_discharge_max}, store.p_discharge_max,
             name="discharge_gate")

    m.add_objective(res_g, m1)
    m.add_objective(dch, m1 - eps)      # meet orders from RES before storage
    m.add_objective(res_s, eps)         # store surplus rather than reject it
    m.add_objective(imb_p, -m3)
    m.add_objective(imb_a, -m3)

    sol = solve(m, gap_tolerance=1e-9, time_limit=10.0)
    if not sol.ok:  # cannot happen for valid inputs: imbalances absorb anything
        raise RuntimeError(f"self-dispatch unexpectedly {sol.status}: {sol.message}")

    # Re-derive dependent quantities from the primal decisions so the flow
    # identities hold to machine precision in the realization record; the
    # mode flag pins the idle side of the exclusivity gate to exactly zero.
    v = {k: (0.0 if abs(x) < _SNAP else x) for k, x in sol.values.items()}
    charging = v["charging"] > 0.5
    g = min(max(v["res_g"], 0.0), res_available, order.production)
    if charging:
        s = min(max(v["res_s"], 0.0), res_available - g)
        d = 0.0
        draw = min(max(v["ch"] - v["res_s"], 0.0), order.absorption)
    else:
        s = 0.0
        d = min(max(v["dch"], 0.0), store.p_discharge_max, order.production - g)
        draw = 0.0
    rej = res_available - g - s
    i_p = order.production - g - d
    c = s + draw
    i_a = order.absorption - draw
    final_soc = soc + sq * c - d / sq
    m1_, m2_, m3_ = hps.market_prices
    obj = m1_ * (g + d) - m2_ * order.absorption - m3_ * (i_p + i_a)
    return HpsRealization(
        res_to_grid=g, res_to_storage=s, res_rejected=rej,
        discharge=d, charge=c,
        imbalance_production=i_p, imbalance_absorption=i_a,
        end_soc=final_soc, objective=obj,
    )


def scale_invariant_key(realization: HpsRealization) -> tuple:
    """Physical realization rounded for argmax-invariance comparisons."""
    r = realization
    return tuple(round(x, 6) for x in (r.res_to_grid, r.res_to_storage, r.res_rejected,
                                       r.discharge, r.charge,
                                       r.imbalance_production, r.imbalance_absorption))
