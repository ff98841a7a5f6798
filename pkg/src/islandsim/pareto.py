"""Non-dominated scenario extraction in the (RES penetration, LCOE) plane.

A configuration is on the front when no other achieves at least its
penetration for at most its cost, with at least one strict improvement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ParetoPoint:
    scenario_id: str
    res_penetration: float
    lcoe: float


def extract_pareto(points) -> list[ParetoPoint]:
    """Maximal non-dominated subset, sorted by rising penetration.

    Maximizes penetration and minimizes LCOE.  Exact coordinate ties collapse
    to the lexicographically smallest scenario id.
    """
    pts = [p if isinstance(p, ParetoPoint) else ParetoPoint(*p) for p in points]
    for p in pts:
        if not (math.isfinite(p.res_penetration) and math.isfinite(p.lcoe)):
            raise ValueError(f"non-finite coordinates for {p.scenario_id!r}")
    if not pts:
        return []
    # group by penetration (descending); within a group only the cheapest
    # point can survive, ties resolved by id
    pts.sort(key=lambda p: (-p.res_penetration, p.lcoe, p.scenario_id))
    front: list[ParetoPoint] = []
    best_cost = math.inf
    k = 0
    while k < len(pts):
        j = k
        while j < len(pts) and pts[j].res_penetration == pts[k].res_penetration:
            j += 1
        candidate = pts[k]   # cheapest of the group, smallest id on cost ties
        if candidate.lcoe < best_cost:
            front.append(candidate)
            best_cost = candidate.lcoe
        k = j
    front.reverse()
    return front
