"""Front extraction against the pairwise-dominance oracle."""

import numpy as np
import pytest

from islandsim.pareto import ParetoPoint, extract_pareto
from oracles import pareto_oracle


def _front_tuples(points):
    return sorted((p.scenario_id, p.res_penetration, p.lcoe)
                  for p in extract_pareto(points))


def test_dominance_by_inspection():
    points = [("a", 0.40, 100.0), ("b", 0.45, 120.0), ("c", 0.45, 110.0),
              ("d", 0.42, 90.0)]
    front = extract_pareto(points)
    assert {(p.res_penetration, p.lcoe) for p in front} == {(0.42, 90.0), (0.45, 110.0)}


def test_single_point_is_its_own_front():
    front = extract_pareto([("only", 0.3, 140.0)])
    assert len(front) == 1 and front[0].scenario_id == "only"


def test_duplicates_keep_smallest_id():
    points = [("z", 0.4, 100.0), ("a", 0.4, 100.0), ("m", 0.4, 100.0)]
    front = extract_pareto(points)
    assert [p.scenario_id for p in front] == ["a"]


def test_random_sets_match_pairwise_oracle():
    rng = np.random.default_rng(13)
    for trial in range(200):
        n = int(rng.integers(1, 60))
        points = [(f"s{k:03d}",
                   float(rng.integers(0, 12)) / 20.0,      # coarse grid forces ties
                   float(rng.integers(5, 25)) * 10.0)
                  for k in range(n)]
        got = _front_tuples(points)
        want = pareto_oracle(points)
        assert got == want, f"trial {trial}"


def test_front_sorted_by_rising_penetration():
    rng = np.random.default_rng(3)
    points = [(f"s{k}", float(rng.random()), float(rng.random() * 100))
              for k in range(50)]
    front = extract_pareto(points)
    pens = [p.res_penetration for p in front]
    costs = [p.lcoe for p in front]
    assert pens == sorted(pens)
    assert costs == sorted(costs)   # along the front, more penetration costs more


def test_nonfinite_rejected():
    with pytest.raises(ValueError, match="non-finite"):
        extract_pareto([("a", 0.5, float("nan"))])


def test_accepts_pareto_point_instances():
    front = extract_pareto([ParetoPoint("a", 0.4, 90.0), ("b", 0.5, 80.0)])
    assert [p.scenario_id for p in front] == ["b"]
