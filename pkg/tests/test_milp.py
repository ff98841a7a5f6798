"""Model-builder and solver contract tests."""

import itertools

import numpy as np
import pytest

from islandsim.milp import (LinearModel, NonConvexCostError, add_piecewise_cost,
                            solve)
from util import make_unit


def test_single_bound_active():
    m = LinearModel(sense="max")
    x = m.add_var("x", 0.0, 5.0)
    m.add_objective(x, 1.0)
    sol = solve(m)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(5.0, abs=1e-9)
    assert sol.values["x"] == pytest.approx(5.0, abs=1e-9)


def test_knapsack_matches_enumeration():
    values = [3.0, 4.0, 5.0]
    weights = [2.0, 3.0, 4.0]
    m = LinearModel(sense="max")
    items = [m.add_binary(f"pick.{k}") for k in range(3)]
    for k, v in enumerate(values):
        m.add_objective(items[k], v)
    m.add_le({items[k]: weights[k] for k in range(3)}, 5.0)
    sol = solve(m)

    best = max(sum(v * take for v, take in zip(values, combo))
               for combo in itertools.product((0, 1), repeat=3)
               if sum(w * take for w, take in zip(weights, combo)) <= 5.0)
    assert best == 7.0
    assert sol.objective == pytest.approx(best, abs=1e-9)


def test_contradictory_bounds_infeasible():
    m = LinearModel()
    x = m.add_var("x", 0.0)
    m.add_ge({x: 1.0}, 3.0)
    m.add_le({x: 1.0}, 2.0)
    sol = solve(m)
    assert sol.status == "infeasible"
    assert not sol.ok


def test_solved_constraints_hold_within_tolerance():
    rng = np.random.default_rng(3)
    m = LinearModel(sense="min")
    xs = [m.add_var(f"x{k}", 0.0, 10.0) for k in range(6)]
    ys = [m.add_binary(f"y{k}") for k in range(3)]
    for k, x in enumerate(xs):
        m.add_objective(x, float(rng.uniform(1, 5)))
    for k in range(3):
        m.add_le({xs[2 * k]: 1.0, ys[k]: -10.0}, 0.0)
    m.add_ge({x: 1.0 for x in xs}, 12.0)
    m.add_eq({xs[0]: 1.0, xs[1]: 1.0}, 4.0)
    sol = solve(m)
    assert sol.status == "optimal"
    assert m.max_violation(sol.values) < 1e-6
    assert sol.objective == pytest.approx(m.objective_value(sol.values), abs=1e-6)


def test_determinism_same_model_same_solution():
    def build_and_solve():
        m = LinearModel(sense="min")
        xs = [m.add_var(f"x{k}", 0.0, 7.0) for k in range(5)]
        bs = [m.add_binary(f"b{k}") for k in range(4)]
        for k, x in enumerate(xs):
            m.add_objective(x, 2.0 + 0.7 * k)
        for k, b in enumerate(bs):
            m.add_objective(b, 11.0 - k)
            m.add_ge({xs[k]: 1.0, b: 5.0}, 6.0)
        m.add_ge({x: 1.0 for x in xs}, 9.0)
        return solve(m)

    a, b = build_and_solve(), build_and_solve()
    assert a.objective == b.objective
    assert a.values == b.values


def test_binaries_within_tolerance_of_integers():
    m = LinearModel(sense="max")
    b = m.add_binary("b")
    x = m.add_var("x", 0.0, 3.0)
    m.add_le({x: 1.0, b: -3.0}, 0.0)
    m.add_objective(x, 1.0)
    m.add_objective(b, -0.5)
    sol = solve(m)
    assert sol.values["b"] in (0.0, 1.0)


# ----------------------------------------------------------------------
# piecewise cost
# ----------------------------------------------------------------------

UNIT = make_unit("U1", 10.0, 50.0, [100.0, 120.0], cost_at_pmin=900.0)


def _cost_model(output: float, on: int = 1):
    m = LinearModel(sense="min")
    handles = add_piecewise_cost(m, UNIT, [0])
    m.add_eq({m.var("st.U1.0"): 1.0}, float(on))
    m.add_eq({m.var("p.U1.0"): 1.0}, output)
    sol = solve(m)
    return m, sol, handles


def test_piecewise_cost_hand_value():
    # 40 MW while on: minimum-load cost + 20 MW cheap block + 10 MW dear block
    _, sol, _ = _cost_model(40.0)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(900.0 + 20 * 100.0 + 10 * 120.0, abs=1e-6)


def test_piecewise_unit_off_zero_cost():
    _, sol, _ = _cost_model(0.0, on=0)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert sol.values["dp.U1.0.0"] == pytest.approx(0.0, abs=1e-9)
    assert sol.values["dp.U1.0.1"] == pytest.approx(0.0, abs=1e-9)


def test_piecewise_at_minimum_all_blocks_zero():
    _, sol, _ = _cost_model(10.0)
    assert sol.objective == pytest.approx(900.0, abs=1e-6)
    assert sol.values["dp.U1.0.0"] == pytest.approx(0.0, abs=1e-9)


def test_piecewise_fills_cheap_block_first():
    for output in (15.0, 25.0, 31.0, 42.0, 50.0):
        _, sol, _ = _cost_model(output)
        b0, b1 = sol.values["dp.U1.0.0"], sol.values["dp.U1.0.1"]
        if b1 > 1e-9:
            assert b0 == pytest.approx(20.0, abs=1e-6)   # cheap block full first
        assert b0 + b1 == pytest.approx(output - 10.0, abs=1e-6)


def test_piecewise_rejects_nonconvex():
    bad = make_unit("U2", 5.0, 25.0, [150.0, 120.0])
    with pytest.raises(NonConvexCostError):
        add_piecewise_cost(LinearModel(), bad, [0])


def test_lp_dump_sections(tmp_path):
    m, _, _ = _cost_model(40.0)
    text = m.to_lp_string()
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    path = tmp_path / "model.lp"
    from islandsim.milp import write_lp
    write_lp(m, path)
    assert path.read_text().startswith("\\")
