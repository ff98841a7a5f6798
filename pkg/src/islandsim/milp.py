"""Declarative mixed-integer linear model builder on top of scipy's HiGHS backend.

All three scheduling layers express their problems through ``LinearModel``:
named variables (continuous or binary), range constraints and a linear
objective.  ``solve`` lowers the model to ``scipy.optimize.milp`` and maps the
result back to named values.  Variable names follow the convention
``kind.asset.t[.block]`` (e.g. ``p.U1.7`` or ``dp.U1.7.0``) so that solutions
can be inspected and tested without holding on to variable handles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

INF = math.inf

#: Absolute tolerance for treating a solver value as binary / feasible.
FEAS_TOL = 1e-6


@dataclass
class Solution:
    """Outcome of one solve: status, objective and named variable values."""

    status: str                    # optimal | feasible_gap | infeasible | error
    objective: float
    values: dict[str, float] = field(default_factory=dict)
    gap: float = 0.0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible_gap")


class NonConvexCostError(ValueError):
    """Raised when a unit's marginal-cost blocks are not non-decreasing."""


class LinearModel:
    """Container for a MILP: variables, range constraints, linear objective."""

    def __init__(self, name: str = "model", sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        self.name = name
        self.sense = sense
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._binary: list[bool] = []
        self._obj: dict[int, float] = {}
        self.obj_const = 0.0
        # constraints in range form: lo <= sum(coef * var) <= hi
        self._rows: list[dict[int, float]] = []
        self._row_lo: list[float] = []
        self._row_hi: list[float] = []
        self._row_names: list[str] = []

    # ------------------------------------------------------------------
    # variables
    # ------------------------------------------------------------------

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if lb > ub:
            raise ValueError(f"variable {name!r} has lb {lb} > ub {ub}")
        i = len(self._names)
        self._names.append(name)
        self._index[name] = i
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._binary.append(False)
        return i

    def add_binary(self, name: str) -> int:
        i = self.add_var(name, 0.0, 1.0)
        self._binary[i] = True
        return i

    def var(self, name: str) -> int:
        return self._index[name]

    def has_var(self, name: str) -> bool:
        return name in self._index

    @property
    def num_vars(self) -> int:
        return len(self._names)

    @property
    def num_constraints(self) -> int:
        return len(self._rows)

    @property
    def variable_names(self) -> list[str]:
        return list(self._names)

    # ------------------------------------------------------------------
    # constraints and objective
    # ------------------------------------------------------------------

    def add_range(self, coefs: dict[int, float], lo: float, hi: float,
                  name: str = "") -> int:
        for i in coefs:
            if not 0 <= i < len(self._names):
                raise ValueError(f"constraint references undeclared variable index {i}")
        if lo > hi:
            raise ValueError(f"constraint {name or len(self._rows)} has lo {lo} > hi {hi}")
        self._rows.append(dict(coefs))
        self._row_lo.append(float(lo))
        self._row_hi.append(float(hi))
        self._row_names.append(name or f"c{len(self._rows)}")
        return len(self._rows) - 1

    def add_eq(self, coefs: dict[int, float], rhs: float, name: str = "") -> int:
        return self.add_range(coefs, rhs, rhs, name)

    def add_le(self, coefs: dict[int, float], rhs: float, name: str = "") -> int:
        return self.add_range(coefs, -INF, rhs, name)

    def add_ge(self, coefs: dict[int, float], rhs: float, name: str = "") -> int:
        return self.add_range(coefs, rhs, INF, name)

    def add_objective(self, var: int, coef: float) -> None:
        self._obj[var] = self._obj.get(var, 0.0) + coef

    def add_objective_terms(self, terms: dict[int, float]) -> None:
        for v, coef in terms.items():
            self.add_objective(v, coef)

    # ------------------------------------------------------------------
    # solve support
    # ------------------------------------------------------------------

    def objective_value(self, values: dict[str, float]) -> float:
        total = self.obj_const
        for i, coef in self._obj.items():
            total += coef * values[self._names[i]]
        return total

    def max_violation(self, values: dict[str, float]) -> float:
        """Largest absolute constraint/bound violation for the given point."""
        x = np.array([values[n] for n in self._names])
        worst = 0.0
        for i in range(len(self._names)):
            worst = max(worst, self._lb[i] - x[i], x[i] - self._ub[i])
        for row, lo, hi in zip(self._rows, self._row_lo, self._row_hi):
            v = sum(coef * x[i] for i, coef in row.items())
            worst = max(worst, lo - v, v - hi)
        return max(worst, 0.0)

    def _arrays(self):
        n = len(self._names)
        c = np.zeros(n)
        for i, coef in self._obj.items():
            c[i] = coef
        if self.sense == "max":
            c = -c
        integrality = np.array([1 if b else 0 for b in self._binary])
        bounds = Bounds(np.array(self._lb), np.array(self._ub))
        if self._rows:
            data, ri, ci = [], [], []
            for r, row in enumerate(self._rows):
                for i, coef in row.items():
                    ri.append(r)
                    ci.append(i)
                    data.append(coef)
            a = sparse.coo_matrix((data, (ri, ci)), shape=(len(self._rows), n)).tocsc()
            constraint = LinearConstraint(a, np.array(self._row_lo), np.array(self._row_hi))
        else:
            constraint = None
        return c, integrality, bounds, constraint

    # ------------------------------------------------------------------
    # LP text dump
    # ------------------------------------------------------------------

    def to_lp_string(self) -> str:
        """Render the model in LP text format (objective, constraints, bounds, binaries)."""
        def term(coef, name, first):
            sign = "-" if coef < 0 else ("" if first else "+")
            return f"{sign} {abs(coef):.12g} {name}"

        lines = [r"\ " + self.name, "Minimize" if self.sense == "min" else "Maximize"]
        parts = [term(c, self._names[i], k == 0)
                 for k, (i, c) in enumerate(sorted(self._obj.items())) if c != 0.0]
        lines.append(" obj: " + (" ".join(parts) if parts else "0 " + (self._names[0] if self._names else "x")))
        lines.append("Subject To")
        for row, lo, hi, rname in zip(self._rows, self._row_lo, self._row_hi, self._row_names):
            body = " ".join(term(c, self._names[i], k == 0)
                            for k, (i, c) in enumerate(sorted(row.items())))
            if lo == hi:
                lines.append(f" {rname}: {body} = {lo:.12g}")
            else:
                if hi < INF:
                    lines.append(f" {rname}.ub: {body} <= {hi:.12g}")
                if lo > -INF:
                    lines.append(f" {rname}.lb: {body} >= {lo:.12g}")
        lines.append("Bounds")
        for i, name in enumerate(self._names):
            if self._binary[i]:
                continue
            lo, hi = self._lb[i], self._ub[i]
            hi_s = f"{hi:.12g}" if hi < INF else "+inf"
            lines.append(f" {lo:.12g} <= {name} <= {hi_s}")
        binaries = [n for i, n in enumerate(self._names) if self._binary[i]]
        if binaries:
            lines.append("Binaries")
            lines.extend(f" {n}" for n in binaries)
        lines.append("End")
        return "\n".join(lines) + "\n"


def write_lp(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model.to_lp_string())


def solve(model: LinearModel, gap_tolerance: float = 1e-4,
          time_limit: float = 60.0) -> Solution:
    """Solve a model with HiGHS; infeasibility is a status, not an exception."""
    if model.num_vars == 0:
        return Solution("optimal", model.obj_const)
    c, integrality, bounds, constraint = model._arrays()
    try:
        res = milp(
            c,
            constraints=constraint,
            integrality=integrality,
            bounds=bounds,
            options={"mip_rel_gap": gap_tolerance, "time_limit": float(time_limit),
                     "presolve": True},
        )
    except Exception as exc:  # backend failure, not a model outcome
        return Solution("error", math.nan, message=str(exc))

    if res.status == 2:
        return Solution("infeasible", math.nan, message=res.message)
    if res.x is None:
        return Solution("error", math.nan, message=res.message)

    values = {}
    for i, name in enumerate(model._names):
        v = float(res.x[i])
        if integrality[i]:
            r = round(v)
            if abs(v - r) <= FEAS_TOL:
                v = float(r)
        values[name] = v
    obj = float(res.fun)
    if model.sense == "max":
        obj = -obj
    obj += model.obj_const
    gap = float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else 0.0
    status = "optimal" if res.status == 0 else "feasible_gap"
    return Solution(status, obj, values, gap, res.message)


# ----------------------------------------------------------------------
# piecewise-linear production cost
# ----------------------------------------------------------------------

def check_convex_blocks(cost_blocks) -> None:
    """Validate that marginal costs are non-negative and non-decreasing."""
    last = -INF
    for width, marginal in cost_blocks:
        if width <= 0:
            raise NonConvexCostError(f"block width {width} must be positive")
        if marginal < 0:
            raise NonConvexCostError(f"marginal cost {marginal} must be non-negative")
        if marginal < last:
            raise NonConvexCostError(
                f"marginal costs must be non-decreasing, got {marginal} after {last}")
        last = marginal


def add_piecewise_cost(model: LinearModel, unit, intervals) -> dict:
    """Wire a unit's convex block cost into the model for the given intervals.

    Creates ``p.<id>.<t>`` and ``st.<id>.<t>`` if absent, one ``dp.<id>.<t>.<b>``
    per block bounded by the block width, ties them together with
    ``p = p_min*st + sum(dp)`` and charges ``cost_at_pmin*st + sum(g_b*dp_b)``
    to the objective.  Returns ``{(t, b): var_index}`` for the block variables.

    The convex ordering means the solver fills cheap blocks first on its own;
    non-convex blocks are rejected because that property would break.
    """
    check_convex_blocks(unit.cost_blocks)
    handles = {}
    for t in intervals:
        p_name = f"p.{unit.id}.{t}"
        st_name = f"st.{unit.id}.{t}"
        p = model.var(p_name) if model.has_var(p_name) else model.add_var(p_name, 0.0, unit.p_max)
        st = model.var(st_name) if model.has_var(st_name) else model.add_binary(st_name)
        identity = {p: 1.0, st: -unit.p_min}
        for b, (width, marginal) in enumerate(unit.cost_blocks):
            dp = model.add_var(f"dp.{unit.id}.{t}.{b}", 0.0, width)
            identity[dp] = -1.0
            model.add_objective(dp, marginal)
            handles[(t, b)] = dp
        model.add_objective(st, unit.cost_at_pmin)
        model.add_eq(identity, 0.0, name=f"blocks.{unit.id}.{t}")
    return handles
