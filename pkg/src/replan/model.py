"""Generic MILP model representation with relaxability and KPI annotations.

Variables are referenced by integer handles returned from ``Model.add_variable``.
All expressions are linear; the internal objective sense is always minimize
(maximization is expressed by negating the expression at build time).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"
_KINDS = (CONTINUOUS, INTEGER, BINARY)

LE = "<="
EQ = "="
GE = ">="
_SENSES = (LE, EQ, GE)

DEFAULT_FEAS_TOL = 1e-6
DEFAULT_INT_TOL = 1e-6


class ModelError(ValueError):
    """Raised on malformed model construction or evaluation."""


class Status(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    LIMIT_REACHED = "LimitReached"


@dataclass(frozen=True)
class VarSpec:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf

    def validate(self) -> None:
        if self.kind not in _KINDS:
            raise ModelError(f"unknown variable kind {self.kind!r}")
        if self.lower > self.upper:
            raise ModelError(
                f"variable {self.name!r}: lower {self.lower} > upper {self.upper}"
            )
        if self.kind == BINARY and (self.lower < 0 or self.upper > 1):
            raise ModelError(f"binary variable {self.name!r} must have bounds in [0, 1]")


class LinExpr:
    """Linear expression: sum of coefficient*variable terms plus a constant.

    Duplicate terms are merged at insertion and zero coefficients dropped,
    keeping expressions canonical for serialization.
    """

    __slots__ = ("coeffs", "constant")

    def __init__(self, terms: Optional[Iterable[tuple[float, int]]] = None, constant: float = 0.0):
        self.coeffs: dict[int, float] = {}
        self.constant = float(constant)
        if terms:
            for coef, var in terms:
                self.add_term(coef, var)

    def add_term(self, coef: float, var: int) -> "LinExpr":
        c = self.coeffs.get(var, 0.0) + float(coef)
        if c == 0.0:
            self.coeffs.pop(var, None)
        else:
            self.coeffs[var] = c
        return self

    def copy(self) -> "LinExpr":
        e = LinExpr(constant=self.constant)
        e.coeffs = dict(self.coeffs)
        return e

    def __add__(self, other):
        e = self.copy()
        if isinstance(other, LinExpr):
            for v, c in other.coeffs.items():
                e.add_term(c, v)
            e.constant += other.constant
        else:
            e.constant += float(other)
        return e

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, LinExpr) else -float(other))

    def __mul__(self, scalar: float) -> "LinExpr":
        s = float(scalar)
        e = LinExpr(constant=self.constant * s)
        if s != 0.0:
            e.coeffs = {v: c * s for v, c in self.coeffs.items()}
        return e

    __rmul__ = __mul__

    def __neg__(self) -> "LinExpr":
        return self * -1.0

    def terms(self) -> list[tuple[float, int]]:
        return [(self.coeffs[v], v) for v in sorted(self.coeffs)]

    def __repr__(self):
        parts = [f"{c:+g}*v{v}" for c, v in self.terms()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return "LinExpr(" + " ".join(parts) + ")"


@dataclass
class ConstraintSpec:
    name: str
    expr: LinExpr
    sense: str
    rhs: float
    relax_penalty: Optional[float] = None

    def validate(self) -> None:
        if self.sense not in _SENSES:
            raise ModelError(f"constraint {self.name!r}: unknown sense {self.sense!r}")
        if self.relax_penalty is not None:
            if not math.isfinite(self.relax_penalty) or self.relax_penalty < 0:
                raise ModelError(
                    f"constraint {self.name!r}: relax penalty must be finite and >= 0"
                )


@dataclass
class Kpi:
    name: str
    expr: LinExpr


@dataclass
class Solution:
    status: Status
    values: dict[int, float] = field(default_factory=dict)
    objective_value: Optional[float] = None

    @property
    def is_valued(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class FeasibilityViolation:
    """One feasibility breach: a constraint, a variable bound, or integrality."""

    kind: str  # "constraint" | "bound" | "integrality"
    name: str
    amount: float

    def __str__(self):
        return f"{self.kind}:{self.name} by {self.amount:g}"


class Model:
    """Mutable while building; ``freeze()`` makes it immutable and shareable."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[VarSpec] = []
        self.constraints: list[ConstraintSpec] = []
        self.objective: LinExpr = LinExpr()
        self.kpis: list[Kpi] = []
        # optional per-variable decision start time, used by freeze-horizon rules
        self.var_start_time: dict[int, float] = {}
        self._var_index: dict[str, int] = {}
        self._cons_index: dict[str, int] = {}
        self._frozen = False

    # -- construction -------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise ModelError("model is frozen")

    def add_variable(self, spec: VarSpec, start_time: Optional[float] = None) -> int:
        self._check_mutable()
        spec = replace(spec, lower=float(spec.lower), upper=float(spec.upper))
        spec.validate()
        if spec.name in self._var_index:
            raise ModelError(f"duplicate variable name {spec.name!r}")
        handle = len(self.variables)
        self.variables.append(spec)
        self._var_index[spec.name] = handle
        if start_time is not None:
            self.var_start_time[handle] = float(start_time)
        return handle

    def _check_expr(self, expr: LinExpr, where: str):
        for v in expr.coeffs:
            if not (0 <= v < len(self.variables)):
                raise ModelError(f"{where} references unregistered variable handle {v}")

    def add_constraint(
        self,
        name: str,
        expr: LinExpr,
        sense: str,
        rhs: float,
        relax_penalty: Optional[float] = None,
    ) -> int:
        self._check_mutable()
        if name in self._cons_index:
            raise ModelError(f"duplicate constraint name {name!r}")
        spec = ConstraintSpec(name, expr.copy(), sense, float(rhs), relax_penalty)
        spec.validate()
        self._check_expr(spec.expr, f"constraint {name!r}")
        handle = len(self.constraints)
        self.constraints.append(spec)
        self._cons_index[name] = handle
        return handle

    def set_objective(self, expr: LinExpr) -> None:
        self._check_mutable()
        self._check_expr(expr, "objective")
        self.objective = expr.copy()

    def add_kpi(self, name: str, expr: LinExpr) -> None:
        self._check_mutable()
        if any(k.name == name for k in self.kpis):
            raise ModelError(f"duplicate KPI name {name!r}")
        self._check_expr(expr, f"KPI {name!r}")
        self.kpis.append(Kpi(name, expr.copy()))

    def freeze(self) -> "Model":
        self._frozen = True
        return self

    # -- lookup --------------------------------------------------------

    def var_handle(self, name: str) -> int:
        return self._var_index[name]

    def var_name(self, handle: int) -> str:
        return self.variables[handle].name

    def has_var(self, name: str) -> bool:
        return name in self._var_index

    def constraint_handle(self, name: str) -> int:
        return self._cons_index[name]

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def integer_handles(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.kind in (INTEGER, BINARY)]

    def clone(self, name: Optional[str] = None) -> "Model":
        """Deep, unfrozen copy."""
        m = Model(name or self.name)
        for i, v in enumerate(self.variables):
            m.add_variable(v, start_time=self.var_start_time.get(i))
        for c in self.constraints:
            m.add_constraint(c.name, c.expr, c.sense, c.rhs, c.relax_penalty)
        m.set_objective(self.objective)
        for k in self.kpis:
            m.add_kpi(k.name, k.expr)
        return m

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        def num(x):
            if x == math.inf:
                return None
            if x == -math.inf:
                return None
            return x

        def expr_d(e: LinExpr):
            return {"terms": [[c, v] for c, v in e.terms()], "constant": e.constant}

        return {
            "name": self.name,
            "variables": [
                {
                    "id": i,
                    "name": v.name,
                    "kind": v.kind,
                    "lower": num(v.lower),
                    "upper": num(v.upper),
                    **(
                        {"start_time": self.var_start_time[i]}
                        if i in self.var_start_time
                        else {}
                    ),
                }
                for i, v in enumerate(self.variables)
            ],
            "constraints": [
                {
                    "id": i,
                    "name": c.name,
                    "expr": expr_d(c.expr),
                    "sense": c.sense,
                    "rhs": c.rhs,
                    **(
                        {"relax": {"penalty_per_unit": c.relax_penalty}}
                        if c.relax_penalty is not None
                        else {}
                    ),
                }
                for i, c in enumerate(self.constraints)
            ],
            "objective": {"sense": "minimize", "expr": expr_d(self.objective)},
            "kpis": [{"name": k.name, "expr": expr_d(k.expr)} for k in self.kpis],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "Model":
        m = cls(d.get("name", "model"))

        def bound(x, default):
            return default if x is None else float(x)

        def expr(ed):
            return LinExpr([(c, v) for c, v in ed["terms"]], ed.get("constant", 0.0))

        for vd in d["variables"]:
            m.add_variable(
                VarSpec(
                    vd["name"],
                    vd.get("kind", CONTINUOUS),
                    bound(vd.get("lower", 0.0), -math.inf),
                    bound(vd.get("upper"), math.inf),
                ),
                start_time=vd.get("start_time"),
            )
        for cd in d["constraints"]:
            relax = cd.get("relax")
            m.add_constraint(
                cd["name"],
                expr(cd["expr"]),
                cd["sense"],
                cd["rhs"],
                relax["penalty_per_unit"] if relax else None,
            )
        m.set_objective(expr(d["objective"]["expr"]))
        for kd in d.get("kpis", []):
            m.add_kpi(kd["name"], expr(kd["expr"]))
        return m


# -- evaluation ---------------------------------------------------------


def evaluate_expr(expr: LinExpr, solution: Solution | dict[int, float]) -> float:
    values = solution.values if isinstance(solution, Solution) else solution
    total = expr.constant
    for v, c in expr.coeffs.items():
        if v not in values:
            raise ModelError(f"variable handle {v} has no value in solution")
        total += c * values[v]
    return total


def violation(constraint: ConstraintSpec, solution: Solution | dict[int, float]) -> float:
    lhs = evaluate_expr(constraint.expr, solution)
    if constraint.sense == LE:
        return max(0.0, lhs - constraint.rhs)
    if constraint.sense == GE:
        return max(0.0, constraint.rhs - lhs)
    return abs(lhs - constraint.rhs)


def check_feasible(
    model: Model, solution: Solution | dict[int, float], tol: float = DEFAULT_FEAS_TOL
) -> list[FeasibilityViolation]:
    """All constraint, bound and integrality breaches above tol."""
    if tol <= 0:
        raise ModelError("tolerance must be > 0")
    values = solution.values if isinstance(solution, Solution) else solution
    out: list[FeasibilityViolation] = []
    for c in model.constraints:
        amt = violation(c, values)
        if amt > tol:
            out.append(FeasibilityViolation("constraint", c.name, amt))
    for i, v in enumerate(model.variables):
        if i not in values:
            raise ModelError(f"variable {v.name!r} has no value in solution")
        x = values[i]
        breach = max(v.lower - x, x - v.upper)
        if breach > tol:
            out.append(FeasibilityViolation("bound", v.name, breach))
        if v.kind in (INTEGER, BINARY):
            frac = abs(x - round(x))
            if frac > tol:
                out.append(FeasibilityViolation("integrality", v.name, frac))
    return out


def kpi_report(model: Model, solution: Solution) -> dict[str, float]:
    if not solution.is_valued:
        raise ModelError(f"cannot report KPIs on a {solution.status.value} solution")
    return {k.name: evaluate_expr(k.expr, solution) for k in sorted(model.kpis, key=lambda k: k.name)}
