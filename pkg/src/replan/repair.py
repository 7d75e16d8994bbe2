"""Scenario repair: disruption events, frozen variables, relaxable
constraints and the KPI-weighted repair objective.

``build_repair_model`` takes a perturbed model plus an incumbent value map
(keyed by variable name) and produces an elasticized MILP whose objective
trades off original cost, deviation from the incumbent and constraint
violation penalties. ``repair_exact`` solves it with the kernel.
"""

from __future__ import annotations

import fnmatch
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .kernel import SolveParams, SolveStats, solve_milp
from .model import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    INTEGER,
    LE,
    LinExpr,
    Model,
    Solution,
    Status,
    VarSpec,
    evaluate_expr,
)
from .production import Order, ProductionInstance
from .tail import Flight, Timetable, Unavailability

DEFAULT_RELAX_PENALTY = 10000.0


class RepairError(ValueError):
    pass


# -- disruption events ---------------------------------------------------


@dataclass(frozen=True)
class FlightDelay:
    flight: str
    new_dep: int
    new_arr: int


@dataclass(frozen=True)
class FlightCancellation:
    flight: str


@dataclass(frozen=True)
class AircraftUnavailability:
    aircraft: str
    from_minute: int
    to_minute: int


@dataclass(frozen=True)
class PriorityChange:
    customer: str
    new_priority: int


@dataclass(frozen=True)
class NewOrder:
    order: Order


Event = Union[FlightDelay, FlightCancellation, AircraftUnavailability, PriorityChange, NewOrder]


def event_to_dict(e: Event) -> dict:
    if isinstance(e, FlightDelay):
        return {"type": "flight_delay", "flight": e.flight, "dep": e.new_dep, "arr": e.new_arr}
    if isinstance(e, FlightCancellation):
        return {"type": "flight_cancellation", "flight": e.flight}
    if isinstance(e, AircraftUnavailability):
        return {"type": "aircraft_unavailability", "aircraft": e.aircraft,
                "from": e.from_minute, "to": e.to_minute}
    if isinstance(e, PriorityChange):
        return {"type": "priority_change", "customer": e.customer, "priority": e.new_priority}
    if isinstance(e, NewOrder):
        o = e.order
        return {"type": "new_order",
                "order": {"id": o.id, "customer": o.customer, "product": o.product,
                          "due": o.due, "quantity": o.quantity, "priority": o.priority}}
    raise RepairError(f"unknown event {e!r}")


def event_from_dict(d: dict) -> Event:
    try:
        t = d["type"]
        if t == "flight_delay":
            return FlightDelay(d["flight"], int(d["dep"]), int(d["arr"]))
        if t == "flight_cancellation":
            return FlightCancellation(d["flight"])
        if t == "aircraft_unavailability":
            return AircraftUnavailability(d["aircraft"], int(d["from"]), int(d["to"]))
        if t == "priority_change":
            return PriorityChange(d["customer"], int(d["priority"]))
        if t == "new_order":
            o = d["order"]
            return NewOrder(Order(o["id"], o["customer"], o["product"], int(o["due"]),
                                  float(o["quantity"]), int(o["priority"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise RepairError(f"malformed event {d!r}: {exc}") from exc
    raise RepairError(f"unknown event type {t!r}")


@dataclass(frozen=True)
class Scenario:
    id: str
    events: tuple[Event, ...] = ()
    weight: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.weight) or self.weight < 0:
            raise RepairError(f"scenario {self.id}: weight must be finite and >= 0")

    def to_dict(self) -> dict:
        return {"id": self.id, "weight": self.weight,
                "events": [event_to_dict(e) for e in self.events]}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(d["id"], tuple(event_from_dict(e) for e in d.get("events", [])),
                   float(d.get("weight", 1.0)))


# -- scenario application --------------------------------------------------


def _apply_tail_event(tt: Timetable, event: Event) -> Timetable:
    if isinstance(event, FlightDelay):
        if event.new_dep >= event.new_arr:
            raise RepairError(f"delay of {event.flight}: dep {event.new_dep} >= arr {event.new_arr}")
        old = tt.flight(event.flight)
        flights = tuple(
            Flight(f.id, f.origin, f.destination, event.new_dep, event.new_arr)
            if f.id == old.id else f
            for f in tt.flights
        )
        return replace(tt, flights=flights)
    if isinstance(event, FlightCancellation):
        tt.flight(event.flight)  # raises on unknown id
        return replace(tt, flights=tuple(f for f in tt.flights if f.id != event.flight))
    if isinstance(event, AircraftUnavailability):
        tt.craft(event.aircraft)
        return replace(
            tt,
            unavailabilities=tt.unavailabilities
            + (Unavailability(event.aircraft, event.from_minute, event.to_minute),),
        )
    raise RepairError(f"event {type(event).__name__} does not apply to a timetable")


def _apply_production_event(inst: ProductionInstance, event: Event) -> ProductionInstance:
    if isinstance(event, PriorityChange):
        if not any(l.id == event.customer for l in inst.locations):
            raise RepairError(f"unknown customer {event.customer!r}")
        orders = tuple(
            replace(o, priority=event.new_priority) if o.customer == event.customer else o
            for o in inst.orders
        )
        return inst.with_orders(orders)
    if isinstance(event, NewOrder):
        if any(o.id == event.order.id for o in inst.orders):
            raise RepairError(f"duplicate order id {event.order.id!r}")
        return inst.with_orders(inst.orders + (event.order,))
    raise RepairError(f"event {type(event).__name__} does not apply to a production instance")


def apply_scenario(instance, scenario: Scenario):
    """Return a perturbed copy; events apply in list order and the original
    instance is never modified."""
    out = instance
    for event in scenario.events:
        if isinstance(out, Timetable):
            out = _apply_tail_event(out, event)
        elif isinstance(out, ProductionInstance):
            out = _apply_production_event(out, event)
        else:
            raise RepairError(f"unsupported instance type {type(out).__name__}")
    return out


# -- repair spec -----------------------------------------------------------


@dataclass(frozen=True)
class RelaxRule:
    pattern: str
    penalty: Optional[float] = None


@dataclass(frozen=True)
class RepairSpec:
    freeze_patterns: tuple[str, ...] = ()
    freeze_horizon: Optional[float] = None
    relax: tuple[RelaxRule, ...] = ()
    w_cost: float = 1.0
    w_dev: float = 1.0
    w_dev_cont: float = 0.0

    def __post_init__(self):
        if self.w_cost < 0 or self.w_dev < 0 or self.w_dev_cont < 0:
            raise RepairError("repair weights must be >= 0")
        if self.w_cost == 0 and self.w_dev == 0:
            raise RepairError("at least one of w_cost, w_dev must be positive")

    def to_dict(self) -> dict:
        return {
            "freeze": {
                **({"patterns": list(self.freeze_patterns)} if self.freeze_patterns else {}),
                **({"freeze_horizon": self.freeze_horizon}
                   if self.freeze_horizon is not None else {}),
            },
            "relax": [
                {"pattern": r.pattern, **({"penalty": r.penalty} if r.penalty is not None else {})}
                for r in self.relax
            ],
            "weights": {"w_cost": self.w_cost, "w_dev": self.w_dev,
                        "w_dev_cont": self.w_dev_cont},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RepairSpec":
        freeze = d.get("freeze", {})
        weights = d.get("weights", {})
        return cls(
            freeze_patterns=tuple(freeze.get("patterns", [])),
            freeze_horizon=freeze.get("freeze_horizon"),
            relax=tuple(RelaxRule(r["pattern"], r.get("penalty")) for r in d.get("relax", [])),
            w_cost=float(weights.get("w_cost", 1.0)),
            w_dev=float(weights.get("w_dev", 1.0)),
            w_dev_cont=float(weights.get("w_dev_cont", 0.0)),
        )


# -- repair model -----------------------------------------------------------


@dataclass
class RepairModel:
    model: Model
    base_num_variables: int  # variables shared with the perturbed model
    original_objective: LinExpr
    incumbent: dict[int, float]  # shared handle -> incumbent value
    shared_binaries: list[int]
    frozen: set[int]
    slack_penalties: list[tuple[int, float]]  # (slack handle, penalty per unit)
    dev_bin_expr: LinExpr
    dev_cont_expr: LinExpr
    spec: RepairSpec
    warnings: list[str] = field(default_factory=list)
    forced_unfreeze: list[str] = field(default_factory=list)


@dataclass
class RepairResult:
    solution: Solution
    kpis: dict[str, float]
    diff: list[dict]
    stats: SolveStats
    trajectory: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.solution.status.value,
            "kpis": self.kpis,
            "diff": self.diff,
            "stats": self.stats.to_dict(),
            "trajectory": self.trajectory,
        }


def resolve_relax_penalties(
    model: Model, spec: RepairSpec, warnings: Optional[list[str]] = None
) -> dict[int, float]:
    """Which constraints become elastic in repair mode, and at what per-unit
    penalty: annotated relaxable constraints by default, spec rules may add
    constraints or override penalties."""
    if warnings is None:
        warnings = []
    penalties: dict[int, float] = {}
    for i, cons in enumerate(model.constraints):
        if cons.relax_penalty is not None:
            penalties[i] = cons.relax_penalty
    for rule in spec.relax:
        hits = [i for i, c in enumerate(model.constraints)
                if fnmatch.fnmatchcase(c.name, rule.pattern)]
        if not hits:
            warnings.append(f"relax pattern {rule.pattern!r} matched no constraints")
        for i in hits:
            if rule.penalty is not None:
                penalties[i] = rule.penalty
            elif i not in penalties:
                warnings.append(
                    f"constraint {model.constraints[i].name!r} relaxed without a penalty; "
                    f"using default {DEFAULT_RELAX_PENALTY}"
                )
                penalties[i] = DEFAULT_RELAX_PENALTY
    return penalties


def build_repair_model(
    perturbed: Model, incumbent: dict[str, float], spec: RepairSpec
) -> RepairModel:
    """Freeze, elasticize and re-weight the perturbed model around the incumbent."""
    rm = perturbed.clone("repair")
    warnings: list[str] = []
    forced: list[str] = []

    shared: dict[int, float] = {}
    for h in range(rm.num_variables):
        name = rm.var_name(h)
        if name in incumbent:
            shared[h] = float(incumbent[name])

    # freeze set: explicit patterns plus the time-horizon rule
    frozen: set[int] = set()
    for pat in spec.freeze_patterns:
        hits = [h for h in shared if fnmatch.fnmatchcase(rm.var_name(h), pat)]
        if not hits:
            warnings.append(f"freeze pattern {pat!r} matched no variables")
        frozen.update(hits)
    if spec.freeze_horizon is not None:
        frozen.update(
            h for h in shared
            if h in rm.var_start_time and rm.var_start_time[h] < spec.freeze_horizon
        )

    for h in sorted(frozen.copy()):
        v = rm.variables[h]
        val = shared[h]
        if v.kind in (BINARY, INTEGER):
            val = float(round(val))
        if val < v.lower - 1e-9 or val > v.upper + 1e-9:
            frozen.discard(h)
            forced.append(v.name)
            continue
        rm.variables[h] = replace(v, lower=val, upper=val)

    # elasticize: annotated relaxable constraints plus spec-selected ones
    penalties = resolve_relax_penalties(rm, spec, warnings)

    slack_penalties: list[tuple[int, float]] = []
    penalty_expr = LinExpr()
    for i in sorted(penalties):
        cons = rm.constraints[i]
        pen = penalties[i]
        if cons.sense == LE:
            s = rm.add_variable(VarSpecSlack(f"relax[{cons.name}]"))
            cons.expr.add_term(-1.0, s)
            slack_penalties.append((s, pen))
        elif cons.sense == GE:
            s = rm.add_variable(VarSpecSlack(f"relax[{cons.name}]"))
            cons.expr.add_term(1.0, s)
            slack_penalties.append((s, pen))
        else:
            sp = rm.add_variable(VarSpecSlack(f"relax+[{cons.name}]"))
            sn = rm.add_variable(VarSpecSlack(f"relax-[{cons.name}]"))
            cons.expr.add_term(-1.0, sp)
            cons.expr.add_term(1.0, sn)
            slack_penalties.append((sp, pen))
            slack_penalties.append((sn, pen))
    for s, pen in slack_penalties:
        penalty_expr.add_term(pen, s)

    # deviation terms
    shared_binaries = sorted(
        h for h in shared if rm.variables[h].kind == BINARY and h < perturbed.num_variables
    )
    dev_bin = LinExpr()
    for h in shared_binaries:
        if h in frozen:
            continue
        xbar = round(shared[h])
        if xbar >= 1:
            dev_bin.constant += 1.0
            dev_bin.add_term(-1.0, h)
        else:
            dev_bin.add_term(1.0, h)

    dev_cont = LinExpr()
    if spec.w_dev_cont > 0:
        for h in sorted(shared):
            v = rm.variables[h]
            if v.kind == BINARY or h in frozen:
                continue
            name = v.name
            dp = rm.add_variable(VarSpecSlack(f"dev+[{name}]"))
            dn = rm.add_variable(VarSpecSlack(f"dev-[{name}]"))
            link = LinExpr([(1.0, h), (-1.0, dp), (1.0, dn)])
            rm.add_constraint(f"devlink[{name}]", link, EQ, shared[h])
            dev_cont.add_term(1.0, dp)
            dev_cont.add_term(1.0, dn)

    original_objective = perturbed.objective.copy()
    repair_objective = (
        original_objective * spec.w_cost
        + dev_bin * spec.w_dev
        + dev_cont * spec.w_dev_cont
        + penalty_expr
    )
    rm.set_objective(repair_objective)
    rm.add_kpi("original_objective", original_objective)
    rm.add_kpi("deviation_count", dev_bin)
    rm.add_kpi("violation_penalty_total", penalty_expr)
    rm.add_kpi("repair_objective", repair_objective)
    rm.freeze()

    return RepairModel(
        model=rm,
        base_num_variables=perturbed.num_variables,
        original_objective=original_objective,
        incumbent=shared,
        shared_binaries=shared_binaries,
        frozen=frozen,
        slack_penalties=slack_penalties,
        dev_bin_expr=dev_bin,
        dev_cont_expr=dev_cont,
        spec=spec,
        warnings=warnings,
        forced_unfreeze=forced,
    )


def VarSpecSlack(name: str) -> VarSpec:
    return VarSpec(name, CONTINUOUS, 0.0, math.inf)


def incumbent_projection(rm: RepairModel) -> Solution:
    """The incumbent lifted into the repair model: shared variables at their
    incumbent values, new variables at their nearest bound to zero, slacks
    absorbing every relaxed-constraint violation."""
    values: dict[int, float] = {}
    model = rm.model
    aux = {s for s, _ in rm.slack_penalties}
    for h in range(model.num_variables):
        if h in rm.incumbent:
            values[h] = rm.incumbent[h]
        else:
            v = model.variables[h]
            values[h] = min(max(0.0, v.lower), v.upper)
    # slacks take exactly the residual of their constraint
    slack_of: dict[int, list[int]] = {}
    for i, cons in enumerate(model.constraints):
        for s in cons.expr.coeffs:
            if s in aux:
                slack_of.setdefault(i, []).append(s)
    for i, slacks in slack_of.items():
        cons = model.constraints[i]
        for s in slacks:
            values[s] = 0.0
        lhs = evaluate_expr(cons.expr, values)
        resid = lhs - cons.rhs
        if cons.sense == LE and resid > 0:
            values[slacks[0]] = resid
        elif cons.sense == GE and resid < 0:
            values[slacks[0]] = -resid
        elif cons.sense == EQ and len(slacks) == 2:
            sp, sn = slacks
            if resid > 0:
                values[sp] = resid
            elif resid < 0:
                values[sn] = -resid
    # deviation link variables stay at zero: x - x̄ = 0 at the incumbent
    obj = evaluate_expr(model.objective, values)
    return Solution(Status.FEASIBLE, values, obj)


def deviation_count(rm: RepairModel, solution: Solution, int_tol: float = 1e-6) -> int:
    n = 0
    for h in rm.shared_binaries:
        if abs(solution.values.get(h, 0.0) - rm.incumbent[h]) > 0.5:
            n += 1
    return n


def result_kpis(rm: RepairModel, solution: Solution) -> dict[str, float]:
    kpis = {}
    for k in rm.model.kpis:
        kpis[k.name] = evaluate_expr(k.expr, solution)
    kpis["deviation_count"] = float(deviation_count(rm, solution))
    return dict(sorted(kpis.items()))


def variable_diff(rm: RepairModel, solution: Solution, tol: float = 1e-6) -> list[dict]:
    out = []
    model = rm.model
    for h in sorted(rm.incumbent):
        old = rm.incumbent[h]
        new = solution.values.get(h, 0.0)
        if abs(new - old) > tol:
            out.append({"kind": "variable", "name": model.var_name(h),
                        "before": old, "after": new})
    return out


def repair_exact(rm: RepairModel, params: SolveParams | None = None) -> RepairResult:
    params = params or SolveParams()
    solution, stats = solve_milp(rm.model, params)
    if not solution.is_valued:
        return RepairResult(solution, {}, [], stats)
    kpis = result_kpis(rm, solution)
    return RepairResult(solution, kpis, variable_diff(rm, solution), stats)
