"""Multi-site, multi-period production / transport / inventory planning.

Orders at or above the priority threshold must be fully delivered in their
due period (hard equality, annotated relaxable for repair); lower-priority
orders may be shorted at a per-unit penalty. Quantities are continuous by
default; set ``integral_production`` to force integer production lots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .model import CONTINUOUS, INTEGER, LinExpr, Model, Solution, VarSpec

DEFAULT_HARD_ORDER_PENALTY = 1000.0

FLOW_IMBALANCE = "FlowImbalance"
CAPACITY_EXCEEDED = "CapacityExceeded"
HARD_ORDER_SHORTED = "HardOrderShorted"
NEGATIVE_QUANTITY = "NegativeQuantity"


class ProductionError(ValueError):
    pass


@dataclass(frozen=True)
class Location:
    id: str
    kind: str  # supplier | plant | customer


@dataclass(frozen=True)
class Lane:
    origin: str
    dest: str
    unit_cost: float
    capacity: float  # per period, summed over products


@dataclass(frozen=True)
class Capability:
    plant: str
    product: str
    unit_cost: float
    capacity: float  # per period


@dataclass(frozen=True)
class InventoryParam:
    location: str
    product: str
    holding_cost: float = 0.0
    initial_stock: float = 0.0
    target_level: Optional[float] = None
    shortfall_penalty: float = 0.0


@dataclass(frozen=True)
class Order:
    id: str
    customer: str
    product: str
    due: int
    quantity: float
    priority: int

    def validate(self, periods: int) -> None:
        if self.quantity <= 0:
            raise ProductionError(f"order {self.id}: quantity must be > 0")
        if not (1 <= self.due <= periods):
            raise ProductionError(f"order {self.id}: due period {self.due} outside horizon")


@dataclass(frozen=True)
class ProductionInstance:
    products: tuple[str, ...]
    locations: tuple[Location, ...]
    lanes: tuple[Lane, ...]
    capabilities: tuple[Capability, ...]
    inventory: tuple[InventoryParam, ...]
    orders: tuple[Order, ...]
    periods: int
    priority_threshold: int
    hard_order_penalty: float = DEFAULT_HARD_ORDER_PENALTY
    soft_order_penalty: float = 100.0
    integral_production: bool = False

    def __post_init__(self):
        if self.periods < 1:
            raise ProductionError("horizon must have at least one period")
        loc_ids = {l.id for l in self.locations}
        if len(loc_ids) != len(self.locations):
            raise ProductionError("duplicate location ids")
        for lane in self.lanes:
            if lane.origin not in loc_ids or lane.dest not in loc_ids:
                raise ProductionError(f"lane {lane.origin}->{lane.dest}: unknown endpoint")
            if lane.capacity < 0:
                raise ProductionError("lane capacity must be >= 0")
        for cap in self.capabilities:
            if cap.plant not in loc_ids:
                raise ProductionError(f"capability at unknown plant {cap.plant!r}")
            if cap.product not in self.products:
                raise ProductionError(f"capability for unknown product {cap.product!r}")
            if cap.capacity < 0:
                raise ProductionError("production capacity must be >= 0")
        order_ids = [o.id for o in self.orders]
        if len(set(order_ids)) != len(order_ids):
            raise ProductionError("duplicate order ids")
        for o in self.orders:
            o.validate(self.periods)
            if o.customer not in loc_ids:
                raise ProductionError(f"order {o.id}: unknown customer {o.customer!r}")
            if o.product not in self.products:
                raise ProductionError(f"order {o.id}: unknown product {o.product!r}")

    def is_hard(self, order: Order) -> bool:
        return order.priority >= self.priority_threshold

    def inv_param(self, location: str, product: str) -> InventoryParam:
        for p in self.inventory:
            if p.location == location and p.product == product:
                return p
        return InventoryParam(location, product)

    def with_orders(self, orders: tuple[Order, ...]) -> "ProductionInstance":
        return replace(self, orders=orders)

    # -- JSON ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "periods": self.periods,
            "priority_threshold": self.priority_threshold,
            "hard_order_penalty": self.hard_order_penalty,
            "soft_order_penalty": self.soft_order_penalty,
            "integral_production": self.integral_production,
            "products": list(self.products),
            "locations": [{"id": l.id, "kind": l.kind} for l in self.locations],
            "lanes": [
                {"from": l.origin, "to": l.dest, "unit_cost": l.unit_cost, "capacity": l.capacity}
                for l in self.lanes
            ],
            "capabilities": [
                {"plant": c.plant, "product": c.product, "unit_cost": c.unit_cost,
                 "capacity": c.capacity}
                for c in self.capabilities
            ],
            "inventory": [
                {
                    "location": p.location, "product": p.product,
                    "holding_cost": p.holding_cost, "initial_stock": p.initial_stock,
                    **({"target_level": p.target_level,
                        "shortfall_penalty": p.shortfall_penalty}
                       if p.target_level is not None else {}),
                }
                for p in self.inventory
            ],
            "orders": [
                {"id": o.id, "customer": o.customer, "product": o.product,
                 "due": o.due, "quantity": o.quantity, "priority": o.priority}
                for o in self.orders
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProductionInstance":
        try:
            return cls(
                products=tuple(d["products"]),
                locations=tuple(Location(l["id"], l["kind"]) for l in d["locations"]),
                lanes=tuple(
                    Lane(l["from"], l["to"], float(l.get("unit_cost", 0.0)),
                         float(l.get("capacity", math.inf)))
                    for l in d.get("lanes", [])
                ),
                capabilities=tuple(
                    Capability(c["plant"], c["product"], float(c.get("unit_cost", 0.0)),
                               float(c.get("capacity", math.inf)))
                    for c in d.get("capabilities", [])
                ),
                inventory=tuple(
                    InventoryParam(
                        p["location"], p["product"],
                        float(p.get("holding_cost", 0.0)),
                        float(p.get("initial_stock", 0.0)),
                        p.get("target_level"),
                        float(p.get("shortfall_penalty", 0.0)),
                    )
                    for p in d.get("inventory", [])
                ),
                orders=tuple(
                    Order(o["id"], o["customer"], o["product"], int(o["due"]),
                          float(o["quantity"]), int(o["priority"]))
                    for o in d.get("orders", [])
                ),
                periods=int(d["periods"]),
                priority_threshold=int(d["priority_threshold"]),
                hard_order_penalty=float(d.get("hard_order_penalty", DEFAULT_HARD_ORDER_PENALTY)),
                soft_order_penalty=float(d.get("soft_order_penalty", 100.0)),
                integral_production=bool(d.get("integral_production", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ProductionError(f"malformed production instance: {exc}") from exc


@dataclass
class ProductionPlan:
    production: dict[tuple[str, str, int], float]  # (plant, product, t)
    shipments: dict[tuple[str, str, str, int], float]  # (from, to, product, t)
    inventory: dict[tuple[str, str, int], float]  # (location, product, t)
    deliveries: dict[str, float]  # order id -> delivered quantity
    shortfalls: dict[str, float]  # order id -> shorted quantity

    def to_dict(self) -> dict:
        key = lambda parts: ",".join(str(p) for p in parts)
        return {
            "production": {key(k): v for k, v in sorted(self.production.items())},
            "shipments": {key(k): v for k, v in sorted(self.shipments.items())},
            "inventory": {key(k): v for k, v in sorted(self.inventory.items())},
            "deliveries": dict(sorted(self.deliveries.items())),
            "shortfalls": dict(sorted(self.shortfalls.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProductionPlan":
        def unkey3(s):
            parts = s.split(",")
            return (parts[0], parts[1], int(parts[2]))

        def unkey4(s):
            parts = s.split(",")
            return (parts[0], parts[1], parts[2], int(parts[3]))

        return cls(
            production={unkey3(k): v for k, v in d.get("production", {}).items()},
            shipments={unkey4(k): v for k, v in d.get("shipments", {}).items()},
            inventory={unkey3(k): v for k, v in d.get("inventory", {}).items()},
            deliveries=dict(d.get("deliveries", {})),
            shortfalls=dict(d.get("shortfalls", {})),
        )


# variable / constraint naming ------------------------------------------------

def prod_name(plant, product, t):
    return f"p[{plant},{product},{t}]"


def ship_name(frm, to, product, t):
    return f"ship[{frm},{to},{product},{t}]"


def inv_name(loc, product, t):
    return f"inv[{loc},{product},{t}]"


def deliv_name(order_id):
    return f"deliv[{order_id}]"


def short_name(order_id):
    return f"short[{order_id}]"


def fulfill_name(order_id):
    return f"fulfill[{order_id}]"


def formulate_model(instance: ProductionInstance) -> Model:
    """Flow-balance LP (MILP when production is integral)."""
    m = Model("production")
    T = instance.periods
    prod_kind = INTEGER if instance.integral_production else CONTINUOUS

    prod_cost = LinExpr()
    trans_cost = LinExpr()
    hold_cost = LinExpr()
    penalty_cost = LinExpr()
    short_qty = LinExpr()
    deliv_total = LinExpr()

    p_vars: dict[tuple[str, str, int], int] = {}
    for cap in instance.capabilities:
        for t in range(1, T + 1):
            h = m.add_variable(
                VarSpec(prod_name(cap.plant, cap.product, t), prod_kind, 0.0, cap.capacity),
                start_time=t,
            )
            p_vars[(cap.plant, cap.product, t)] = h
            prod_cost.add_term(cap.unit_cost, h)

    s_vars: dict[tuple[str, str, str, int], int] = {}
    for lane in instance.lanes:
        for prod in instance.products:
            for t in range(1, T + 1):
                h = m.add_variable(
                    VarSpec(ship_name(lane.origin, lane.dest, prod, t), CONTINUOUS, 0.0, math.inf),
                    start_time=t,
                )
                s_vars[(lane.origin, lane.dest, prod, t)] = h
                trans_cost.add_term(lane.unit_cost, h)

    i_vars: dict[tuple[str, str, int], int] = {}
    for loc in instance.locations:
        for prod in instance.products:
            par = instance.inv_param(loc.id, prod)
            for t in range(1, T + 1):
                h = m.add_variable(
                    VarSpec(inv_name(loc.id, prod, t), CONTINUOUS, 0.0, math.inf),
                    start_time=t,
                )
                i_vars[(loc.id, prod, t)] = h
                hold_cost.add_term(par.holding_cost, h)

    d_vars: dict[str, int] = {}
    u_vars: dict[str, int] = {}
    for o in instance.orders:
        d_vars[o.id] = m.add_variable(
            VarSpec(deliv_name(o.id), CONTINUOUS, 0.0, o.quantity), start_time=o.due
        )
        deliv_total.add_term(1.0, d_vars[o.id])
        if not instance.is_hard(o):
            u_vars[o.id] = m.add_variable(
                VarSpec(short_name(o.id), CONTINUOUS, 0.0, o.quantity), start_time=o.due
            )
            penalty_cost.add_term(instance.soft_order_penalty, u_vars[o.id])
            short_qty.add_term(1.0, u_vars[o.id])

    t_vars: dict[tuple[str, str], int] = {}
    for par in instance.inventory:
        if par.target_level is not None:
            h = m.add_variable(
                VarSpec(f"tshort[{par.location},{par.product}]", CONTINUOUS, 0.0, math.inf),
                start_time=T,
            )
            t_vars[(par.location, par.product)] = h
            penalty_cost.add_term(par.shortfall_penalty, h)

    # flow balance at every (location, product, period)
    for loc in instance.locations:
        for prod in instance.products:
            par = instance.inv_param(loc.id, prod)
            for t in range(1, T + 1):
                e = LinExpr([(1.0, i_vars[(loc.id, prod, t)])])
                rhs = 0.0
                if t == 1:
                    rhs += par.initial_stock
                else:
                    e.add_term(-1.0, i_vars[(loc.id, prod, t - 1)])
                if (loc.id, prod, t) in p_vars:
                    e.add_term(-1.0, p_vars[(loc.id, prod, t)])
                for lane in instance.lanes:
                    if lane.dest == loc.id:
                        e.add_term(-1.0, s_vars[(lane.origin, lane.dest, prod, t)])
                    if lane.origin == loc.id:
                        e.add_term(1.0, s_vars[(lane.origin, lane.dest, prod, t)])
                for o in instance.orders:
                    if o.customer == loc.id and o.product == prod and o.due == t:
                        e.add_term(1.0, d_vars[o.id])
                m.add_constraint(f"bal[{loc.id},{prod},{t}]", e, "=", rhs)

    # lane capacity per period across products
    for lane in instance.lanes:
        if math.isfinite(lane.capacity):
            for t in range(1, T + 1):
                e = LinExpr([(1.0, s_vars[(lane.origin, lane.dest, prod, t)])
                             for prod in instance.products])
                m.add_constraint(f"lcap[{lane.origin},{lane.dest},{t}]", e, "<=", lane.capacity)

    # order fulfillment
    for o in instance.orders:
        if instance.is_hard(o):
            m.add_constraint(
                fulfill_name(o.id),
                LinExpr([(1.0, d_vars[o.id])]),
                "=",
                o.quantity,
                relax_penalty=instance.hard_order_penalty,
            )
        else:
            m.add_constraint(
                fulfill_name(o.id),
                LinExpr([(1.0, d_vars[o.id]), (1.0, u_vars[o.id])]),
                "=",
                o.quantity,
            )

    # end-of-horizon inventory targets
    for (loc, prod), h in t_vars.items():
        par = instance.inv_param(loc, prod)
        m.add_constraint(
            f"target[{loc},{prod}]",
            LinExpr([(1.0, i_vars[(loc, prod, T)]), (1.0, h)]),
            ">=",
            par.target_level,
        )

    objective = prod_cost + trans_cost + hold_cost + penalty_cost
    m.set_objective(objective)
    m.add_kpi("production_cost", prod_cost)
    m.add_kpi("transport_cost", trans_cost)
    m.add_kpi("holding_cost", hold_cost)
    m.add_kpi("penalty_cost", penalty_cost)
    m.add_kpi("shortfall_qty", short_qty)
    total_qty = sum(o.quantity for o in instance.orders)
    if total_qty > 0:
        m.add_kpi("service_level", deliv_total * (1.0 / total_qty))
    else:
        m.add_kpi("service_level", LinExpr(constant=1.0))
    return m.freeze()


def decode_plan(instance: ProductionInstance, solution: Solution) -> ProductionPlan:
    if not solution.is_valued:
        raise ProductionError(f"cannot decode a {solution.status.value} solution")
    model = formulate_model(instance)
    T = instance.periods

    def val(name):
        return float(solution.values.get(model.var_handle(name), 0.0))

    production = {
        (c.plant, c.product, t): val(prod_name(c.plant, c.product, t))
        for c in instance.capabilities for t in range(1, T + 1)
    }
    shipments = {
        (l.origin, l.dest, prod, t): val(ship_name(l.origin, l.dest, prod, t))
        for l in instance.lanes for prod in instance.products for t in range(1, T + 1)
    }
    inventory = {
        (loc.id, prod, t): val(inv_name(loc.id, prod, t))
        for loc in instance.locations for prod in instance.products for t in range(1, T + 1)
    }
    deliveries = {o.id: val(deliv_name(o.id)) for o in instance.orders}
    shortfalls = {o.id: o.quantity - deliveries[o.id] for o in instance.orders}
    return ProductionPlan(production, shipments, inventory, deliveries, shortfalls)


@dataclass(frozen=True)
class PlanViolation:
    code: str
    detail: str
    amount: float = 0.0

    def __str__(self):
        return f"{self.code}({self.detail})"


def validate_plan(
    instance: ProductionInstance, plan: ProductionPlan, tol: float = 1e-6
) -> list[PlanViolation]:
    out: list[PlanViolation] = []
    T = instance.periods
    for maps in (plan.production, plan.shipments, plan.inventory):
        for k, v in maps.items():
            if v < -tol:
                out.append(PlanViolation(NEGATIVE_QUANTITY, ",".join(map(str, k)), -v))
    for oid, v in plan.deliveries.items():
        if v < -tol:
            out.append(PlanViolation(NEGATIVE_QUANTITY, oid, -v))

    for c in instance.capabilities:
        for t in range(1, T + 1):
            q = plan.production.get((c.plant, c.product, t), 0.0)
            if q > c.capacity + tol:
                out.append(PlanViolation(
                    CAPACITY_EXCEEDED, f"{c.plant},{c.product},{t}", q - c.capacity))
    for lane in instance.lanes:
        for t in range(1, T + 1):
            q = sum(plan.shipments.get((lane.origin, lane.dest, prod, t), 0.0)
                    for prod in instance.products)
            if q > lane.capacity + tol:
                out.append(PlanViolation(
                    CAPACITY_EXCEEDED, f"{lane.origin}->{lane.dest},{t}", q - lane.capacity))

    for loc in instance.locations:
        for prod in instance.products:
            par = instance.inv_param(loc.id, prod)
            prev = par.initial_stock
            for t in range(1, T + 1):
                inb = sum(plan.shipments.get((l.origin, l.dest, prod, t), 0.0)
                          for l in instance.lanes if l.dest == loc.id)
                outb = sum(plan.shipments.get((l.origin, l.dest, prod, t), 0.0)
                           for l in instance.lanes if l.origin == loc.id)
                made = plan.production.get((loc.id, prod, t), 0.0)
                deliv = sum(plan.deliveries.get(o.id, 0.0) for o in instance.orders
                            if o.customer == loc.id and o.product == prod and o.due == t)
                expect = prev + made + inb - outb - deliv
                got = plan.inventory.get((loc.id, prod, t), 0.0)
                if abs(got - expect) > tol:
                    out.append(PlanViolation(
                        FLOW_IMBALANCE, f"{loc.id},{prod},{t}", abs(got - expect)))
                prev = got

    for o in instance.orders:
        if instance.is_hard(o):
            got = plan.deliveries.get(o.id, 0.0)
            if got < o.quantity - tol:
                out.append(PlanViolation(HARD_ORDER_SHORTED, o.id, o.quantity - got))
    return out


def plan_to_values(instance: ProductionInstance, model: Model, plan: ProductionPlan) -> dict[int, float]:
    """Encode a plan as variable values on a formulated model; variables the
    plan does not mention (e.g. for a newly created order) stay at zero."""
    values = {h: 0.0 for h in range(model.num_variables)}

    def set_if(name, v):
        if model.has_var(name):
            values[model.var_handle(name)] = float(v)

    for (plant, prod, t), v in plan.production.items():
        set_if(prod_name(plant, prod, t), v)
    for (frm, to, prod, t), v in plan.shipments.items():
        set_if(ship_name(frm, to, prod, t), v)
    for (loc, prod, t), v in plan.inventory.items():
        set_if(inv_name(loc, prod, t), v)
    for oid, v in plan.deliveries.items():
        set_if(deliv_name(oid), v)
        set_if(short_name(oid), plan.shortfalls.get(oid, 0.0))
    return values


def load_instance(path: str) -> ProductionInstance:
    with open(path) as fh:
        try:
            return ProductionInstance.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ProductionError(f"invalid JSON in {path}: {exc}") from exc
