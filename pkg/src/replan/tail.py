"""Tail assignment: timetable data, connection network, MIP formulation.

An aircraft may fly flight j after flight i only when the arrival airport of
i equals the departure airport of j and the ground time covers the turn time.
Routes start at the aircraft's initial airport. No ferry/deadhead legs exist:
aircraft reposition only by operating timetable flights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .model import BINARY, LinExpr, Model, Solution, VarSpec

DEFAULT_CANCEL_PENALTY = 10000.0

# validate_plan violation codes
TURN_TIME = "TurnTimeViolation"
WRONG_INITIAL = "WrongInitialPosition"
CONTINUITY = "ContinuityBreak"
UNCOVERED = "FlightUncovered"
DOUBLE_COVERED = "FlightDoubleCovered"


class TailError(ValueError):
    pass


@dataclass(frozen=True)
class Flight:
    id: str
    origin: str
    destination: str
    dep: int
    arr: int

    def validate(self) -> None:
        if self.dep >= self.arr:
            raise TailError(f"flight {self.id}: dep {self.dep} >= arr {self.arr}")
        if self.origin == self.destination:
            raise TailError(f"flight {self.id}: loop flights are not supported")


@dataclass(frozen=True)
class Aircraft:
    id: str
    initial_airport: str
    turn_time: Optional[int] = None

    def validate(self) -> None:
        if self.turn_time is not None and self.turn_time < 0:
            raise TailError(f"aircraft {self.id}: negative turn time")


@dataclass(frozen=True)
class Unavailability:
    aircraft: str
    from_minute: int
    to_minute: int


@dataclass(frozen=True)
class Timetable:
    flights: tuple[Flight, ...]
    aircraft: tuple[Aircraft, ...]
    default_turn_time: int = 0
    unavailabilities: tuple[Unavailability, ...] = ()
    cancel_penalty: float = DEFAULT_CANCEL_PENALTY

    def __post_init__(self):
        ids = [f.id for f in self.flights]
        if len(set(ids)) != len(ids):
            raise TailError("duplicate flight ids")
        ids = [a.id for a in self.aircraft]
        if len(set(ids)) != len(ids):
            raise TailError("duplicate aircraft ids")
        for f in self.flights:
            f.validate()
        for a in self.aircraft:
            a.validate()

    def flight(self, fid: str) -> Flight:
        for f in self.flights:
            if f.id == fid:
                return f
        raise TailError(f"unknown flight {fid!r}")

    def craft(self, aid: str) -> Aircraft:
        for a in self.aircraft:
            if a.id == aid:
                return a
        raise TailError(f"unknown aircraft {aid!r}")

    def turn(self, aircraft: Aircraft) -> int:
        # per-aircraft turn time wins over the timetable default
        return aircraft.turn_time if aircraft.turn_time is not None else self.default_turn_time

    def is_unavailable(self, aircraft_id: str, flight: Flight) -> bool:
        for u in self.unavailabilities:
            if u.aircraft == aircraft_id and flight.dep < u.to_minute and flight.arr > u.from_minute:
                return True
        return False

    # -- JSON -----------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "default_turn_time": self.default_turn_time,
            "aircraft": [
                {"id": a.id, "initial_airport": a.initial_airport,
                 **({"turn_time": a.turn_time} if a.turn_time is not None else {})}
                for a in self.aircraft
            ],
            "flights": [
                {"id": f.id, "origin": f.origin, "destination": f.destination,
                 "dep": f.dep, "arr": f.arr}
                for f in self.flights
            ],
        }
        if self.unavailabilities:
            d["unavailabilities"] = [
                {"aircraft": u.aircraft, "from": u.from_minute, "to": u.to_minute}
                for u in self.unavailabilities
            ]
        if self.cancel_penalty != DEFAULT_CANCEL_PENALTY:
            d["cancel_penalty"] = self.cancel_penalty
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Timetable":
        try:
            return cls(
                flights=tuple(
                    Flight(f["id"], f["origin"], f["destination"], int(f["dep"]), int(f["arr"]))
                    for f in d["flights"]
                ),
                aircraft=tuple(
                    Aircraft(a["id"], a["initial_airport"], a.get("turn_time"))
                    for a in d["aircraft"]
                ),
                default_turn_time=int(d.get("default_turn_time", 0)),
                unavailabilities=tuple(
                    Unavailability(u["aircraft"], int(u["from"]), int(u["to"]))
                    for u in d.get("unavailabilities", [])
                ),
                cancel_penalty=float(d.get("cancel_penalty", DEFAULT_CANCEL_PENALTY)),
            )
        except (KeyError, TypeError) as exc:
            raise TailError(f"malformed timetable: {exc}") from exc


@dataclass
class ConnectionGraph:
    """Time-acyclic connection network, one source node per aircraft."""

    flight_arcs: list[tuple[str, str]]  # (i, j): i may be followed by j
    source_arcs: list[tuple[str, str]]  # (aircraft, flight)
    arc_cost: dict[tuple[str, str], float]
    source_cost: dict[tuple[str, str], float]


def can_connect(i: Flight, j: Flight, turn: int) -> bool:
    return i.destination == j.origin and i.arr + turn <= j.dep and i.id != j.id


def default_arc_cost(i: Flight, j: Flight, turn: int) -> float:
    """Idle ground minutes between turn completion and next departure."""
    return float(j.dep - (i.arr + turn))


CostFn = Callable[[Flight, Flight, int], float]


def build_connection_graph(timetable: Timetable, cost_fn: CostFn = default_arc_cost) -> ConnectionGraph:
    """Arcs permitted by the turn-time and continuity rules; source arcs by
    initial aircraft position. Uses the timetable default turn time; the
    per-aircraft turn time is applied at formulation time."""
    turn = timetable.default_turn_time
    flight_arcs = []
    arc_cost = {}
    for i in timetable.flights:
        for j in timetable.flights:
            if can_connect(i, j, turn):
                flight_arcs.append((i.id, j.id))
                arc_cost[(i.id, j.id)] = cost_fn(i, j, turn)
    source_arcs = []
    source_cost = {}
    for a in timetable.aircraft:
        for f in timetable.flights:
            if f.origin == a.initial_airport:
                source_arcs.append((a.id, f.id))
                source_cost[(a.id, f.id)] = 0.0
    return ConnectionGraph(flight_arcs, source_arcs, arc_cost, source_cost)


@dataclass
class TailPlan:
    routes: dict[str, list[str]]
    uncovered: list[str] = field(default_factory=list)

    def assignment(self) -> dict[str, str]:
        out = {}
        for ac, fids in self.routes.items():
            for fid in fids:
                out[fid] = ac
        return out

    def to_dict(self) -> dict:
        return {"routes": self.routes, "uncovered": self.uncovered}

    @classmethod
    def from_dict(cls, d: dict) -> "TailPlan":
        return cls(routes={k: list(v) for k, v in d["routes"].items()},
                   uncovered=list(d.get("uncovered", [])))


def arc_var_name(aircraft: str, frm: str, to: str) -> str:
    return f"x[{aircraft},{frm},{to}]"


def cover_name(flight: str) -> str:
    return f"cover[{flight}]"


def formulate_mip(timetable: Timetable, cost_fn: CostFn = default_arc_cost) -> Model:
    """Per-aircraft arc binaries with flight coverage, flow conservation and
    single-start constraints. Coverage constraints carry a relax annotation
    (cancellation penalty) but are hard in nominal solves."""
    m = Model("tail")
    by_id = {f.id: f for f in timetable.flights}

    # variables per aircraft, respecting per-aircraft turn time and windows
    incoming: dict[str, list[tuple[float, int]]] = {f.id: [] for f in timetable.flights}
    per_ac: dict[str, dict] = {}
    obj = LinExpr()
    used = LinExpr()
    for a in timetable.aircraft:
        turn = timetable.turn(a)
        arcs_in: dict[str, list[int]] = {f.id: [] for f in timetable.flights}
        arcs_out: dict[str, list[int]] = {f.id: [] for f in timetable.flights}
        src: dict[str, int] = {}
        allowed = {
            f.id for f in timetable.flights if not timetable.is_unavailable(a.id, f)
        }
        for f in timetable.flights:
            if f.id in allowed and f.origin == a.initial_airport:
                h = m.add_variable(
                    VarSpec(arc_var_name(a.id, "src", f.id), BINARY, 0, 1),
                    start_time=f.dep,
                )
                src[f.id] = h
                arcs_in[f.id].append(h)
                incoming[f.id].append((1.0, h))
                used.add_term(1.0, h)
        for i in timetable.flights:
            for j in timetable.flights:
                if i.id in allowed and j.id in allowed and can_connect(i, j, turn):
                    h = m.add_variable(
                        VarSpec(arc_var_name(a.id, i.id, j.id), BINARY, 0, 1),
                        start_time=j.dep,
                    )
                    arcs_out[i.id].append(h)
                    arcs_in[j.id].append(h)
                    incoming[j.id].append((1.0, h))
                    obj.add_term(cost_fn(i, j, turn), h)
        per_ac[a.id] = {"in": arcs_in, "out": arcs_out, "src": src}

    # coverage (relaxable at the cancellation penalty)
    for f in timetable.flights:
        m.add_constraint(
            cover_name(f.id),
            LinExpr(incoming[f.id]),
            "=",
            1.0,
            relax_penalty=timetable.cancel_penalty,
        )
    # flow conservation and single start per aircraft
    for a in timetable.aircraft:
        d = per_ac[a.id]
        for f in timetable.flights:
            outs = d["out"][f.id]
            ins = d["in"][f.id]
            if outs:
                e = LinExpr([(1.0, h) for h in outs] + [(-1.0, h) for h in ins])
                m.add_constraint(f"flow[{a.id},{f.id}]", e, "<=", 0.0)
        if d["src"]:
            m.add_constraint(
                f"start[{a.id}]",
                LinExpr([(1.0, h) for h in d["src"].values()]),
                "<=",
                1.0,
            )

    m.set_objective(obj)
    m.add_kpi("route_cost", obj)
    m.add_kpi("aircraft_used", used)
    covered = LinExpr(constant=float(len(timetable.flights)))
    for f in timetable.flights:
        for coef, h in incoming[f.id]:
            covered.add_term(-coef, h)
    m.add_kpi("flights_uncovered", covered)
    return m.freeze()


def decode_plan(timetable: Timetable, solution: Solution, int_tol: float = 1e-6) -> TailPlan:
    """Reconstruct routes by following chosen arcs from each aircraft source."""
    if not solution.is_valued:
        raise TailError(f"cannot decode a {solution.status.value} solution")
    model = formulate_mip(timetable)
    chosen: dict[str, list[tuple[str, str]]] = {a.id: [] for a in timetable.aircraft}
    for h, val in solution.values.items():
        if h >= model.num_variables:
            continue  # repair-model auxiliaries
        name = model.var_name(h)
        if not name.startswith("x["):
            continue
        if abs(val - round(val)) > int_tol:
            raise TailError(f"non-integral value {val} for {name}")
        if round(val) == 1:
            ac, frm, to = name[2:-1].split(",")
            chosen[ac].append((frm, to))
    routes: dict[str, list[str]] = {}
    claimed: set[str] = set()
    for a in timetable.aircraft:
        arcs = dict()
        start = None
        for frm, to in chosen[a.id]:
            if frm in arcs:
                raise TailError(f"aircraft {a.id}: two arcs out of {frm}")
            arcs[frm] = to
            if frm == "src":
                start = to
        if start is None:
            if arcs:
                raise TailError(f"aircraft {a.id}: arcs chosen without a source arc")
            routes[a.id] = []
            continue
        route = []
        cur = start
        while True:
            route.append(cur)
            claimed.add(cur)
            nxt = arcs.pop(cur, None)
            if nxt is None:
                break
            cur = nxt
        leftovers = {k: v for k, v in arcs.items() if k != "src"}
        if leftovers:
            raise TailError(f"aircraft {a.id}: broken chain, dangling arcs {leftovers}")
        routes[a.id] = route
    uncovered = sorted(f.id for f in timetable.flights if f.id not in claimed)
    return TailPlan(routes=routes, uncovered=uncovered)


@dataclass(frozen=True)
class PlanViolation:
    code: str
    detail: str

    def __str__(self):
        return f"{self.code}({self.detail})"


def validate_plan(timetable: Timetable, plan: TailPlan) -> list[PlanViolation]:
    """Check turn times, initial positions, continuity and full coverage."""
    out: list[PlanViolation] = []
    seen: dict[str, str] = {}
    for ac_id, fids in plan.routes.items():
        a = timetable.craft(ac_id)  # raises on unknown aircraft
        turn = timetable.turn(a)
        prev: Optional[Flight] = None
        for fid in fids:
            f = timetable.flight(fid)  # raises on unknown flight
            if fid in seen:
                out.append(PlanViolation(DOUBLE_COVERED, f"{fid}:{seen[fid]},{ac_id}"))
            seen[fid] = ac_id
            if prev is None:
                if f.origin != a.initial_airport:
                    out.append(PlanViolation(WRONG_INITIAL, f"{ac_id}:{fid}"))
            else:
                if prev.destination != f.origin:
                    out.append(PlanViolation(CONTINUITY, f"{ac_id}:{prev.id}->{fid}"))
                if prev.arr + turn > f.dep:
                    out.append(PlanViolation(TURN_TIME, f"{ac_id}:{prev.id}->{fid}"))
            prev = f
    for f in timetable.flights:
        if f.id not in seen:
            out.append(PlanViolation(UNCOVERED, f.id))
    return out


def plan_to_values(timetable: Timetable, model: Model, plan: TailPlan) -> dict[int, float]:
    """Encode a plan as variable values on a formulated model. Arcs the model
    does not have (e.g. removed by a disruption) are skipped; the resulting
    point may then violate coverage, which is exactly what conflict detection
    and repair work from."""
    values = {h: 0.0 for h in range(model.num_variables)}
    for ac_id, fids in plan.routes.items():
        prev = "src"
        for fid in fids:
            name = arc_var_name(ac_id, prev, fid)
            if model.has_var(name):
                values[model.var_handle(name)] = 1.0
            prev = fid
    return values


def load_timetable(path: str) -> Timetable:
    with open(path) as fh:
        try:
            return Timetable.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise TailError(f"invalid JSON in {path}: {exc}") from exc
