"""Aircraft routing formulation against exhaustive route enumeration."""

import itertools

import pytest

from oracles import best_tail_objective, enumerate_tail_plans, route_feasible
from replan.domains import TailDomain, solve_nominal
from replan.kernel import solve_milp
from replan.model import Status
from replan.tail import (
    Aircraft,
    Flight,
    TailError,
    Timetable,
    build_connection_graph,
    can_connect,
    decode_plan,
    default_arc_cost,
    formulate_mip,
    plan_to_values,
    validate_plan,
)


def test_t1_connection_arcs_exact(t1):
    g = build_connection_graph(t1)
    assert sorted(g.flight_arcs) == [("f1", "f2"), ("f1", "f4"), ("f3", "f4")]
    assert g.arc_cost[("f1", "f2")] == pytest.approx(15.0)
    assert g.arc_cost[("f1", "f4")] == pytest.approx(90.0)
    assert g.arc_cost[("f3", "f4")] == pytest.approx(60.0)
    # both aircraft start at A, so they can start any A-departing flight
    assert sorted(g.source_arcs) == [
        ("ac1", "f1"), ("ac1", "f3"), ("ac2", "f1"), ("ac2", "f3")]


def test_can_connect_boundary():
    i = Flight("i", "A", "B", 0, 100)
    j_tight = Flight("j", "B", "C", 130, 200)
    j_early = Flight("k", "B", "C", 129, 200)
    assert can_connect(i, j_tight, 30)
    assert not can_connect(i, j_early, 30)
    assert not can_connect(i, Flight("l", "C", "D", 200, 300), 30)  # wrong airport


def test_arc_cost_is_idle_minutes():
    i = Flight("i", "A", "B", 0, 100)
    j = Flight("j", "B", "C", 150, 200)
    assert default_arc_cost(i, j, 30) == pytest.approx(20.0)


def test_t1_nominal_matches_enumeration(t1, t1_bundle):
    oracle = best_tail_objective(t1, require_all_covered=True)
    assert t1_bundle.objective == pytest.approx(oracle, abs=1e-6)
    assert t1_bundle.objective == pytest.approx(75.0)
    plan = t1_bundle.plan
    assert plan.uncovered == []
    # both optimal symmetric assignments pair f1+f2 and f3+f4
    routes = {tuple(v) for v in plan.routes.values()}
    assert routes == {("f1", "f2"), ("f3", "f4")}


def test_decode_validate_round_trip(t1, t1_bundle):
    assert validate_plan(t1, t1_bundle.plan) == []
    model = formulate_mip(t1)
    values = plan_to_values(t1, model, t1_bundle.plan)
    sol, _ = solve_milp(model)
    assert decode_plan(t1, sol).assignment() == t1_bundle.plan.assignment()
    # the plan's own arc values are feasible for the model
    from replan.model import check_feasible
    assert check_feasible(model, values, tol=1e-6) == []


def test_validate_flags_each_violation_kind(t1):
    from replan.tail import TailPlan

    # turn time: f1 arrives 540, f3 departs 510
    v = validate_plan(t1, TailPlan(routes={"ac1": ["f1", "f3"]}, uncovered=["f2", "f4"]))
    codes = {x.code for x in v}
    assert "TurnTimeViolation" in codes or "ContinuityBreak" in codes

    # wrong initial position: f2 departs from B, both aircraft sit at A
    v = validate_plan(t1, TailPlan(routes={"ac1": ["f2"]}, uncovered=["f1", "f3", "f4"]))
    assert any(x.code == "WrongInitialPosition" for x in v)

    # double coverage
    v = validate_plan(t1, TailPlan(routes={"ac1": ["f1"], "ac2": ["f1"]},
                                   uncovered=["f2", "f3", "f4"]))
    assert any(x.code == "FlightDoubleCovered" for x in v)

    # silent drop: flight in neither routes nor uncovered
    v = validate_plan(t1, TailPlan(routes={"ac1": ["f1", "f2"], "ac2": ["f3", "f4"]},
                                   uncovered=[]))
    assert v == []


def test_unavailability_excludes_aircraft(t1_doc):
    doc = dict(t1_doc)
    doc["unavailabilities"] = [{"aircraft": "ac1", "from": 0, "to": 1440}]
    tt = Timetable.from_dict(doc)
    model = formulate_mip(tt)
    # no ac1 arcs exist at all
    assert not any(model.var_name(h).startswith("x[ac1")
                   for h in range(model.num_variables))
    sol, _ = solve_milp(model)
    assert sol.status is Status.INFEASIBLE  # one aircraft cannot fly 2 overlapping pairs


def test_arc_set_monotone_in_turn_time(t1_doc):
    prev = None
    for turn in (0, 15, 30, 45, 90):
        doc = dict(t1_doc)
        doc["default_turn_time"] = turn
        g = build_connection_graph(Timetable.from_dict(doc))
        arcs = set(g.flight_arcs)
        if prev is not None:
            assert arcs <= prev  # larger turn time can only remove arcs
        prev = arcs


def random_timetable(rng, n_flights, n_aircraft):
    airports = ["A", "B", "C"]
    flights = []
    for i in range(n_flights):
        o = airports[rng.randrange(3)]
        d = airports[(airports.index(o) + 1 + rng.randrange(2)) % 3]
        dep = 400 + rng.randrange(20) * 15
        dur = 45 + rng.randrange(4) * 15
        flights.append(Flight(f"f{i}", o, d, dep, dep + dur))
    # park aircraft where flights actually depart, else coverage is hopeless
    origins = [f.origin for f in flights]
    aircraft = [Aircraft(f"a{k}", origins[rng.randrange(len(origins))])
                for k in range(n_aircraft)]
    return Timetable(default_turn_time=30, flights=tuple(flights),
                     aircraft=tuple(aircraft))


def test_random_instances_match_enumeration():
    import random

    rng = random.Random(99)
    checked = 0
    for _ in range(30):
        tt = random_timetable(rng, rng.randrange(3, 6), rng.randrange(2, 4))
        oracle = best_tail_objective(tt, require_all_covered=True)
        model = formulate_mip(tt)
        sol, _ = solve_milp(model)
        if oracle == float("inf"):
            assert sol.status is Status.INFEASIBLE
        else:
            assert sol.status is Status.OPTIMAL
            assert sol.objective_value == pytest.approx(oracle, abs=1e-6)
            plan = decode_plan(tt, sol)
            assert validate_plan(tt, plan) == []
            checked += 1
    assert checked >= 5


def test_timetable_round_trip(t1, t1_doc):
    assert Timetable.from_dict(t1.to_dict()) == t1
    assert Timetable.from_dict(t1_doc) == t1


def test_oracle_agrees_with_validate_on_feasibility(t1):
    # every plan the oracle enumerates passes validate_plan, and vice versa
    from replan.tail import TailPlan

    oracle_keys = set()
    for plan, _, _ in enumerate_tail_plans(t1):
        # routes are clean; the only violations are the declared cancellations
        v = validate_plan(t1, plan)
        assert sorted(x.detail for x in v) == plan.uncovered
        assert all(x.code == "FlightUncovered" for x in v)
        oracle_keys.add((tuple(sorted((k, tuple(v)) for k, v in plan.routes.items())),
                         tuple(plan.uncovered)))
    # spot-check: a validate-clean plan not produced by the oracle cannot exist
    flights = [f.id for f in t1.flights]
    for combo in itertools.product(["ac1", "ac2", None], repeat=4):
        routes = {"ac1": [], "ac2": []}
        uncovered = []
        order = sorted(range(4), key=lambda i: t1.flights[i].dep)
        for idx in order:
            who = combo[idx]
            if who is None:
                uncovered.append(flights[idx])
            else:
                routes[who].append(flights[idx])
        plan = TailPlan(routes={k: v for k, v in routes.items() if v},
                        uncovered=sorted(uncovered))
        key = (tuple(sorted((k, tuple(v)) for k, v in plan.routes.items())),
               tuple(plan.uncovered))
        v = validate_plan(t1, plan)
        if all(x.code == "FlightUncovered" and x.detail in plan.uncovered for x in v):
            assert key in oracle_keys


def test_load_rejects_dangling_references():
    with pytest.raises((TailError, KeyError, ValueError)):
        Timetable.from_dict({
            "default_turn_time": 30,
            "aircraft": [{"id": "a1", "initial_airport": "A"}],
            "flights": [{"id": "f1", "origin": "A", "destination": "B",
                         "dep": 100, "arr": 50}],  # arrives before departing
        })
