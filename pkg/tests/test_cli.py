"""Command-line interface: exit codes, determinism, file handling."""

import json
import os

import pytest

from conftest import DELAY_SCENARIO, NEW_ORDER_SCENARIO, T1_PATH, P1_PATH, read_json
from replan.cli import main


def run(args):
    return main(args)


@pytest.fixture
def t1_plan_file(tmp_path):
    out = tmp_path / "plan.json"
    assert run(["plan", "--instance", T1_PATH, "--out", str(out)]) == 0
    return str(out)


@pytest.fixture
def p1_plan_file(tmp_path):
    out = tmp_path / "p1plan.json"
    assert run(["plan", "--instance", P1_PATH, "--out", str(out)]) == 0
    return str(out)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_plan_writes_oracle_plan(t1_plan_file):
    doc = read_json(t1_plan_file)
    assert doc["objective"] == pytest.approx(75.0)
    routes = {tuple(v) for v in doc["plan"]["routes"].values()}
    assert routes == {("f1", "f2"), ("f3", "f4")}


def test_plan_domain_autodetected(p1_plan_file):
    doc = read_json(p1_plan_file)
    assert doc["domain"] == "production"
    assert doc["objective"] == pytest.approx(17.5)


def test_repair_exit_ok_and_content(tmp_path, t1_plan_file):
    sc = write(tmp_path, "sc.json", DELAY_SCENARIO)
    out = tmp_path / "rep.json"
    code = run(["repair", "--instance", T1_PATH, "--incumbent", t1_plan_file,
                "--scenario", sc, "--out", str(out)])
    assert code == 0
    doc = read_json(str(out))
    assert doc["kpis"]["repair_objective"] == pytest.approx(10052.0)


def test_repair_same_seed_byte_identical(tmp_path, t1_plan_file):
    sc = write(tmp_path, "sc.json", DELAY_SCENARIO)
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = run(["repair", "--instance", T1_PATH, "--incumbent", t1_plan_file,
                    "--scenario", sc, "--method", "vns", "--seed", "42",
                    "--out", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_infeasible_exits_2(tmp_path, p1_plan_file):
    # 25 units against 20 units of capacity, hard priority
    doc = read_json(P1_PATH)
    doc["orders"][0]["quantity"] = 25.0
    inst = write(tmp_path, "p_big.json", doc)
    assert run(["plan", "--instance", inst, "--out", str(tmp_path / "x.json")]) == 2


def test_malformed_json_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["validate", "--instance", str(bad)]) == 3
    assert "bad.json" in capsys.readouterr().err


def test_missing_file_exits_3(tmp_path):
    assert run(["plan", "--instance", str(tmp_path / "nope.json")]) == 3


def test_bad_instance_exits_3(tmp_path):
    inst = write(tmp_path, "weird.json", {"hello": "world"})
    assert run(["plan", "--instance", inst]) == 3


def test_node_limit_exits_4(tmp_path, t1_plan_file, monkeypatch):
    # force the kernel over its variable cap: a scenario fan-out is overkill
    # to build here, so patch the cap down instead
    import replan.kernel.params as kp
    import replan.kernel.milp as km

    monkeypatch.setattr(kp, "MAX_VARIABLES", 2)
    monkeypatch.setattr(km, "MAX_VARIABLES", 2)
    assert run(["plan", "--instance", T1_PATH]) == 4


def test_validate_instance_ok(capsys):
    assert run(["validate", "--instance", T1_PATH]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_plan_violations_exit_2(tmp_path, t1_plan_file, capsys):
    doc = read_json(t1_plan_file)
    doc["plan"]["routes"] = {"ac1": ["f2"]}  # wrong initial airport, 3 uncovered
    bad = write(tmp_path, "badplan.json", doc)
    assert run(["validate", "--instance", T1_PATH, "--plan", bad]) == 2
    out = capsys.readouterr().out
    assert "WrongInitialPosition" in out


def test_evaluate_writes_report_and_csv(tmp_path, t1_plan_file):
    scs = write(tmp_path, "scs.json",
                {"scenarios": [DELAY_SCENARIO,
                               {"id": "cancel_f3",
                                "events": [{"type": "flight_cancellation",
                                            "flight": "f3"}]}]})
    out = tmp_path / "report.json"
    csvf = tmp_path / "report.csv"
    code = run(["evaluate", "--instance", T1_PATH, "--incumbent", t1_plan_file,
                "--scenarios", scs, "--out", str(out), "--csv", str(csvf)])
    assert code == 0
    doc = read_json(str(out))
    prices = {r["scenario_id"]: r["recovery_price"] for r in doc["rows"]}
    assert prices == {"cancel_f3": pytest.approx(9940.0),
                      "delay": pytest.approx(9977.0)}
    assert csvf.read_text().count("\n") == 3


def test_robust_alpha_zero_equals_nominal(tmp_path):
    scs = write(tmp_path, "scs.json", [DELAY_SCENARIO])
    out = tmp_path / "robust.json"
    code = run(["robust", "--instance", T1_PATH, "--scenarios", scs,
                "--alpha", "0", "--out", str(out)])
    assert code == 0
    doc = read_json(str(out))
    assert doc["plan"]["objective"] == pytest.approx(75.0)
    assert doc["total"] == pytest.approx(75.0)


def test_robust_modes_ordered(tmp_path):
    scs = write(tmp_path, "scs.json",
                [DELAY_SCENARIO,
                 {"id": "cancel_f3",
                  "events": [{"type": "flight_cancellation", "flight": "f3"}]}])
    totals = {}
    for mode in ("simultaneous", "separate"):
        out = tmp_path / f"{mode}.json"
        assert run(["robust", "--instance", T1_PATH, "--scenarios", scs,
                    "--alpha", "1", "--mode", mode, "--out", str(out)]) == 0
        totals[mode] = read_json(str(out))["total"]
    assert totals["simultaneous"] <= totals["separate"] + 1e-6


def test_production_repair_round_trip(tmp_path, p1_plan_file):
    sc = write(tmp_path, "sc.json", NEW_ORDER_SCENARIO)
    out = tmp_path / "rep.json"
    code = run(["repair", "--instance", P1_PATH, "--incumbent", p1_plan_file,
                "--scenario", sc, "--out", str(out)])
    assert code == 0
    doc = read_json(str(out))
    assert doc["kpis"]["repair_objective"] == pytest.approx(3025.0)
