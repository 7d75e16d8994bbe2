import json
import os

import pytest

from replan.domains import TailDomain, ProductionDomain, solve_nominal

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "replan", "data")

T1_PATH = os.path.abspath(os.path.join(DATA, "t1.json"))
P1_PATH = os.path.abspath(os.path.join(DATA, "p1.json"))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def t1_doc():
    return read_json(T1_PATH)


@pytest.fixture(scope="session")
def p1_doc():
    return read_json(P1_PATH)


@pytest.fixture(scope="session")
def t1(t1_doc):
    return TailDomain.load_instance(t1_doc)


@pytest.fixture(scope="session")
def p1(p1_doc):
    return ProductionDomain.load_instance(p1_doc)


@pytest.fixture(scope="session")
def t1_bundle(t1):
    return solve_nominal(TailDomain, t1)


@pytest.fixture(scope="session")
def p1_bundle(p1):
    return solve_nominal(ProductionDomain, p1)


DELAY_SCENARIO = {
    "id": "delay",
    "events": [{"type": "flight_delay", "flight": "f1", "dep": 520, "arr": 580}],
}

CANCEL_F3_SCENARIO = {
    "id": "cancel_f3",
    "events": [{"type": "flight_cancellation", "flight": "f3"}],
}

NEW_ORDER_SCENARIO = {
    "id": "new_order",
    "events": [{
        "type": "new_order",
        "order": {"id": "o2", "customer": "cust1", "product": "widget",
                  "due": 2, "quantity": 8, "priority": 9},
    }],
}
