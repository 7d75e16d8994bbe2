"""Domain adapters: a uniform surface over the tail-assignment and
production-planning models for repair, robustness, CLI and service code."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

from . import production, tail
from .kernel import SolveParams, solve_milp
from .model import Model, Solution, Status, check_feasible, kpi_report
from .repair import (
    RepairModel,
    RepairResult,
    RepairSpec,
    Scenario,
    apply_scenario,
    build_repair_model,
    repair_exact,
)

TAIL = "tail"
PRODUCTION = "production"


class DomainError(ValueError):
    pass


@dataclass
class PlanBundle:
    """A solved plan plus everything needed to use it as a repair incumbent."""

    domain: str
    plan: Any  # TailPlan | ProductionPlan
    objective: float
    kpis: dict[str, float]
    values: dict[str, float]  # variable name -> value

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "objective": self.objective,
            "kpis": self.kpis,
            "plan": self.plan.to_dict(),
            "values": self.values,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlanBundle":
        domain = d["domain"]
        plan_cls = tail.TailPlan if domain == TAIL else production.ProductionPlan
        return cls(domain, plan_cls.from_dict(d["plan"]), float(d["objective"]),
                   dict(d["kpis"]), {k: float(v) for k, v in d["values"].items()})


class TailDomain:
    name = TAIL

    @staticmethod
    def load_instance(d: dict) -> tail.Timetable:
        return tail.Timetable.from_dict(d)

    @staticmethod
    def instance_to_dict(inst) -> dict:
        return inst.to_dict()

    @staticmethod
    def formulate(inst) -> Model:
        return tail.formulate_mip(inst)

    @staticmethod
    def decode(inst, solution: Solution):
        return tail.decode_plan(inst, solution)

    @staticmethod
    def validate(inst, plan, tol: float = 1e-6):
        return tail.validate_plan(inst, plan)

    @staticmethod
    def plan_values(inst, model: Model, plan) -> dict[int, float]:
        return tail.plan_to_values(inst, model, plan)

    @staticmethod
    def plan_from_dict(d: dict):
        return tail.TailPlan.from_dict(d)

    @staticmethod
    def project(inst, plan):
        """Drop flights a scenario removed; the leftover route structure is
        what conflict detection has to judge."""
        ids = {f.id for f in inst.flights}
        routes = {ac: [f for f in fids if f in ids]
                  for ac, fids in plan.routes.items()}
        return tail.TailPlan(routes={ac: fids for ac, fids in routes.items() if fids},
                             uncovered=[f for f in plan.uncovered if f in ids])

    @staticmethod
    def render_diff(inst, before, after, tol: float = 1e-6) -> list[dict]:
        records: list[dict] = []
        covered_before = set(before.assignment())
        covered_after = set(after.assignment())
        for fid in sorted(covered_before - covered_after):
            records.append({"kind": "Cancelled", "flight": fid})
        for fid in sorted(covered_after - covered_before):
            records.append({"kind": "Restored", "flight": fid})
        assign_b, assign_a = before.assignment(), after.assignment()
        for fid in sorted(covered_before & covered_after):
            if assign_b[fid] != assign_a[fid]:
                records.append({"kind": "Reassigned", "flight": fid,
                                "from": assign_b[fid], "to": assign_a[fid]})
        acs = sorted(set(before.routes) | set(after.routes))
        for ac in acs:
            rb = before.routes.get(ac, [])
            ra = after.routes.get(ac, [])
            if rb != ra:
                records.append({"kind": "RouteChanged", "aircraft": ac,
                                "before": rb, "after": ra})
        return records


class ProductionDomain:
    name = PRODUCTION

    @staticmethod
    def load_instance(d: dict) -> production.ProductionInstance:
        return production.ProductionInstance.from_dict(d)

    @staticmethod
    def instance_to_dict(inst) -> dict:
        return inst.to_dict()

    @staticmethod
    def formulate(inst) -> Model:
        return production.formulate_model(inst)

    @staticmethod
    def decode(inst, solution: Solution):
        return production.decode_plan(inst, solution)

    @staticmethod
    def validate(inst, plan, tol: float = 1e-6):
        return production.validate_plan(inst, plan, tol)

    @staticmethod
    def plan_values(inst, model: Model, plan) -> dict[int, float]:
        return production.plan_to_values(inst, model, plan)

    @staticmethod
    def plan_from_dict(d: dict):
        return production.ProductionPlan.from_dict(d)

    @staticmethod
    def project(inst, plan):
        # scenarios only ever add orders; nothing to drop
        return plan

    @staticmethod
    def render_diff(inst, before, after, tol: float = 1e-6) -> list[dict]:
        records: list[dict] = []
        keys = sorted(set(before.production) | set(after.production))
        agg: dict[tuple[str, int], float] = {}
        for plant, prod, t in keys:
            b = before.production.get((plant, prod, t), 0.0)
            a = after.production.get((plant, prod, t), 0.0)
            agg[(prod, t)] = agg.get((prod, t), 0.0) + (a - b)
        for (prod, t), delta in sorted(agg.items()):
            if abs(delta) > tol:
                records.append({"kind": "ProductionDelta", "product": prod,
                                "period": t, "delta": delta})
        oids = sorted(set(before.deliveries) | set(after.deliveries))
        for oid in oids:
            b = before.deliveries.get(oid, 0.0)
            a = after.deliveries.get(oid, 0.0)
            if abs(a - b) > tol:
                records.append({"kind": "DeliveryChanged", "order": oid,
                                "before": b, "after": a})
        return records


_DOMAINS = {TAIL: TailDomain, PRODUCTION: ProductionDomain}


def get_domain(name: str):
    try:
        return _DOMAINS[name]
    except KeyError:
        raise DomainError(f"unknown domain {name!r}; expected one of {sorted(_DOMAINS)}")


def detect_domain(d: dict) -> str:
    if "flights" in d:
        return TAIL
    if "products" in d:
        return PRODUCTION
    raise DomainError("cannot detect domain: instance has neither flights nor products")


# -- high-level operations ---------------------------------------------------


def solve_nominal(domain, instance, params: Optional[SolveParams] = None) -> PlanBundle:
    params = params or SolveParams()
    model = domain.formulate(instance)
    solution, stats = solve_milp(model, params)
    if solution.status is Status.INFEASIBLE:
        raise InfeasibleError(f"{domain.name} instance is infeasible")
    if solution.status is Status.UNBOUNDED:
        raise InfeasibleError(f"{domain.name} instance is unbounded")
    if not solution.is_valued:
        raise LimitError(f"solve hit kernel limits ({solution.status.value})")
    plan = domain.decode(instance, solution)
    values = {model.var_name(h): v for h, v in solution.values.items()}
    return PlanBundle(domain.name, plan, solution.objective_value,
                      kpi_report(model, solution), values)


class InfeasibleError(RuntimeError):
    pass


class LimitError(RuntimeError):
    pass


def detect_conflicts(domain, perturbed_instance, incumbent_plan) -> list:
    """Revalidate the incumbent against the perturbed instance. Domain rules
    are checked first; only a domain-clean plan is additionally checked
    against the perturbed formulation."""
    incumbent_plan = domain.project(perturbed_instance, incumbent_plan)
    violations = list(domain.validate(perturbed_instance, incumbent_plan))
    if violations:
        return violations
    model = domain.formulate(perturbed_instance)
    values = domain.plan_values(perturbed_instance, model, incumbent_plan)
    extra = check_feasible(model, values, tol=1e-6)
    return [_model_violation(domain, v) for v in extra]


def _model_violation(domain, v):
    if domain.name == TAIL:
        return tail.PlanViolation("ModelInfeasibility", f"{v.kind}:{v.name}:{v.amount:g}")
    return production.PlanViolation("ModelInfeasibility", f"{v.kind}:{v.name}", v.amount)


def build_domain_repair(
    domain,
    instance,
    incumbent: PlanBundle,
    scenario: Scenario,
    spec: RepairSpec,
) -> tuple[Any, Model, RepairModel]:
    """Apply the scenario and assemble the repair model for this domain."""
    perturbed = apply_scenario(instance, scenario)
    model = domain.formulate(perturbed)
    inc_values_h = domain.plan_values(perturbed, model, incumbent.plan)
    inc_values = {model.var_name(h): v for h, v in inc_values_h.items()}
    rm = build_repair_model(model, inc_values, spec)
    return perturbed, model, rm


def finish_repair(
    domain, perturbed_instance, incumbent: PlanBundle, rm: RepairModel, result: RepairResult
) -> RepairResult:
    """Attach domain-rendered diff records to a raw repair result."""
    if result.solution.is_valued:
        repaired_plan = domain.decode(perturbed_instance, result.solution)
        records = domain.render_diff(perturbed_instance, incumbent.plan, repaired_plan)
        result.diff = records + [r for r in result.diff if r.get("kind") == "variable"]
    return result


def run_repair(
    domain,
    instance,
    incumbent: PlanBundle,
    scenario: Scenario,
    spec: RepairSpec,
    method: str = "exact",
    params: Optional[SolveParams] = None,
    vns_params=None,
) -> RepairResult:
    from .vns import VnsParams, enumerate_blocks, vns_repair

    params = params or SolveParams()
    perturbed, model, rm = build_domain_repair(domain, instance, incumbent, scenario, spec)
    if method == "exact":
        result = repair_exact(rm, params)
    elif method == "vns":
        vp = vns_params or VnsParams()
        blocks = enumerate_blocks(domain, perturbed, rm)
        result = vns_repair(rm, blocks, vp, params)
    else:
        raise DomainError(f"unknown repair method {method!r}")
    return finish_repair(domain, perturbed, incumbent, rm, result)
