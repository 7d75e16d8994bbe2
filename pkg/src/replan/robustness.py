"""Recoverable robustness: price recovery per scenario, aggregate over a
scenario set, and choose first-stage plans that trade nominal cost against
recovery effort (extensive two-stage form or candidate-pool search).

Recovery price of a scenario is the optimal repair objective minus the
cost-weighted nominal objective; it can be negative (a cancellation can
reduce cost). The plan-selection total used to compare modes is

    total(x) = nominal(x) + alpha * weighted_mean_s(repair_objective_s(x))
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .domains import PlanBundle, solve_nominal
from .kernel import KernelSizeError, SolveParams, solve_milp
from .model import BINARY, EQ, GE, LE, LinExpr, Model, Status, VarSpec, kpi_report
from .repair import (
    DEFAULT_RELAX_PENALTY,
    RepairSpec,
    Scenario,
    apply_scenario,
    resolve_relax_penalties,
)

POOL_SIZE = 10


class RobustnessError(ValueError):
    pass


@dataclass
class ScenarioRow:
    scenario_id: str
    weight: float
    status: str
    repair_objective: float
    recovery_price: float


@dataclass
class RecoverabilityReport:
    nominal_objective: float
    rows: list[ScenarioRow] = field(default_factory=list)

    @property
    def max_price(self) -> float:
        return max((r.recovery_price for r in self.rows), default=0.0)

    @property
    def mean_price(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.recovery_price for r in self.rows) / len(self.rows)

    @property
    def weighted_mean_price(self) -> float:
        w = sum(r.weight for r in self.rows)
        if w == 0:
            return 0.0
        return sum(r.weight * r.recovery_price for r in self.rows) / w

    @property
    def weighted_mean_repair_objective(self) -> float:
        w = sum(r.weight for r in self.rows)
        if w == 0:
            return 0.0
        return sum(r.weight * r.repair_objective for r in self.rows) / w

    def total(self, alpha: float) -> float:
        return self.nominal_objective + alpha * self.weighted_mean_repair_objective

    def to_dict(self) -> dict:
        return {
            "nominal_objective": self.nominal_objective,
            "rows": [
                {"scenario_id": r.scenario_id, "weight": r.weight, "status": r.status,
                 "repair_objective": r.repair_objective, "recovery_price": r.recovery_price}
                for r in self.rows
            ],
            "aggregates": {
                "max_price": self.max_price,
                "mean_price": self.mean_price,
                "weighted_mean_price": self.weighted_mean_price,
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("scenario_id,weight,status,repair_objective,recovery_price\n")
        for r in self.rows:
            buf.write(f"{r.scenario_id},{r.weight},{r.status},"
                      f"{r.repair_objective},{r.recovery_price}\n")
        return buf.getvalue()


def recovery_price(
    domain,
    instance,
    incumbent: PlanBundle,
    scenario: Scenario,
    spec: RepairSpec,
    method: str = "exact",
    params: Optional[SolveParams] = None,
    vns_params=None,
) -> float:
    from .domains import run_repair

    result = run_repair(domain, instance, incumbent, scenario, spec, method, params, vns_params)
    if not result.solution.is_valued:
        return math.inf
    return result.solution.objective_value - spec.w_cost * incumbent.objective


def evaluate_recoverability(
    domain,
    instance,
    incumbent: PlanBundle,
    scenarios: list[Scenario],
    spec: RepairSpec,
    method: str = "exact",
    params: Optional[SolveParams] = None,
    vns_params=None,
) -> RecoverabilityReport:
    from .domains import run_repair

    report = RecoverabilityReport(nominal_objective=incumbent.objective)
    for scenario in sorted(scenarios, key=lambda s: s.id):
        result = run_repair(domain, instance, incumbent, scenario, spec, method, params,
                            vns_params)
        if result.solution.is_valued:
            robj = result.solution.objective_value
            price = robj - spec.w_cost * incumbent.objective
        else:
            robj = math.inf
            price = math.inf
        report.rows.append(ScenarioRow(scenario.id, scenario.weight,
                                       result.solution.status.value, robj, price))
    return report


# -- extensive form -----------------------------------------------------------


def build_extensive_form(
    domain, instance, scenarios: list[Scenario], spec: RepairSpec, alpha: float
) -> tuple[Model, Model]:
    """One model holding the first-stage plan plus a linked second-stage copy
    per scenario. Returns (extensive model, first-stage model)."""
    base = domain.formulate(instance)
    ext = base.clone("two-stage")
    nominal_expr = base.objective.copy()

    weight_sum = sum(s.weight for s in scenarios) or 1.0
    total_obj = nominal_expr.copy()

    for scenario in sorted(scenarios, key=lambda s: s.id):
        tag = scenario.id
        pert = apply_scenario(instance, scenario)
        ms = domain.formulate(pert)
        hmap: dict[int, int] = {}
        for h in range(ms.num_variables):
            v = ms.variables[h]
            hmap[h] = ext.add_variable(
                VarSpec(f"{tag}::{v.name}", v.kind, v.lower, v.upper),
                start_time=ms.var_start_time.get(h),
            )

        def remap(expr: LinExpr) -> LinExpr:
            out = LinExpr(constant=expr.constant)
            for v, c in expr.coeffs.items():
                out.add_term(c, hmap[v])
            return out

        penalties = resolve_relax_penalties(ms, spec)
        penalty_expr = LinExpr()
        for i, cons in enumerate(ms.constraints):
            expr = remap(cons.expr)
            if i in penalties:
                pen = penalties[i]
                if cons.sense == LE:
                    s = ext.add_variable(VarSpec(f"{tag}::relax[{cons.name}]"))
                    expr.add_term(-1.0, s)
                    penalty_expr.add_term(pen, s)
                elif cons.sense == GE:
                    s = ext.add_variable(VarSpec(f"{tag}::relax[{cons.name}]"))
                    expr.add_term(1.0, s)
                    penalty_expr.add_term(pen, s)
                else:
                    sp = ext.add_variable(VarSpec(f"{tag}::relax+[{cons.name}]"))
                    sn = ext.add_variable(VarSpec(f"{tag}::relax-[{cons.name}]"))
                    expr.add_term(-1.0, sp)
                    expr.add_term(1.0, sn)
                    penalty_expr.add_term(pen, sp)
                    penalty_expr.add_term(pen, sn)
            ext.add_constraint(f"{tag}::{cons.name}", expr, cons.sense, cons.rhs)

        # frozen variables must equal their first-stage counterpart
        import fnmatch as _fn

        frozen_names: set[str] = set()
        for h in range(ms.num_variables):
            name = ms.var_name(h)
            if not base.has_var(name):
                continue
            for pat in spec.freeze_patterns:
                if _fn.fnmatchcase(name, pat):
                    frozen_names.add(name)
            if (spec.freeze_horizon is not None and h in ms.var_start_time
                    and ms.var_start_time[h] < spec.freeze_horizon):
                frozen_names.add(name)

        dev_bin = LinExpr()
        dev_cont = LinExpr()
        for h in range(ms.num_variables):
            name = ms.var_name(h)
            if not base.has_var(name):
                continue
            x = base.var_handle(name)
            y = hmap[h]
            if name in frozen_names:
                ext.add_constraint(
                    f"{tag}::freeze[{name}]",
                    LinExpr([(1.0, y), (-1.0, x)]), EQ, 0.0,
                )
                continue
            if ms.variables[h].kind == BINARY:
                d = ext.add_variable(VarSpec(f"{tag}::dev[{name}]", "continuous", 0.0, 1.0))
                ext.add_constraint(f"{tag}::devge1[{name}]",
                                   LinExpr([(1.0, d), (-1.0, y), (1.0, x)]), GE, 0.0)
                ext.add_constraint(f"{tag}::devge2[{name}]",
                                   LinExpr([(1.0, d), (1.0, y), (-1.0, x)]), GE, 0.0)
                dev_bin.add_term(1.0, d)
            elif spec.w_dev_cont > 0:
                dp = ext.add_variable(VarSpec(f"{tag}::dev+[{name}]"))
                dn = ext.add_variable(VarSpec(f"{tag}::dev-[{name}]"))
                ext.add_constraint(f"{tag}::devlink[{name}]",
                                   LinExpr([(1.0, y), (-1.0, x), (-1.0, dp), (1.0, dn)]),
                                   EQ, 0.0)
                dev_cont.add_term(1.0, dp)
                dev_cont.add_term(1.0, dn)

        recovery_obj = (
            remap(ms.objective) * spec.w_cost
            + dev_bin * spec.w_dev
            + dev_cont * spec.w_dev_cont
            + penalty_expr
        )
        total_obj = total_obj + recovery_obj * (alpha * scenario.weight / weight_sum)

    ext.set_objective(total_obj)
    ext.add_kpi("first_stage_objective", nominal_expr)
    ext.freeze()
    return ext, base


def two_stage_solve(
    domain,
    instance,
    scenarios: list[Scenario],
    spec: RepairSpec,
    alpha: float,
    mode: str = "simultaneous",
    params: Optional[SolveParams] = None,
) -> tuple[PlanBundle, RecoverabilityReport]:
    if alpha < 0:
        raise RobustnessError("alpha must be >= 0")
    params = params or SolveParams()

    if alpha == 0 or not scenarios:
        bundle = solve_nominal(domain, instance, params)
        report = evaluate_recoverability(domain, instance, bundle, scenarios, spec,
                                         "exact", params)
        return bundle, report

    if mode == "simultaneous":
        try:
            ext, base = build_extensive_form(domain, instance, scenarios, spec, alpha)
        except KernelSizeError as exc:
            raise KernelSizeError(
                f"{exc}; the extensive form is too large for the kernel, "
                f"try mode='separate'"
            ) from exc
        try:
            solution, stats = solve_milp(ext, params)
        except KernelSizeError as exc:
            raise KernelSizeError(
                f"{exc}; the extensive form is too large for the kernel, "
                f"try mode='separate'"
            ) from exc
        if not solution.is_valued:
            raise RobustnessError(
                f"extensive form solve ended {solution.status.value}")
        # project onto the first-stage variables and rebuild the plan bundle
        first_values = {h: solution.values[h] for h in range(base.num_variables)}
        first_solution = type(solution)(Status.FEASIBLE, first_values, None)
        from .model import evaluate_expr

        nominal_obj = evaluate_expr(base.objective, first_values)
        first_solution.objective_value = nominal_obj
        plan = domain.decode(instance, first_solution)
        bundle = PlanBundle(
            domain.name, plan, nominal_obj,
            kpi_report(base, first_solution),
            {base.var_name(h): v for h, v in first_values.items()},
        )
        report = evaluate_recoverability(domain, instance, bundle, scenarios, spec,
                                         "exact", params)
        return bundle, report

    if mode == "separate":
        candidates = candidate_pool(domain, instance, params)
        best = None
        best_total = math.inf
        best_report = None
        for bundle in candidates:
            report = evaluate_recoverability(domain, instance, bundle, scenarios, spec,
                                             "exact", params)
            total = report.total(alpha)
            if total < best_total - 1e-12:
                best, best_total, best_report = bundle, total, report
        assert best is not None
        return best, best_report

    raise RobustnessError(f"unknown mode {mode!r}")


def candidate_pool(
    domain, instance, params: Optional[SolveParams] = None, pool_size: int = POOL_SIZE
) -> list[PlanBundle]:
    """Deterministic first-stage candidates: the nominal optimum plus
    alternatives enumerated with no-good cuts on the binary variables."""
    params = params or SolveParams()
    base = domain.formulate(instance)
    work = base.clone("pool")
    binaries = [h for h in range(base.num_variables)
                if base.variables[h].kind == BINARY]
    out: list[PlanBundle] = []
    for trial in range(pool_size):
        solution, stats = solve_milp(work.clone().freeze(), params)
        if not solution.is_valued:
            break
        from .model import evaluate_expr

        nominal_obj = evaluate_expr(base.objective, solution.values)
        sol = type(solution)(Status.FEASIBLE,
                             {h: solution.values[h] for h in range(base.num_variables)},
                             nominal_obj)
        plan = domain.decode(instance, sol)
        out.append(PlanBundle(
            domain.name, plan, nominal_obj, kpi_report(base, sol),
            {base.var_name(h): v for h, v in sol.values.items()},
        ))
        if not binaries:
            break  # continuous model: a single candidate
        # exclude this exact binary pattern and re-solve
        expr = LinExpr()
        rhs = 1.0
        for h in binaries:
            if round(solution.values[h]) >= 1:
                expr.add_term(-1.0, h)
                rhs -= 1.0
            else:
                expr.add_term(1.0, h)
        work.add_constraint(f"nogood[{trial}]", expr, GE, rhs)
    return out
