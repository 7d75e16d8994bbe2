"""LP entry point and branch-and-bound MILP solver on top of the simplex."""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from ..model import EQ, GE, LE, Model, Solution, Status
from . import simplex
from .params import MAX_CONSTRAINTS, MAX_VARIABLES, KernelSizeError, SolveParams, SolveStats


def _check_size(model: Model) -> None:
    if model.num_variables > MAX_VARIABLES:
        raise KernelSizeError(
            f"model has {model.num_variables} variables; kernel caps at {MAX_VARIABLES}"
        )
    if model.num_constraints > MAX_CONSTRAINTS:
        raise KernelSizeError(
            f"model has {model.num_constraints} constraints; kernel caps at {MAX_CONSTRAINTS}"
        )


def model_to_arrays(model: Model):
    """Convert to equality standard form with slack columns appended."""
    n = model.num_variables
    m = model.num_constraints
    n_slack = sum(1 for c in model.constraints if c.sense != EQ)
    A = np.zeros((m, n + n_slack))
    b = np.zeros(m)
    lo = np.array([v.lower for v in model.variables] + [0.0] * n_slack)
    hi = np.array([v.upper for v in model.variables] + [math.inf] * n_slack)
    c = np.zeros(n + n_slack)
    for v, coef in model.objective.coeffs.items():
        c[v] = coef
    s = n
    for i, cons in enumerate(model.constraints):
        for v, coef in cons.expr.coeffs.items():
            A[i, v] = coef
        b[i] = cons.rhs - cons.expr.constant
        if cons.sense == LE:
            A[i, s] = 1.0
            s += 1
        elif cons.sense == GE:
            A[i, s] = -1.0
            s += 1
    return A, b, c, lo, hi


_LP_STATUS = {
    simplex.OPTIMAL: Status.OPTIMAL,
    simplex.INFEASIBLE: Status.INFEASIBLE,
    simplex.UNBOUNDED: Status.UNBOUNDED,
    simplex.ITER_LIMIT: Status.LIMIT_REACHED,
    simplex.NUMERICAL: Status.LIMIT_REACHED,
}


def solve_lp(model: Model, params: SolveParams | None = None) -> tuple[Solution, SolveStats]:
    """Solve the LP relaxation (integrality is ignored)."""
    params = params or SolveParams()
    params.validate()
    _check_size(model)
    t0 = time.perf_counter()
    A, b, c, lo, hi = model_to_arrays(model)
    res = simplex.solve_bounded_lp(A, b, c, lo, hi, feas_tol=params.feas_tol)
    stats = SolveStats(simplex_iterations=res.iterations, nodes_explored=0,
                       wall_time=time.perf_counter() - t0)
    status = _LP_STATUS[res.status]
    if status is Status.OPTIMAL:
        values = {i: float(res.x[i]) for i in range(model.num_variables)}
        obj = res.objective + model.objective.constant
        stats.best_bound = obj
        return Solution(Status.OPTIMAL, values, obj), stats
    return Solution(status), stats


def solve_milp(model: Model, params: SolveParams | None = None) -> tuple[Solution, SolveStats]:
    """Best-first branch and bound with most-fractional branching."""
    params = params or SolveParams()
    params.validate()
    _check_size(model)
    t0 = time.perf_counter()
    A, b, c, lo0, hi0 = model_to_arrays(model)
    int_vars = model.integer_handles()
    obj_const = model.objective.constant
    stats = SolveStats()

    def lp(lo, hi):
        res = simplex.solve_bounded_lp(A, b, c, lo, hi, feas_tol=params.feas_tol)
        stats.simplex_iterations += res.iterations
        return res

    # node = (bound, seq, lo, hi); best-first by bound, FIFO on ties
    heap: list = []
    seq = 0
    heapq.heappush(heap, (-math.inf, seq, lo0, hi0))
    incumbent: np.ndarray | None = None
    inc_obj = math.inf
    hit_limit = False
    numerical_trouble = False
    root_unbounded = False

    def margin():
        return params.gap_tol * max(1.0, abs(inc_obj)) if incumbent is not None else math.inf

    while heap:
        if stats.nodes_explored >= params.node_limit:
            hit_limit = True
            break
        if params.time_limit is not None and time.perf_counter() - t0 > params.time_limit:
            hit_limit = True
            break
        bound, node_seq, lo, hi = heapq.heappop(heap)
        if incumbent is not None and bound >= inc_obj - margin():
            continue
        stats.nodes_explored += 1
        res = lp(lo, hi)
        if res.status == simplex.INFEASIBLE:
            continue
        if res.status == simplex.UNBOUNDED:
            if node_seq == 0:
                root_unbounded = True
                break
            # cannot bound this subtree; at desk scale treat as unbounded model
            root_unbounded = True
            break
        if res.status in (simplex.ITER_LIMIT, simplex.NUMERICAL):
            numerical_trouble = True
            continue
        node_obj = res.objective + obj_const
        if incumbent is not None and node_obj >= inc_obj - margin():
            continue
        # most fractional integer variable, ties by lowest handle
        branch_var = -1
        branch_score = params.int_tol
        for j in int_vars:
            f = abs(res.x[j] - round(res.x[j]))  # distance to nearest integer
            if f > branch_score:
                branch_var, branch_score = j, f
        if branch_var < 0:
            incumbent = res.x.copy()
            inc_obj = node_obj
            continue
        v = res.x[branch_var]
        for new_lo, new_hi in (
            (lo, _with(hi, branch_var, math.floor(v))),
            (_with(lo, branch_var, math.ceil(v)), hi),
        ):
            if new_lo[branch_var] <= new_hi[branch_var]:
                seq += 1
                heapq.heappush(heap, (node_obj, seq, new_lo, new_hi))

    stats.wall_time = time.perf_counter() - t0
    open_bounds = [e[0] for e in heap]
    if root_unbounded:
        stats.best_bound = -math.inf
        return Solution(Status.UNBOUNDED), stats

    if incumbent is not None:
        values = {i: float(incumbent[i]) for i in range(model.num_variables)}
        if hit_limit or any(bd < inc_obj - margin() for bd in open_bounds):
            stats.best_bound = min(open_bounds + [inc_obj]) if open_bounds else inc_obj
            return Solution(Status.LIMIT_REACHED, values, inc_obj), stats
        stats.best_bound = inc_obj
        if numerical_trouble:
            return Solution(Status.LIMIT_REACHED, values, inc_obj), stats
        return Solution(Status.OPTIMAL, values, inc_obj), stats
    if hit_limit or numerical_trouble:
        stats.best_bound = min(open_bounds) if open_bounds else math.nan
        return Solution(Status.LIMIT_REACHED), stats
    stats.best_bound = math.inf
    return Solution(Status.INFEASIBLE), stats


def _with(arr: np.ndarray, idx: int, value: float) -> np.ndarray:
    out = arr.copy()
    out[idx] = value
    return out
