"""Variable Neighborhood Search repair: repeated restricted repair MILPs.

Shaking picks k blocks of decision variables; a restricted MILP re-optimizes
only those blocks (plus all elastic/deviation auxiliaries) with everything
else pinned at the current point. Strict improvement resets k to 1, otherwise
k grows and wraps. Block sampling uses a xorshift64* generator so that runs
are reproducible bit for bit across platforms for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .kernel import SolveParams, SolveStats, solve_milp
from .model import Solution, Status, check_feasible
from .repair import RepairModel, RepairResult, incumbent_projection, result_kpis, variable_diff


class VnsError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    id: str
    var_names: tuple[str, ...]


@dataclass(frozen=True)
class VnsParams:
    k_max: int = 3
    iter_budget: int = 50
    sub_node_limit: int = 2000
    seed: int = 1

    def __post_init__(self):
        if self.k_max < 1:
            raise VnsError("k_max must be >= 1")
        if self.iter_budget < 1:
            raise VnsError("iter_budget must be >= 1")

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "iter_budget": self.iter_budget,
                "sub_node_limit": self.sub_node_limit, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "VnsParams":
        return cls(int(d.get("k_max", 3)), int(d.get("iter_budget", 50)),
                   int(d.get("sub_node_limit", 2000)), int(d.get("seed", 1)))


class XorShift64Star:
    """Deterministic 64-bit generator (xorshift64*)."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = (seed & self.MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12)
        x ^= (x << 25) & self.MASK
        x ^= (x >> 27)
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & self.MASK

    def randrange(self, n: int) -> int:
        # modulo bias is irrelevant at these sizes
        return self.next_u64() % n

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n) via partial Fisher-Yates."""
        idx = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]


def enumerate_blocks(domain, instance, rm: RepairModel) -> list[Block]:
    """Deterministic partition-style blocks of the unfrozen decision variables."""
    model = rm.model
    frozen_names = {model.var_name(h) for h in rm.frozen}

    def unfrozen(names):
        return tuple(n for n in names if n not in frozen_names and model.has_var(n))

    blocks: list[Block] = []
    if domain.name == "tail":
        # per-aircraft route suffixes at each distinct departure time
        dep_times = sorted({f.dep for f in instance.flights})
        for a in instance.aircraft:
            prefix = f"x[{a.id},"
            arc_vars = [
                (model.var_start_time.get(h, 0.0), model.var_name(h))
                for h in range(rm.base_num_variables)
                if model.var_name(h).startswith(prefix)
            ]
            seen: set[tuple[str, ...]] = set()
            for cut in dep_times:
                names = unfrozen(sorted(n for t, n in arc_vars if t >= cut))
                if names and names not in seen:
                    seen.add(names)
                    blocks.append(Block(f"suffix[{a.id},{cut}]", names))
        # per-flight assignment blocks: every arc into the flight
        for f in instance.flights:
            names = unfrozen(sorted(
                model.var_name(h) for h in range(rm.base_num_variables)
                if model.var_name(h).endswith(f",{f.id}]")
            ))
            if names:
                blocks.append(Block(f"flight[{f.id}]", names))
    elif domain.name == "production":
        for prod in instance.products:
            for t in range(1, instance.periods + 1):
                names = []
                for c in instance.capabilities:
                    if c.product == prod:
                        names.append(f"p[{c.plant},{prod},{t}]")
                for lane in instance.lanes:
                    names.append(f"ship[{lane.origin},{lane.dest},{prod},{t}]")
                for loc in instance.locations:
                    names.append(f"inv[{loc.id},{prod},{t}]")
                for o in instance.orders:
                    if o.product == prod and o.due == t:
                        names.append(f"deliv[{o.id}]")
                        names.append(f"short[{o.id}]")
                if t == instance.periods:
                    for loc in instance.locations:
                        names.append(f"tshort[{loc.id},{prod}]")
                names = unfrozen(sorted(names))
                if names:
                    blocks.append(Block(f"cell[{prod},{t}]", names))
    else:
        raise VnsError(f"unknown domain {domain.name!r}")
    return blocks


def vns_repair(
    rm: RepairModel,
    blocks: list[Block],
    vns_params: Optional[VnsParams] = None,
    params: Optional[SolveParams] = None,
) -> RepairResult:
    vp = vns_params or VnsParams()
    params = params or SolveParams()
    model = rm.model

    current = incumbent_projection(rm)
    current_feasible = not check_feasible(model, current, tol=max(1e-6, params.feas_tol))
    best_obj = current.objective_value if current_feasible else math.inf
    if not blocks and not current_feasible:
        raise VnsError("no blocks to search and the incumbent projection is infeasible")

    k_max = min(vp.k_max, len(blocks)) if blocks else 0
    rng = XorShift64Star(vp.seed)
    stats = SolveStats()
    trajectory: list[dict] = []
    sub_params = replace(params, node_limit=vp.sub_node_limit)

    k = 1
    for it in range(1, vp.iter_budget + 1):
        if k_max == 0:
            break
        chosen = sorted(rng.sample(len(blocks), k))
        free_names = set()
        for bi in chosen:
            free_names.update(blocks[bi].var_names)

        sub = model.clone("vns-sub")
        for h in range(rm.base_num_variables):
            name = model.var_name(h)
            if name in free_names or h in rm.frozen:
                continue  # frozen vars already have pinned bounds
            v = sub.variables[h]
            val = current.values[h]
            if v.kind != "continuous":
                val = float(round(val))
            val = min(max(val, v.lower), v.upper)
            sub.variables[h] = type(v)(v.name, v.kind, val, val)
        sub.freeze()

        solution, sub_stats = solve_milp(sub, sub_params)
        stats.simplex_iterations += sub_stats.simplex_iterations
        stats.nodes_explored += sub_stats.nodes_explored
        stats.wall_time += sub_stats.wall_time

        accepted = False
        if solution.is_valued:
            obj = solution.objective_value
            if obj < best_obj - 1e-9 * max(1.0, abs(best_obj)):
                current = Solution(Status.FEASIBLE, dict(solution.values), obj)
                best_obj = obj
                accepted = True
        trajectory.append({"iteration": it, "k": k, "blocks": [blocks[bi].id for bi in chosen],
                           "accepted": accepted, "objective": best_obj})
        k = 1 if accepted else (k % k_max) + 1

    stats.best_bound = best_obj
    if not math.isfinite(best_obj):
        sol = Solution(Status.INFEASIBLE)
        return RepairResult(sol, {}, [], stats, trajectory)
    final = Solution(Status.FEASIBLE, current.values, best_obj)
    kpis = result_kpis(rm, final)
    return RepairResult(final, kpis, variable_diff(rm, final), stats, trajectory)
