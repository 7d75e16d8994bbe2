"""In-house LP/MILP kernel: bounded-variable primal simplex + branch and bound."""

from .params import SolveParams, SolveStats, KernelSizeError
from .milp import solve_lp, solve_milp

__all__ = ["SolveParams", "SolveStats", "KernelSizeError", "solve_lp", "solve_milp"]
