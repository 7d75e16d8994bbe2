from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

MAX_VARIABLES = 2000
MAX_CONSTRAINTS = 2000


class KernelSizeError(ValueError):
    """Model exceeds the desk-scale caps this kernel is built for."""


@dataclass
class SolveParams:
    feas_tol: float = 1e-7
    int_tol: float = 1e-6
    node_limit: int = 100_000
    time_limit: Optional[float] = None
    gap_tol: float = 1e-9

    def validate(self) -> None:
        if self.feas_tol <= 0 or self.int_tol <= 0 or self.gap_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


@dataclass
class SolveStats:
    simplex_iterations: int = 0
    nodes_explored: int = 0
    best_bound: float = float("nan")
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        # wall_time stays out: serialized results must be reproducible
        # byte for byte for a fixed seed
        return {
            "simplex_iterations": self.simplex_iterations,
            "nodes_explored": self.nodes_explored,
            "best_bound": self.best_bound,
        }
