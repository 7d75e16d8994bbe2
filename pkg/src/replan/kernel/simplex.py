"""Bounded-variable primal simplex on dense numpy arrays.

Two-phase method: phase 1 minimizes the total infeasibility carried by
artificial variables; phase 2 optimizes the real objective with artificials
pinned at zero. Pricing is Dantzig with a Bland fallback after a run of
degenerate pivots. The basis inverse is kept explicitly and refactorized
periodically to bound drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# nonbasic variable states
_AT_LOWER = 0
_AT_UPPER = 1
_NB_FREE = 2  # nonbasic with both bounds infinite, parked at 0
_BASIC = 3

_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-9
_DEGEN_TOL = 1e-10
_BLAND_TRIGGER = 50
_REFACTOR_EVERY = 100

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITER_LIMIT = "iteration_limit"
NUMERICAL = "numerical"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    message: str = ""


def solve_bounded_lp(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    feas_tol: float = 1e-7,
    max_iter: int | None = None,
) -> LpResult:
    """Minimize c@x subject to A@x = b and lo <= x <= hi."""
    solver = _BoundedSimplex(A, b, c, lo, hi, feas_tol, max_iter)
    return solver.solve()


class _BoundedSimplex:
    def __init__(self, A, b, c, lo, hi, feas_tol, max_iter):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape
        self.b = np.asarray(b, dtype=float)
        self.c_real = np.asarray(c, dtype=float)
        self.feas_tol = feas_tol
        self.max_iter = max_iter if max_iter is not None else 200 * (self.m + self.n + 10)
        self.iters = 0

        # full column set: structural + one artificial per row
        self.N = self.n + self.m
        self.A = np.zeros((self.m, self.N))
        self.A[:, : self.n] = A
        self.lo = np.concatenate([np.asarray(lo, dtype=float), np.zeros(self.m)])
        self.hi = np.concatenate([np.asarray(hi, dtype=float), np.full(self.m, np.inf)])

        self.x = np.zeros(self.N)
        self.state = np.full(self.N, _AT_LOWER, dtype=np.int8)
        for j in range(self.n):
            if np.isfinite(self.lo[j]):
                self.x[j] = self.lo[j]
                self.state[j] = _AT_LOWER
            elif np.isfinite(self.hi[j]):
                self.x[j] = self.hi[j]
                self.state[j] = _AT_UPPER
            else:
                self.x[j] = 0.0
                self.state[j] = _NB_FREE

        r = self.b - self.A[:, : self.n] @ self.x[: self.n]
        for i in range(self.m):
            col = self.n + i
            self.A[i, col] = 1.0 if r[i] >= 0 else -1.0
            self.x[col] = abs(r[i])
            self.state[col] = _BASIC
        self.basis = list(range(self.n, self.N))
        self.Binv = np.diag(np.sign(r + (r == 0)) * 1.0)  # inverse of +-1 diagonal
        self._pivots_since_refactor = 0

    # -- helpers -----------------------------------------------------------

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            raise _NumericalTrouble("singular basis at refactorization")
        self._recompute_basics()
        self._pivots_since_refactor = 0

    def _recompute_basics(self):
        nb = [j for j in range(self.N) if self.state[j] != _BASIC]
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        xb = self.Binv @ rhs
        for i, bi in enumerate(self.basis):
            self.x[bi] = xb[i]

    def _iterate(self, c: np.ndarray) -> str:
        """Run simplex to optimality for cost vector c. Returns a status."""
        degen_run = 0
        bland = False
        while True:
            if self.iters >= self.max_iter:
                return ITER_LIMIT
            self.iters += 1

            y = c[self.basis] @ self.Binv
            z = c - y @ self.A

            # entering candidates with their move direction
            best_q = -1
            best_score = _DUAL_TOL
            direction = 0
            for j in range(self.N):
                st = self.state[j]
                if st == _BASIC:
                    continue
                if self.hi[j] - self.lo[j] <= 0:
                    continue  # fixed variable can never move
                zj = z[j]
                if (st == _AT_LOWER or st == _NB_FREE) and zj < -best_score:
                    best_q, best_score, direction = j, -zj, +1
                    if bland:
                        break
                elif (st == _AT_UPPER or st == _NB_FREE) and zj > best_score:
                    best_q, best_score, direction = j, zj, -1
                    if bland:
                        break
            if best_q < 0:
                return OPTIMAL
            q = best_q

            w = self.Binv @ self.A[:, q]

            # ratio test: entering moves by t >= 0 in `direction`
            t_flip = self.hi[q] - self.lo[q]  # may be inf
            t_best = t_flip
            leave_pos = -1
            leave_at = _AT_LOWER
            for i, bi in enumerate(self.basis):
                delta = direction * w[i]  # x[bi] changes by -delta * t
                if delta > _PIVOT_TOL:
                    if np.isfinite(self.lo[bi]):
                        ratio = (self.x[bi] - self.lo[bi]) / delta
                        if ratio < t_best - _DEGEN_TOL or (
                            abs(ratio - t_best) <= _DEGEN_TOL
                            and leave_pos >= 0
                            and bi < self.basis[leave_pos]
                        ):
                            t_best, leave_pos, leave_at = max(ratio, 0.0), i, _AT_LOWER
                elif delta < -_PIVOT_TOL:
                    if np.isfinite(self.hi[bi]):
                        ratio = (self.hi[bi] - self.x[bi]) / (-delta)
                        if ratio < t_best - _DEGEN_TOL or (
                            abs(ratio - t_best) <= _DEGEN_TOL
                            and leave_pos >= 0
                            and bi < self.basis[leave_pos]
                        ):
                            t_best, leave_pos, leave_at = max(ratio, 0.0), i, _AT_UPPER

            if not np.isfinite(t_best):
                return UNBOUNDED

            t = t_best
            if t <= _DEGEN_TOL:
                degen_run += 1
                if degen_run > _BLAND_TRIGGER:
                    bland = True
            else:
                degen_run = 0
                bland = False

            # apply the move
            self.x[q] += direction * t
            for i, bi in enumerate(self.basis):
                self.x[bi] -= direction * t * w[i]

            if leave_pos < 0:
                # bound flip, no basis change
                self.state[q] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                continue

            leaving = self.basis[leave_pos]
            wr = w[leave_pos]
            if abs(wr) < _PIVOT_TOL:
                raise _NumericalTrouble("pivot element below tolerance")
            self.basis[leave_pos] = q
            self.state[q] = _BASIC
            self.state[leaving] = leave_at
            self.x[leaving] = self.lo[leaving] if leave_at == _AT_LOWER else self.hi[leaving]

            # eta update of the explicit inverse
            row = self.Binv[leave_pos, :] / wr
            self.Binv -= np.outer(w, row)
            self.Binv[leave_pos, :] = row
            self._pivots_since_refactor += 1
            if self._pivots_since_refactor >= _REFACTOR_EVERY:
                self._refactor()

    # -- driver ------------------------------------------------------------

    def solve(self) -> LpResult:
        scale = 1.0 + float(np.max(np.abs(self.b))) if self.m else 1.0
        try:
            c1 = np.zeros(self.N)
            c1[self.n :] = 1.0
            status = self._iterate(c1)
            if status == ITER_LIMIT:
                return LpResult(ITER_LIMIT, None, None, self.iters, "phase 1 iteration limit")
            if status == UNBOUNDED:
                return LpResult(NUMERICAL, None, None, self.iters, "phase 1 unbounded")
            infeas = float(np.sum(self.x[self.n :]))
            if infeas > self.feas_tol * scale:
                return LpResult(INFEASIBLE, None, None, self.iters, f"phase 1 residual {infeas:g}")

            # pin artificials at zero for phase 2
            self.hi[self.n :] = 0.0
            self.x[self.n :] = np.maximum(self.x[self.n :], 0.0)

            c2 = np.zeros(self.N)
            c2[: self.n] = self.c_real
            status = self._iterate(c2)
            if status == ITER_LIMIT:
                return LpResult(ITER_LIMIT, None, None, self.iters, "phase 2 iteration limit")
            if status == UNBOUNDED:
                return LpResult(UNBOUNDED, None, None, self.iters)

            # verify against a fresh factorization; never return a wrong Optimal
            self._refactor()
            x = self.x[: self.n].copy()
            resid = float(np.max(np.abs(self.A[:, : self.n] @ x + self.A[:, self.n :] @ self.x[self.n :] - self.b))) if self.m else 0.0
            lo, hi = self.lo[: self.n], self.hi[: self.n]
            bound_breach = float(np.max(np.maximum(lo - x, x - hi), initial=0.0))
            if resid > self.feas_tol * scale or bound_breach > self.feas_tol * scale:
                return LpResult(
                    NUMERICAL, None, None, self.iters,
                    f"verification failed: residual {resid:g}, bound breach {bound_breach:g}",
                )
            x = np.clip(x, lo, hi)
            return LpResult(OPTIMAL, x, float(self.c_real @ x), self.iters)
        except _NumericalTrouble as exc:
            return LpResult(NUMERICAL, None, None, self.iters, str(exc))


class _NumericalTrouble(Exception):
    pass
