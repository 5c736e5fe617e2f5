"""Bounded-variable primal simplex returning true basic (vertex) solutions.

The solver paths built on top of this need genuine vertices, not merely
optimal points: integrality of network-matrix programs and the single
shared fractional value of budgeted solutions are properties of basic
feasible solutions, so an interior-point method would not serve.  This is a
dense two-phase revised simplex with Dantzig pricing, Bland's rule engaged
after a stall, lowest-variable-index tie-breaking in ratio tests, and
periodic refactorization of the basis inverse.  Callers are expected to
pre-scale coefficients to unit magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IterationLimitError, SolverError

TOL_FEAS = 1e-9
TOL_ZERO = 1e-9
TOL_INTEGRAL = 1e-7

LE, GE, EQ = "<=", ">=", "="

_STALL_LIMIT = 100
_REFACTOR_EVERY = 64


@dataclass
class LinearProgram:
    """Maximize objective . x subject to rows and per-variable bounds.

    Bounds default to [0, 1].  Row coefficients are given sparsely as
    {variable index: value}.
    """

    n: int
    objective: np.ndarray = field(init=False)
    lower: np.ndarray = field(init=False)
    upper: np.ndarray = field(init=False)
    rows: list[tuple[dict[int, float], str, float]] = field(default_factory=list, init=False)

    def __post_init__(self) -> None:
        self.objective = np.zeros(self.n)
        self.lower = np.zeros(self.n)
        self.upper = np.ones(self.n)

    def set_objective(self, coeffs: dict[int, float]) -> None:
        for j, v in coeffs.items():
            self.objective[j] = v

    def set_bounds(self, j: int, lower: float, upper: float) -> None:
        if lower > upper:
            raise ValueError(f"bounds crossed for variable {j}: [{lower}, {upper}]")
        self.lower[j] = lower
        self.upper[j] = upper

    def add_row(self, coeffs: dict[int, float], relation: str, rhs: float) -> None:
        if relation not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {relation!r}")
        self.rows.append((dict(coeffs), relation, rhs))

    def dump(self) -> str:
        """Human-readable rendering, for debugging LP constructions."""

        def term(j: int, v: float) -> str:
            return f"{v:+g}*x{j}"

        lines = ["max " + " ".join(term(j, v) for j, v in enumerate(self.objective) if v)]
        for coeffs, rel, rhs in self.rows:
            body = " ".join(term(j, v) for j, v in sorted(coeffs.items()))
            lines.append(f"  {body} {rel} {rhs:g}")
        for j in range(self.n):
            lines.append(f"  {self.lower[j]:g} <= x{j} <= {self.upper[j]:g}")
        return "\n".join(lines)


@dataclass
class VertexSolution:
    status: str  # optimal | infeasible | unbounded
    values: np.ndarray
    objective_value: float
    basis: list[int]

    def __getitem__(self, j: int) -> float:
        return float(self.values[j])


class _Worker:
    """Simplex state over the extended system [structural | slack | artificial]."""

    def __init__(self, lp: LinearProgram):
        m = len(lp.rows)
        n = lp.n
        n_slack = sum(1 for _, rel, _ in lp.rows if rel != EQ)
        total = n + n_slack + m
        A = np.zeros((m, total))
        b = np.zeros(m)
        lower = np.zeros(total)
        upper = np.full(total, np.inf)
        lower[:n] = lp.lower
        upper[:n] = lp.upper
        slack_at = n
        for i, (coeffs, rel, rhs) in enumerate(lp.rows):
            for j, v in coeffs.items():
                A[i, j] = v
            b[i] = rhs
            if rel != EQ:
                A[i, slack_at] = 1.0 if rel == LE else -1.0
                slack_at += 1
        self.m, self.n_struct, self.total = m, n, total
        self.art_start = n + n_slack
        self.A, self.b = A, b
        self.lower, self.upper = lower, upper
        # Non-artificial variables start at their lower bounds.  A row whose
        # slack can absorb the residual feasibly starts with the slack basic;
        # only the remaining rows get an artificial, oriented non-negative.
        self.x = lower.copy()
        resid = b - A @ self.x
        self.basis = []
        slack_at = n
        self.has_artificials = False
        for i, (_, rel, _) in enumerate(lp.rows):
            slack_j = None
            if rel != EQ:
                slack_j = slack_at
                slack_at += 1
                slack_value = resid[i] if rel == LE else -resid[i]
                if slack_value >= 0:
                    self.x[slack_j] = slack_value
                    self.basis.append(slack_j)
                    continue
            j = self.art_start + i
            A[i, j] = 1.0 if resid[i] >= 0 else -1.0
            self.x[j] = abs(resid[i])
            self.basis.append(j)
            self.has_artificials = True
        self.in_basis = np.zeros(total, dtype=bool)
        self.in_basis[self.basis] = True
        self.b_inv = np.diag(A[np.arange(m), self.basis]) if m else np.zeros((0, 0))
        self.pivots_since_refactor = 0

    def _refactor(self) -> None:
        if self.m:
            self.b_inv = np.linalg.inv(self.A[:, self.basis])
        self.pivots_since_refactor = 0

    def _recompute_basics(self) -> None:
        if not self.m:
            return
        nonbasic = ~self.in_basis
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.b_inv @ rhs

    def maximize(self, objective: np.ndarray, max_iters: int) -> str:
        fixed = self.upper - self.lower <= 0.0
        if self.m == 0:
            up = (objective > TOL_ZERO) & ~fixed
            if np.any(up & ~np.isfinite(self.upper)):
                return "unbounded"
            self.x[up] = self.upper[up]
            down = (objective < -TOL_ZERO) & ~fixed
            self.x[down] = self.lower[down]
            return "optimal"
        bland = False
        stall = 0
        last_obj = -np.inf
        self._recompute_basics()
        for _ in range(max_iters):
            y = objective[self.basis] @ self.b_inv
            rc = objective - y @ self.A
            nonbasic = ~self.in_basis
            at_upper = nonbasic & np.isfinite(self.upper) & (self.x >= self.upper - 1e-12)
            at_lower = nonbasic & ~at_upper
            can_up = at_lower & (rc > TOL_ZERO) & ~fixed
            can_down = at_upper & (rc < -TOL_ZERO) & ~fixed
            eligible = np.flatnonzero(can_up | can_down)
            if eligible.size == 0:
                return "optimal"
            if bland:
                enter = int(eligible[0])
            else:
                enter = int(eligible[np.argmax(np.abs(rc[eligible]))])
            increasing = bool(can_up[enter])
            d = self.b_inv @ self.A[:, enter]
            step = d if increasing else -d
            # Basic variable i drops toward its lower bound when step[i] > 0
            # and climbs toward its upper bound when step[i] < 0.
            xb = self.x[self.basis]
            lb = self.lower[self.basis]
            ub = self.upper[self.basis]
            pos = step > TOL_ZERO
            neg = step < -TOL_ZERO
            safe_step = np.where(pos, step, 1.0)
            safe_neg = np.where(neg, -step, 1.0)
            t_low = np.where(pos, np.maximum(xb - lb, 0.0) / safe_step, np.inf)
            t_high = np.where(neg, np.maximum(ub - xb, 0.0) / safe_neg, np.inf)
            ratios = np.minimum(t_low, t_high)
            own_range = self.upper[enter] - self.lower[enter]
            t_basic = float(np.min(ratios)) if ratios.size else np.inf
            if t_basic < own_range:
                near = np.flatnonzero(ratios <= t_basic + 1e-12)
                leave_row = int(min(near, key=lambda i: self.basis[i]))
                t = max(t_basic, 0.0)
            else:
                leave_row = -1
                t = own_range
            if not np.isfinite(t):
                return "unbounded"
            direction = 1.0 if increasing else -1.0
            if leave_row < 0:
                # Bound flip: the entering variable crosses to its other
                # bound and the basic values absorb the shift.
                self.x[self.basis] -= direction * t * d
                self.x[enter] = self.upper[enter] if increasing else self.lower[enter]
            else:
                self.x[self.basis] -= direction * t * d
                self.x[enter] = self.x[enter] + direction * t
                out = self.basis[leave_row]
                self.x[out] = lb[leave_row] if step[leave_row] > 0 else ub[leave_row]
                self.basis[leave_row] = enter
                self.in_basis[out] = False
                self.in_basis[enter] = True
                pivot = d[leave_row]
                self.pivots_since_refactor += 1
                if abs(pivot) < 1e-11 or self.pivots_since_refactor >= _REFACTOR_EVERY:
                    self._refactor()
                    self._recompute_basics()
                else:
                    row = self.b_inv[leave_row] / pivot
                    self.b_inv -= np.outer(d, row)
                    self.b_inv[leave_row] = row
            obj_now = float(objective @ self.x)
            if obj_now > last_obj + 1e-12 * (1.0 + abs(last_obj)):
                last_obj = obj_now
                stall = 0
            else:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
        raise IterationLimitError(f"simplex exceeded {max_iters} pivots")

    def verify_feasible(self, lp: LinearProgram, tol: float) -> None:
        x = self.x[: self.n_struct]
        if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
            raise SolverError("solution violates variable bounds")
        for coeffs, rel, rhs in lp.rows:
            lhs = sum(v * x[j] for j, v in coeffs.items())
            if rel == LE and lhs > rhs + tol:
                raise SolverError(f"row violated: {lhs} <= {rhs}")
            if rel == GE and lhs < rhs - tol:
                raise SolverError(f"row violated: {lhs} >= {rhs}")
            if rel == EQ and abs(lhs - rhs) > tol:
                raise SolverError(f"row violated: {lhs} = {rhs}")


def solve(lp: LinearProgram, max_iters: int | None = None) -> VertexSolution:
    """Solve to an optimal basic feasible solution.

    Raises IterationLimitError when the pivot budget runs out, which is
    reported distinctly from infeasibility.
    """
    w = _Worker(lp)
    if max_iters is None:
        max_iters = 2000 + 40 * (w.m + w.total)
    if w.m and w.has_artificials:
        phase1 = np.zeros(w.total)
        phase1[w.art_start :] = -1.0
        status = w.maximize(phase1, max_iters)
        w._refactor()
        w._recompute_basics()
        if status == "unbounded":
            raise SolverError("phase-1 objective unbounded; numerical trouble")
        art_sum = float(np.sum(w.x[w.art_start :]))
        if art_sum > 1e-7:
            return VertexSolution(
                status="infeasible",
                values=w.x[: w.n_struct].copy(),
                objective_value=float("nan"),
                basis=list(w.basis),
            )
        w.upper[w.art_start :] = 0.0
        w.x[w.art_start :] = 0.0
    objective = np.zeros(w.total)
    objective[: w.n_struct] = lp.objective
    status = w.maximize(objective, max_iters)
    w._refactor()
    w._recompute_basics()
    if status == "unbounded":
        return VertexSolution(
            status="unbounded",
            values=w.x[: w.n_struct].copy(),
            objective_value=float("inf"),
            basis=list(w.basis),
        )
    w.verify_feasible(lp, tol=1e-6)
    values = w.x[: w.n_struct].copy()
    return VertexSolution(
        status="optimal",
        values=values,
        objective_value=float(lp.objective @ values),
        basis=list(w.basis),
    )
