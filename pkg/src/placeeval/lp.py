"""Dense two-phase simplex for standard-form linear programs.

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

Bland's smallest-index rule is used for both the entering and the leaving
variable, so the method cannot cycle. The tableau is dense; programs here
have at most a few hundred columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ArgumentError

PIVOT_TOL = 1e-11
COST_TOL = 1e-9
FEAS_TOL = 1e-9


class LPStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    labels: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.size == 0:
            A = A.reshape(len(b), len(c))
        if A.shape != (len(b), len(c)):
            raise ArgumentError(
                f"constraint matrix shape {A.shape} inconsistent with "
                f"{len(b)} right-hand sides and {len(c)} variables"
            )
        if self.labels and len(self.labels) != len(c):
            raise ArgumentError("one label per variable required")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ArgumentError("program data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    basis: tuple[int, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])


def _run_simplex(T: np.ndarray, basis: list[int], n_cols: int) -> bool:
    """Iterate on tableau ``T`` whose last row holds reduced costs and whose
    last column holds the RHS. Only the first ``n_cols`` columns may enter.
    Returns False if the program is unbounded."""
    m = T.shape[0] - 1
    while True:
        cost = T[-1, :n_cols]
        entering = np.flatnonzero(cost < -COST_TOL)
        if entering.size == 0:
            return True
        col = int(entering[0])
        column = T[:m, col]
        positive = np.flatnonzero(column > PIVOT_TOL)
        if positive.size == 0:
            return False
        ratios = T[positive, -1] / column[positive]
        best = ratios.min()
        tied = positive[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col


def solve_lp(problem: LinearProgram) -> LPSolution:
    """Solve ``problem`` by the two-phase method.

    Infeasible and unbounded programs are reported through the status rather
    than raised.
    """
    c, A, b = problem.objective, problem.A.copy(), problem.b.copy()
    m, n = A.shape
    if n == 0:
        raise ArgumentError("program has no variables")

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: one artificial per row, minimise their sum.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _run_simplex(T, basis, n)

    scale = 1.0 + (np.abs(b).max() if m else 0.0)
    if -T[-1, -1] > FEAS_TOL * scale:
        return LPSolution(LPStatus.INFEASIBLE)

    # Drive zero-level artificials out of the basis; drop redundant rows.
    keep = []
    for i in range(m):
        if basis[i] >= n:
            candidates = np.flatnonzero(np.abs(T[i, :n]) > 1e-9)
            if candidates.size == 0:
                continue
            _pivot(T, i, int(candidates[0]))
            basis[i] = int(candidates[0])
        keep.append(i)

    rows = keep
    T2 = np.zeros((len(rows) + 1, n + 1))
    T2[:-1, :n] = T[rows, :n]
    T2[:-1, -1] = T[rows, -1]
    basis2 = [basis[i] for i in rows]
    T2[-1, :n] = c
    for i, j in enumerate(basis2):
        if c[j] != 0.0:
            T2[-1] -= c[j] * T2[i]

    if not _run_simplex(T2, basis2, n):
        return LPSolution(LPStatus.UNBOUNDED)

    x = np.zeros(n)
    if basis2:
        # Recompute basic values from the original data to shed pivot round-off.
        B = problem.A[:, basis2]
        rhs = problem.b
        try:
            xb, *_ = np.linalg.lstsq(B, rhs, rcond=None)
        except np.linalg.LinAlgError:
            xb = T2[:-1, -1]
        if np.any(xb < -FEAS_TOL * scale):
            xb = T2[:-1, -1]
        x[basis2] = np.clip(xb, 0.0, None)
    return LPSolution(LPStatus.OPTIMAL, x, float(c @ x), tuple(basis2))
