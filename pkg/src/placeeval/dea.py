"""Input-oriented CCR and super-efficiency DEA scores.

For the evaluated unit q with inputs x_q and outputs y_q the envelopment
program is

    min theta
    s.t. sum_j lambda_j x_ij + s_i^- = theta x_iq     (i = 1..m)
         sum_j lambda_j y_kj - s_k^+ = y_kq           (k = 1..r)
         lambda, s^-, s^+ >= 0

where j runs over every unit (CCR) or every unit except q (super-efficiency).
After theta is found, a second program maximises total slack at that theta so
the reported slacks are the maximal ones rather than an arbitrary vertex.

Returns to scale follow the labelling used by the source study: a lambda sum
above one is tagged increasing and below one decreasing. Much of the DEA
literature uses the opposite mapping; the label is informational only.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ArgumentError
from .lp import LinearProgram, solve_lp
from .panel import DEADataset, OutcomePanel

RTS_EPS = 1e-6


class RTS(str, Enum):
    INCREASING = "Increasing"
    CONSTANT = "Constant"
    DECREASING = "Decreasing"


def classify_rts(lambda_sum: float, eps: float = RTS_EPS) -> RTS:
    if lambda_sum > 1 + eps:
        return RTS.INCREASING
    if lambda_sum < 1 - eps:
        return RTS.DECREASING
    return RTS.CONSTANT


@dataclass(frozen=True)
class EfficiencyResult:
    unit: str
    year: int
    feasible: bool
    theta: float | None
    lambdas: dict[str, float]
    input_slacks: np.ndarray
    output_slacks: np.ndarray
    lambda_sum: float | None
    rts_class: RTS | None
    super_mode: bool

    @property
    def score(self) -> float:
        """theta, or +inf when the super-efficiency program is infeasible."""
        return self.theta if self.feasible else math.inf


def _envelopment(X: np.ndarray, Y: np.ndarray, q: int, refs: list[int]):
    """Build the theta-minimising program for unit ``q`` over reference set ``refs``.

    Variable order: theta, lambda_refs..., s^- (m), s^+ (r).
    """
    m, r = X.shape[1], Y.shape[1]
    k = len(refs)
    n_var = 1 + k + m + r
    A = np.zeros((m + r, n_var))
    b = np.zeros(m + r)
    A[:m, 0] = -X[q]
    A[:m, 1:1 + k] = X[refs].T
    A[:m, 1 + k:1 + k + m] = np.eye(m)
    A[m:, 1:1 + k] = Y[refs].T
    A[m:, 1 + k + m:] = -np.eye(r)
    b[m:] = Y[q]
    c = np.zeros(n_var)
    c[0] = 1.0
    return A, b, c


def _max_slack(X, Y, q, refs, theta):
    """Second stage: with theta fixed, maximise the sum of slacks."""
    m, r = X.shape[1], Y.shape[1]
    k = len(refs)
    A = np.zeros((m + r, k + m + r))
    A[:m, :k] = X[refs].T
    A[:m, k:k + m] = np.eye(m)
    A[m:, :k] = Y[refs].T
    A[m:, k + m:] = -np.eye(r)
    b = np.concatenate([theta * X[q], Y[q]])
    c = np.concatenate([np.zeros(k), -np.ones(m + r)])
    return solve_lp(LinearProgram(c, A, b))


def _solve_unit(X, Y, q, unit_names, year, super_mode) -> EfficiencyResult:
    n, m, r = X.shape[0], X.shape[1], Y.shape[1]
    refs = [j for j in range(n) if not (super_mode and j == q)]
    A, b, c = _envelopment(X, Y, q, refs)
    sol = solve_lp(LinearProgram(c, A, b))
    unit = unit_names[q]
    if not sol.optimal:
        return EfficiencyResult(
            unit, year, False, None, {}, np.zeros(m), np.zeros(r), None, None, super_mode
        )
    theta = float(sol.x[0])
    k = len(refs)
    lam, s_in, s_out = sol.x[1:1 + k], sol.x[1 + k:1 + k + m], sol.x[1 + k + m:]
    stage2 = _max_slack(X, Y, q, refs, theta)
    if stage2.optimal:
        lam, s_in, s_out = stage2.x[:k], stage2.x[k:k + m], stage2.x[k + m:]
    lambdas = {unit_names[j]: float(v) for j, v in zip(refs, lam)}
    lambda_sum = float(lam.sum())
    return EfficiencyResult(
        unit, year, True, theta, lambdas, np.array(s_in), np.array(s_out),
        lambda_sum, classify_rts(lambda_sum), super_mode,
    )


def _locate(data: DEADataset, year: int, unit: str):
    X, Y = data.year_block(year)
    return X, Y, data.unit_index(unit)


def ccr_efficiency(data: DEADataset, year: int, unit: str) -> EfficiencyResult:
    """Input-oriented constant-returns score; the unit is in its own reference set."""
    X, Y, q = _locate(data, year, unit)
    return _solve_unit(X, Y, q, data.unit_names, int(year), super_mode=False)


def super_efficiency(data: DEADataset, year: int, unit: str) -> EfficiencyResult:
    """Same program with the evaluated unit removed from the reference set.

    Inefficient units keep their CCR score; efficient units may score above 1.
    """
    X, Y, q = _locate(data, year, unit)
    if X.shape[0] < 2:
        raise ArgumentError("super-efficiency needs at least two units")
    return _solve_unit(X, Y, q, data.unit_names, int(year), super_mode=True)


def efficiency_results(
    data: DEADataset, threads: int = 1, super_mode: bool = True
) -> dict[tuple[int, str], EfficiencyResult]:
    """Score every (year, unit) cell; each year is its own cross-section."""
    fn = super_efficiency if super_mode else ccr_efficiency
    cells = [(y, u) for y in data.years for u in data.unit_names]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: fn(data, *c), cells))
    else:
        results = [fn(data, y, u) for y, u in cells]
    return dict(zip(cells, results))


def efficiency_table(data: DEADataset, threads: int = 1) -> OutcomePanel:
    """Super-efficiency panel; infeasible cells are +inf."""
    results = efficiency_results(data, threads=threads)
    values = np.array(
        [[results[(y, u)].score for u in data.unit_names] for y in data.years]
    )
    return OutcomePanel(data.unit_names, data.years, values, "super_efficiency")


def yearly_range(panel: OutcomePanel) -> dict[int, float]:
    """Max minus min across units for each year."""
    spread = panel.values.max(axis=1) - panel.values.min(axis=1)
    return {y: float(v) for y, v in zip(panel.years, spread)}


def _cell(v: float, decimals: int) -> str:
    return "INF" if math.isinf(v) else f"{v:.{decimals}f}"


def format_efficiency_table(panel: OutcomePanel, decimals: int = 2) -> str:
    """Plain-text table with a mean row and a range column."""
    ranges = yearly_range(panel)
    header = ["year", *panel.unit_names, "range"]
    body = [
        [str(y), *(_cell(v, decimals) for v in row), _cell(ranges[y], decimals)]
        for y, row in zip(panel.years, panel.values)
    ]
    means = panel.values.mean(axis=0)
    mean_range = float(np.mean(list(ranges.values())))
    body.append(["mean", *(_cell(v, decimals) for v in means), _cell(mean_range, decimals)])
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header, *body]]
    return "\n".join(lines) + "\n"
