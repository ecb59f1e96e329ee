"""Panel-data counterfactuals for a single treated unit.

The treated unit's pre-intervention outcome is regressed (OLS with intercept)
on the outcomes of untreated units. For every subset size j the subset with
the highest R^2 is kept, and among those per-size winners the one with the
lowest AIC becomes the control group. Its fitted equation, applied to the
controls' post-intervention outcomes, is the counterfactual; the treatment
effect is actual minus counterfactual.

The common-factor structure that justifies this (outcomes driven by a few
unobserved shared factors plus unit effects) is never estimated; the
regression on observed controls stands in for it.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, RankError, SelectionError
from .panel import EvaluationConfig, OutcomePanel
from .stats import t_two_sided_p

log = logging.getLogger(__name__)

# A column whose QR diagonal is this small relative to its norm is treated as
# a linear combination of the preceding columns.
RANK_TOL = 1e-10
# rss below this fraction of sum(y**2) is indistinguishable from round-off.
EXACT_FIT_TOL = 1e-24
TIE_TOL = 1e-12
CHUNK = 8192


@dataclass(frozen=True)
class OLSFit:
    control_units: tuple[str, ...]
    intercept: float
    coefficients: np.ndarray
    rss: float
    r_squared: float
    aic: float
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    n_obs: int
    df_resid: int
    intercept_se: float = math.nan
    intercept_t: float = math.nan
    intercept_p: float = math.nan
    aic_variant: str = "aic"

    @property
    def size(self) -> int:
        return len(self.control_units)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.size)
        return self.intercept + X @ self.coefficients


def aic_score(rss: float, n_obs: int, n_params: int, variant: str = "aic") -> float:
    """Gaussian-likelihood AIC, ``n*ln(rss/n) + 2k`` (k counts the intercept).

    ``variant="aicc"`` adds the small-sample term ``2k(k+1)/(n-k-1)``.
    A perfect fit (rss == 0) scores -inf.
    """
    if n_obs <= n_params:
        raise ArgumentError(f"n_obs={n_obs} must exceed n_params={n_params}")
    if rss < 0:
        raise ArgumentError("rss must be nonnegative")
    if variant not in ("aic", "aicc"):
        raise ArgumentError(f"unknown AIC variant {variant!r}")
    if rss == 0:
        return -math.inf
    aic = n_obs * math.log(rss / n_obs) + 2 * n_params
    if variant == "aicc":
        if n_obs - n_params - 1 <= 0:
            raise ArgumentError("AICc needs n_obs > n_params + 1")
        aic += 2 * n_params * (n_params + 1) / (n_obs - n_params - 1)
    return aic


def _t_stat(coef: float, se: float) -> float:
    if se > 0:
        return coef / se
    if coef == 0:
        return math.nan
    return math.copysign(math.inf, coef)


def ols_fit(
    y: Sequence[float],
    X: np.ndarray,
    labels: Sequence[str],
    aic_variant: str = "aic",
) -> OLSFit:
    """Least squares of ``y`` on an intercept plus the columns of ``X`` via QR."""
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if len(y) != n:
        raise ArgumentError(f"y has {len(y)} rows but X has {n}")
    if len(labels) != p:
        raise ArgumentError("one label per column of X required")
    if p + 1 > n - 1:
        raise ArgumentError(f"{p} regressors plus intercept leave no residual degrees of freedom with {n} observations")

    D = np.column_stack([np.ones(n), X])
    Q, R = np.linalg.qr(D)
    diag = np.abs(np.diag(R))
    norms = np.linalg.norm(D, axis=0)
    if np.any(diag <= RANK_TOL * norms):
        raise RankError(f"design for {tuple(labels)} is rank deficient")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - D @ beta
    rss = float(resid @ resid)
    if rss <= EXACT_FIT_TOL * float(y @ y):
        rss = 0.0
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)

    df = n - p - 1
    R_inv = np.linalg.solve(R, np.eye(p + 1))
    cov_unscaled = R_inv @ R_inv.T
    se = np.sqrt(np.clip(np.diag(cov_unscaled), 0.0, None) * (rss / df))
    t = np.array([_t_stat(b, s) for b, s in zip(beta, se)])
    pv = np.array([t_two_sided_p(v, df) for v in t])
    return OLSFit(
        control_units=tuple(labels),
        intercept=float(beta[0]),
        coefficients=beta[1:].copy(),
        rss=rss,
        r_squared=r2,
        aic=aic_score(rss, n, p + 1, aic_variant),
        std_errors=se[1:].copy(),
        t_values=t[1:].copy(),
        p_values=pv[1:].copy(),
        n_obs=n,
        df_resid=df,
        intercept_se=float(se[0]),
        intercept_t=float(t[0]),
        intercept_p=float(pv[0]),
        aic_variant=aic_variant,
    )


@dataclass(frozen=True)
class ControlSelection:
    per_size_winners: dict[int, OLSFit]
    chosen: OLSFit
    search_space_size: int
    rank_deficient_skipped: int = 0
    candidates: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class TreatmentEffectSeries:
    years: tuple[int, ...]
    actual: np.ndarray
    counterfactual: np.ndarray
    effect: np.ndarray
    mean_effect: float


def _subset_r2(y: np.ndarray, C: np.ndarray, combos: np.ndarray) -> np.ndarray:
    """R^2 of ``y`` on intercept + ``C[:, combo]`` for each row of ``combos``.

    Rank-deficient designs get NaN. QR of the augmented matrix [1, X_S, y]
    gives the residual norm of y as the last diagonal entry of R.
    """
    B, j = combos.shape
    n = len(y)
    D = np.empty((B, n, j + 2))
    D[:, :, 0] = 1.0
    D[:, :, 1:j + 1] = np.moveaxis(C[:, combos], 1, 0)
    D[:, :, -1] = y
    R = np.linalg.qr(D, mode="r")
    diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
    norms = np.linalg.norm(D, axis=1)
    full_rank = np.all(diag[:, : j + 1] > RANK_TOL * norms[:, : j + 1], axis=1)
    rss = diag[:, j + 1] ** 2
    rss = np.where(rss <= EXACT_FIT_TOL * float(y @ y), 0.0, rss)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else np.ones(B)
    return np.where(full_rank, r2, np.nan)


def _chunks(n_candidates: int, j: int, size: int):
    it = itertools.combinations(range(n_candidates), j)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def _best_index(r2: np.ndarray) -> int | None:
    """First position within TIE_TOL of the highest R^2; None if all NaN."""
    valid = ~np.isnan(r2)
    if not valid.any():
        return None
    ok = valid & (r2 >= np.nanmax(r2) - TIE_TOL)
    return int(np.flatnonzero(ok)[0])


def search_size(y, C, j, threads=1):
    """Scan every j-subset of the columns of ``C``.

    Returns (best column-index tuple or None, subsets evaluated, subsets
    skipped as rank deficient).
    """
    blocks = list(_chunks(C.shape[1], j, CHUNK))
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _subset_r2(y, C, b), blocks))
    else:
        parts = [_subset_r2(y, C, b) for b in blocks]
    r2 = np.concatenate(parts)
    combos = np.concatenate(blocks)
    k = _best_index(r2)
    skipped = int(np.isnan(r2).sum())
    return (None if k is None else tuple(int(i) for i in combos[k])), len(r2), skipped


def _pre_arrays(panel: OutcomePanel, config: EvaluationConfig):
    config.validate(panel)
    candidates = config.candidates(panel)
    if not candidates:
        raise SelectionError("no candidate control units")
    rows = panel.rows(config.pre_years(panel))
    y = panel.series(config.treated_unit)[rows]
    C = panel.values[np.ix_(rows, [panel.unit_index(u) for u in candidates])]
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(C))):
        raise SelectionError("pre-period contains non-finite values")
    return y, C, candidates


def max_feasible_size(n_candidates: int, n_obs: int, max_subset_size: int | None = None) -> int:
    """Largest subset size searched: keeps at least two residual degrees of freedom."""
    cap = min(n_candidates, n_obs - 3)
    if max_subset_size is not None:
        cap = min(cap, max_subset_size)
    return cap


def _fit_subset(y, C, combo, candidates, aic_variant) -> OLSFit:
    return ols_fit(y, C[:, list(combo)], [candidates[i] for i in combo], aic_variant)


def best_subset_of_size(
    panel: OutcomePanel, config: EvaluationConfig, j: int, threads: int = 1
) -> OLSFit:
    """Highest-R^2 control group of exactly ``j`` candidates over the pre-period."""
    y, C, candidates = _pre_arrays(panel, config)
    cap = max_feasible_size(len(candidates), len(y), config.max_subset_size)
    if not 1 <= j <= cap:
        raise ArgumentError(f"subset size {j} outside the feasible range 1..{cap}")
    combo, _, _ = search_size(y, C, j, threads)
    if combo is None:
        raise SelectionError(f"every subset of size {j} is rank deficient")
    return _fit_subset(y, C, combo, candidates, config.aic_variant)


def select_control_group(
    panel: OutcomePanel, config: EvaluationConfig, threads: int = 1
) -> ControlSelection:
    """Exhaustive best-subset search by R^2 within size, then AIC across sizes.

    Ties (within 1e-12) go to the smaller subset, then to the subset that
    comes first in candidate order.
    """
    y, C, candidates = _pre_arrays(panel, config)
    if len(y) < 4:
        raise ArgumentError(f"need at least 4 pre-period years, have {len(y)}")
    j_max = max_feasible_size(len(candidates), len(y), config.max_subset_size)
    if j_max < 1:
        raise SelectionError("no feasible subset size")

    winners: dict[int, OLSFit] = {}
    searched = skipped = 0
    for j in range(1, j_max + 1):
        combo, n_eval, n_skip = search_size(y, C, j, threads)
        searched += n_eval
        skipped += n_skip
        if combo is None:
            continue
        try:
            winners[j] = _fit_subset(y, C, combo, candidates, config.aic_variant)
        except RankError:
            skipped += 1
            continue
        log.debug("size %d: best R2 %.6f with %s", j, winners[j].r_squared, winners[j].control_units)
    if not winners:
        raise SelectionError("no full-rank control subset found")

    chosen = None
    for j in sorted(winners):
        fit = winners[j]
        if chosen is None or fit.aic < chosen.aic - TIE_TOL:
            chosen = fit
    log.info(
        "selected %s (R2=%.4f, AIC=%.3f) from %d subsets",
        chosen.control_units, chosen.r_squared, chosen.aic, searched,
    )
    return ControlSelection(winners, chosen, searched, skipped, candidates)


def predict_counterfactual(fit: OLSFit, panel: OutcomePanel, years: Sequence[int]) -> np.ndarray:
    """intercept + sum(coef_i * control_i(t)) for each requested year."""
    rows = panel.rows(years)
    cols = [panel.unit_index(u) for u in fit.control_units]
    X = panel.values[np.ix_(rows, cols)]
    return fit.intercept + X @ fit.coefficients


def treatment_effects(actual, counterfactual, years) -> TreatmentEffectSeries:
    actual = np.asarray(actual, dtype=float).ravel()
    counterfactual = np.asarray(counterfactual, dtype=float).ravel()
    years = tuple(int(y) for y in years)
    if not (len(actual) == len(counterfactual) == len(years)) or len(actual) == 0:
        raise ArgumentError(
            f"length mismatch: {len(actual)} actual, {len(counterfactual)} "
            f"counterfactual, {len(years)} years"
        )
    effect = actual - counterfactual
    return TreatmentEffectSeries(years, actual, counterfactual, effect, float(np.mean(effect)))


@dataclass(frozen=True)
class Evaluation:
    config: EvaluationConfig
    selection: ControlSelection
    years: tuple[int, ...]
    actual_path: np.ndarray
    fitted_path: np.ndarray
    effects: TreatmentEffectSeries


def evaluate(panel: OutcomePanel, config: EvaluationConfig, threads: int = 1) -> Evaluation:
    """Select controls, predict the post-period counterfactual, compute effects."""
    selection = select_control_group(panel, config, threads=threads)
    post = config.post_years(panel)
    actual_post = panel.series(config.treated_unit)[panel.rows(post)]
    cf_post = predict_counterfactual(selection.chosen, panel, post)
    effects = treatment_effects(actual_post, cf_post, post)
    fitted = predict_counterfactual(selection.chosen, panel, panel.years)
    return Evaluation(
        config, selection, panel.years, panel.series(config.treated_unit).copy(), fitted, effects
    )
