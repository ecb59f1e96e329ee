"""Placebo-in-time checks: pretend the intervention happened earlier and
see whether the counterfactual story changes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .hcw import ControlSelection, Evaluation, TreatmentEffectSeries, evaluate
from .panel import EvaluationConfig, OutcomePanel


@dataclass(frozen=True)
class PathComparison:
    rmse: float
    max_abs_gap: float
    sign_agreement: float


def compare_paths(a, b, years=None) -> PathComparison:
    """RMSE, largest absolute gap and share of years where ``a`` and ``b`` share a sign."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) != len(b) or (years is not None and len(years) != len(a)):
        raise ArgumentError("paths and years must have equal lengths")
    if len(a) == 0:
        raise ArgumentError("cannot compare empty paths")
    gap = a - b
    return PathComparison(
        rmse=float(np.sqrt(np.mean(gap ** 2))),
        max_abs_gap=float(np.max(np.abs(gap))),
        sign_agreement=float(np.mean(np.sign(a) == np.sign(b))),
    )


@dataclass(frozen=True)
class PlaceboReport:
    placebo_year: int
    original_year: int
    selection: ControlSelection
    pre_fit_rmse: float
    effects: TreatmentEffectSeries
    # (year, original counterfactual, placebo counterfactual) on shared post years
    overlap_comparison: tuple[tuple[int, float, float], ...]
    path_comparison: PathComparison
    gap_comparison: PathComparison
    original: Evaluation
    placebo: Evaluation


def placebo_in_time(
    panel: OutcomePanel,
    config: EvaluationConfig,
    placebo_year: int,
    threads: int = 1,
    original: Evaluation | None = None,
) -> PlaceboReport:
    """Rerun the whole selection/prediction pipeline with ``placebo_year`` as the
    last pre-treatment year and line it up against the original run."""
    placebo_year = int(placebo_year)
    if placebo_year > config.intervention_year:
        raise ArgumentError("placebo year must not be later than the intervention year")
    n_pre = sum(1 for y in panel.years if y <= placebo_year)
    if n_pre < 4:
        raise ArgumentError(f"placebo year {placebo_year} leaves {n_pre} pre years, need >= 4")

    if original is None:
        original = evaluate(panel, config, threads=threads)
    placebo = evaluate(panel, config.with_year(placebo_year), threads=threads)

    pre = placebo.years.index(placebo_year) + 1
    resid = placebo.actual_path[:pre] - placebo.fitted_path[:pre]
    pre_fit_rmse = float(np.sqrt(np.mean(resid ** 2)))

    shared = original.effects.years
    k = len(placebo.effects.years) - len(shared)
    orig_cf = original.effects.counterfactual
    plac_cf = placebo.effects.counterfactual[k:]
    overlap = tuple(
        (y, float(o), float(p)) for y, o, p in zip(shared, orig_cf, plac_cf)
    )
    return PlaceboReport(
        placebo_year=placebo_year,
        original_year=config.intervention_year,
        selection=placebo.selection,
        pre_fit_rmse=pre_fit_rmse,
        effects=placebo.effects,
        overlap_comparison=overlap,
        path_comparison=compare_paths(orig_cf, plac_cf, shared),
        gap_comparison=compare_paths(original.effects.effect, placebo.effects.effect[k:], shared),
        original=original,
        placebo=placebo,
    )
