"""Serialisation of results to CSV, JSON and fixed-width text tables."""

from __future__ import annotations

import csv
import io
import json
import math

from .hcw import ControlSelection, Evaluation, OLSFit, TreatmentEffectSeries
from .panel import format_float
from .robustness import PathComparison, PlaceboReport


def _num(x: float):
    """JSON-safe number: non-finite values become strings or null."""
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "INF" if x > 0 else "-INF"
    return x


def fit_to_dict(fit: OLSFit) -> dict:
    return {
        "controls": list(fit.control_units),
        "intercept": {
            "coefficient": _num(fit.intercept),
            "std_error": _num(fit.intercept_se),
            "t_value": _num(fit.intercept_t),
            "p_value": _num(fit.intercept_p),
        },
        "coefficients": [
            {
                "unit": u,
                "coefficient": _num(b),
                "std_error": _num(s),
                "t_value": _num(t),
                "p_value": _num(p),
            }
            for u, b, s, t, p in zip(
                fit.control_units, fit.coefficients, fit.std_errors, fit.t_values, fit.p_values
            )
        ],
        "r_squared": _num(fit.r_squared),
        "aic": _num(fit.aic),
        "aic_variant": fit.aic_variant,
        "rss": _num(fit.rss),
        "n_obs": fit.n_obs,
        "df_resid": fit.df_resid,
    }


def selection_to_dict(selection: ControlSelection) -> dict:
    return {
        "candidates": list(selection.candidates),
        "search_space_size": selection.search_space_size,
        "rank_deficient_skipped": selection.rank_deficient_skipped,
        "chosen": fit_to_dict(selection.chosen),
        "per_size_winners": [
            {
                "size": j,
                "controls": list(f.control_units),
                "r_squared": _num(f.r_squared),
                "aic": _num(f.aic),
            }
            for j, f in sorted(selection.per_size_winners.items())
        ],
    }


def effects_to_dict(effects: TreatmentEffectSeries) -> dict:
    return {
        "rows": [
            {"year": y, "actual": _num(a), "counterfactual": _num(c), "effect": _num(e)}
            for y, a, c, e in zip(effects.years, effects.actual, effects.counterfactual, effects.effect)
        ],
        "mean_effect": _num(effects.mean_effect),
    }


def evaluation_to_dict(ev: Evaluation) -> dict:
    cfg = ev.config
    return {
        "treated_unit": cfg.treated_unit,
        "intervention_year": cfg.intervention_year,
        "outcome_label": cfg.outcome_label,
        "excluded_units": list(cfg.excluded_units),
        "max_subset_size": cfg.max_subset_size,
        "aic_variant": cfg.aic_variant,
        "selection": selection_to_dict(ev.selection),
        "effects": effects_to_dict(ev.effects),
    }


def _comparison(c: PathComparison) -> dict:
    return {"rmse": _num(c.rmse), "max_abs_gap": _num(c.max_abs_gap), "sign_agreement": _num(c.sign_agreement)}


def placebo_to_dict(report: PlaceboReport) -> dict:
    return {
        "placebo_year": report.placebo_year,
        "original_year": report.original_year,
        "pre_fit_rmse": _num(report.pre_fit_rmse),
        "selection": selection_to_dict(report.selection),
        "effects": effects_to_dict(report.effects),
        "overlap_comparison": [
            {"year": y, "original_counterfactual": _num(o), "placebo_counterfactual": _num(p)}
            for y, o, p in report.overlap_comparison
        ],
        "counterfactual_path_comparison": _comparison(report.path_comparison),
        "effect_gap_comparison": _comparison(report.gap_comparison),
        "original": evaluation_to_dict(report.original),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([row[0], *(format_float(v) for v in row[1:])])
    return buf.getvalue()


def effects_csv(effects: TreatmentEffectSeries) -> str:
    return _csv(
        ["year", "actual", "counterfactual", "effect"],
        zip(effects.years, effects.actual, effects.counterfactual, effects.effect),
    )


def paths_csv(ev: Evaluation) -> str:
    return _csv(["year", "actual", "counterfactual"], zip(ev.years, ev.actual_path, ev.fitted_path))


def placebo_paths_csv(report: PlaceboReport) -> str:
    o, p = report.original, report.placebo
    return _csv(
        ["year", "actual", "original_cf", "placebo_cf"],
        zip(o.years, o.actual_path, o.fitted_path, p.fitted_path),
    )


def format_effects_table(effects: TreatmentEffectSeries, decimals: int = 2) -> str:
    """Year / actual / counterfactual / effect with a trailing mean row."""
    f = f"{{:.{decimals}f}}"
    header = ["Year", "Actual", "Counterfactual", "Treatment effect"]
    rows = [
        [str(y), f.format(a), f.format(c), f.format(e)]
        for y, a, c, e in zip(effects.years, effects.actual, effects.counterfactual, effects.effect)
    ]
    rows.append([
        "mean",
        f.format(effects.actual.mean()),
        f.format(effects.counterfactual.mean()),
        f.format(effects.mean_effect),
    ])
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(4)]
    return "\n".join(
        "  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header, *rows]
    ) + "\n"


def format_fit_table(fit: OLSFit, decimals: int = 4) -> str:
    """Coefficient / std. error / t / p per control, intercept first."""
    f = f"{{:.{decimals}f}}"
    header = ["Control", "Coefficient", "Std. Error", "t-value", "p"]
    rows = [["(intercept)", f.format(fit.intercept), f.format(fit.intercept_se),
             f.format(fit.intercept_t), f.format(fit.intercept_p)]]
    for u, b, s, t, p in zip(fit.control_units, fit.coefficients, fit.std_errors, fit.t_values, fit.p_values):
        rows.append([u, f.format(b), f.format(s), f.format(t), f.format(p)])
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(5)]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in [header, *rows]]
    lines.append(f"R2 = {fit.r_squared:.4f}  AIC = {fit.aic:.3f} ({fit.aic_variant})  n = {fit.n_obs}")
    return "\n".join(lines) + "\n"
