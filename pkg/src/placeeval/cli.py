"""Command-line entry point: ``placeeval {dea,evaluate,placebo}``.

Exit codes: 0 success, 1 input or I/O error, 2 method error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .charts import ChartSpec, emit_svg_chart, series_from
from .dea import efficiency_table, format_efficiency_table
from .errors import InputError, MethodError, ValidationError
from .hcw import evaluate
from .panel import EvaluationConfig, bundled_table1, load_dea_dataset, load_outcome_panel, write_panel
from .report import (
    dumps,
    effects_csv,
    evaluation_to_dict,
    format_effects_table,
    format_fit_table,
    paths_csv,
    placebo_paths_csv,
    placebo_to_dict,
)
from .robustness import placebo_in_time

log = logging.getLogger("placeeval")

BUNDLED = "bundled:table1"

CONFIG_KEYS = (
    "treated_unit", "intervention_year", "outcome_label",
    "excluded_units", "max_subset_size", "aic_variant",
)


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand.
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=d(None), help="JSON file with evaluation settings")
    p.add_argument("--quiet", action="store_true", default=d(False), help="only log warnings and errors")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for the solvers")
    return p


def _evaluation_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--panel", required=True,
                   help=f"outcome panel CSV, or {BUNDLED!r} for the shipped 20-city efficiency table")
    p.add_argument("--outcome-label", default=None)
    p.add_argument("--treated", default=None, help="treated unit")
    p.add_argument("--intervention-year", type=int, default=None, help="last pre-treatment year")
    p.add_argument("--exclude", default=None, help="comma-separated units to drop from the candidates")
    p.add_argument("--max-size", type=int, default=None, help="largest control group to search")
    p.add_argument("--aic-variant", choices=("aic", "aicc"), default=None)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--decimals", type=int, default=2, help="rounding of printed tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="placeeval", description=__doc__.splitlines()[0],
                                     parents=[_global_options(True)])
    sub = parser.add_subparsers(dest="command", required=True)
    late = _global_options(False)

    dea = sub.add_parser("dea", parents=[late], help="super-efficiency scores for every unit and year")
    dea.add_argument("--input", required=True, type=Path, help="long-format DEA CSV")
    dea.add_argument("--out", required=True, type=Path, help="output panel CSV")
    dea.add_argument("--table", type=Path, default=None, help="also write the text table here")
    dea.add_argument("--decimals", type=int, default=2)

    ev = sub.add_parser("evaluate", parents=[late], help="select controls and estimate treatment effects")
    _evaluation_options(ev)

    pl = sub.add_parser("placebo", parents=[late], help="rerun with an earlier fake intervention year")
    _evaluation_options(pl)
    pl.add_argument("--offset", type=int, default=2, help="years to move the intervention back")
    return parser


def _build_config(args) -> EvaluationConfig:
    settings: dict = {}
    if args.config is not None:
        try:
            settings = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from None
        unknown = set(settings) - set(CONFIG_KEYS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    flags = {
        "treated_unit": args.treated,
        "intervention_year": args.intervention_year,
        "outcome_label": args.outcome_label,
        "excluded_units": [u.strip() for u in args.exclude.split(",") if u.strip()] if args.exclude else None,
        "max_subset_size": args.max_size,
        "aic_variant": args.aic_variant,
    }
    settings.update({k: v for k, v in flags.items() if v is not None})
    for key in ("treated_unit", "intervention_year"):
        if key not in settings:
            raise ValidationError(f"missing required setting {key!r} (flag or --config)")
    settings["excluded_units"] = tuple(settings.get("excluded_units", ()))
    return EvaluationConfig(**settings)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def cmd_dea(args) -> int:
    data = load_dea_dataset(args.input)
    log.info("loaded %d units x %d years, %d inputs, %d outputs",
             data.n_units, len(data.years), data.n_inputs, data.n_outputs)
    panel = efficiency_table(data, threads=args.threads)
    write_panel(panel, args.out)
    log.info("wrote %s", args.out)
    table = format_efficiency_table(panel, args.decimals)
    if args.table is not None:
        _write(args.table, table)
    sys.stdout.write(table)
    n_inf = int(sum(math.isinf(v) for v in panel.values.ravel()))
    if n_inf:
        log.warning("%d cell(s) infeasible under super-efficiency, reported as INF", n_inf)
    return 0


def _load_panel_and_config(args):
    config = _build_config(args)
    if args.panel == BUNDLED:
        panel = bundled_table1()
        if config.outcome_label != EvaluationConfig.outcome_label:
            panel = panel.with_values(panel.values, config.outcome_label)
    else:
        panel = load_outcome_panel(args.panel, config.outcome_label)
    config.validate(panel)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    log.info("panel %s: %d years x %d units", args.panel, *panel.shape)
    return panel, config


def _path_chart(title, years, series, marker, y_label):
    return ChartSpec(
        title=title,
        series=[(label, series_from(years, vals)) for label, vals in series],
        vertical_marker_year=marker,
        y_label=y_label,
    )


def cmd_evaluate(args) -> int:
    panel, config = _load_panel_and_config(args)
    ev = evaluate(panel, config, threads=args.threads)
    out = args.out_dir
    _write(out / "selection.json", dumps(evaluation_to_dict(ev)))
    _write(out / "effects.csv", effects_csv(ev.effects))
    _write(out / "paths.csv", paths_csv(ev))
    emit_svg_chart(
        _path_chart(
            f"Actual vs counterfactual {config.outcome_label}: {config.treated_unit}",
            ev.years,
            [("actual", ev.actual_path), ("counterfactual", ev.fitted_path)],
            config.intervention_year,
            panel.outcome_label,
        ),
        out / "counterfactual.svg",
    )
    log.info("wrote %s", out / "counterfactual.svg")
    sys.stdout.write(format_fit_table(ev.selection.chosen))
    sys.stdout.write("\n")
    sys.stdout.write(format_effects_table(ev.effects, args.decimals))
    return 0


def cmd_placebo(args) -> int:
    panel, config = _load_panel_and_config(args)
    if args.offset < 0:
        raise MethodError("offset must be nonnegative")
    report = placebo_in_time(panel, config, config.intervention_year - args.offset, threads=args.threads)
    out = args.out_dir
    _write(out / "placebo.json", dumps(placebo_to_dict(report)))
    _write(out / "placebo_effects.csv", effects_csv(report.effects))
    _write(out / "placebo_paths.csv", placebo_paths_csv(report))
    o, p = report.original, report.placebo
    emit_svg_chart(
        _path_chart(
            f"Placebo at {report.placebo_year}: {config.treated_unit}",
            o.years,
            [("actual", o.actual_path),
             (f"counterfactual ({report.original_year})", o.fitted_path),
             (f"counterfactual ({report.placebo_year})", p.fitted_path)],
            report.placebo_year,
            panel.outcome_label,
        ),
        out / "placebo.svg",
    )
    log.info("wrote %s", out / "placebo.svg")
    sys.stdout.write(format_fit_table(report.selection.chosen))
    sys.stdout.write("\n")
    sys.stdout.write(format_effects_table(report.effects, args.decimals))
    c = report.gap_comparison
    sys.stdout.write(
        f"\neffect gaps vs original over {report.overlap_comparison[0][0]}-{report.overlap_comparison[-1][0]}: "
        f"rmse={c.rmse:.4f} max_abs_gap={c.max_abs_gap:.4f} sign_agreement={c.sign_agreement:.2f}\n"
    )
    return 0


COMMANDS = {"dea": cmd_dea, "evaluate": cmd_evaluate, "placebo": cmd_placebo}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        log.error("%s", exc)
        return 1
    except MethodError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
