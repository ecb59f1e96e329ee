"""Outcome panels, DEA datasets and evaluation configuration.

All containers are frozen dataclasses backed by read-only numpy arrays, so
they can be shared between worker threads without copying.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DomainError, ParseError, ValidationError

AIC_VARIANTS = ("aic", "aicc")


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_years(years: Sequence[int]) -> None:
    for prev, cur in zip(years, years[1:]):
        if cur != prev + 1:
            raise ValidationError(f"years must be consecutive, found {prev} then {cur}")


def _check_unique(names: Sequence[str], what: str = "unit") -> None:
    seen = set()
    for name in names:
        if name in seen:
            raise ValidationError(f"duplicate {what}", unit=name)
        seen.add(name)


@dataclass(frozen=True)
class OutcomePanel:
    """Year-by-unit matrix of one outcome variable.

    ``values[i, j]`` is the outcome of ``unit_names[j]`` in ``years[i]``.
    Infinite cells are allowed (infeasible super-efficiency scores); NaN is not.
    """

    unit_names: tuple[str, ...]
    years: tuple[int, ...]
    values: np.ndarray
    outcome_label: str = "outcome"

    def __post_init__(self):
        object.__setattr__(self, "unit_names", tuple(str(u) for u in self.unit_names))
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "values", _readonly(self.values))
        if not self.years or not self.unit_names:
            raise ValidationError("panel must have at least one year and one unit")
        if self.values.shape != (len(self.years), len(self.unit_names)):
            raise ValidationError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.years)} years x {len(self.unit_names)} units"
            )
        _check_years(self.years)
        _check_unique(self.unit_names)
        missing = np.argwhere(np.isnan(self.values))
        if len(missing):
            i, j = missing[0]
            raise ValidationError("missing cell", year=self.years[i], unit=self.unit_names[j])

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def unit_index(self, unit: str) -> int:
        try:
            return self.unit_names.index(unit)
        except ValueError:
            raise ArgumentError(f"unknown unit {unit!r}") from None

    def year_index(self, year: int) -> int:
        try:
            return self.years.index(int(year))
        except ValueError:
            raise ArgumentError(f"year {year} not in panel") from None

    def series(self, unit: str) -> np.ndarray:
        return self.values[:, self.unit_index(unit)]

    def value(self, year: int, unit: str) -> float:
        return float(self.values[self.year_index(year), self.unit_index(unit)])

    def rows(self, years: Sequence[int]) -> np.ndarray:
        """Row indices for ``years``; raises ArgumentError on any absent year."""
        return np.array([self.year_index(y) for y in years], dtype=int)

    def column_means(self) -> dict[str, float]:
        means = self.values.mean(axis=0)
        return {u: float(m) for u, m in zip(self.unit_names, means)}

    def with_values(self, values, outcome_label: str | None = None) -> "OutcomePanel":
        return OutcomePanel(
            self.unit_names, self.years, values, outcome_label or self.outcome_label
        )


def format_float(x: float) -> str:
    """Canonical CSV spelling of a float: shortest round-trip repr, INF for +inf."""
    if math.isinf(x):
        return "INF" if x > 0 else "-INF"
    return repr(float(x))


def _parse_float(text: str, row: int, col: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(row, col, f"non-numeric value {text!r}") from None
    if math.isnan(v):
        raise ParseError(row, col, "NaN is not accepted")
    return v


def read_outcome_panel(stream, outcome_label: str = "outcome") -> OutcomePanel:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "year", "empty file") from None
    header = [h.strip() for h in header]
    if not header or header[0].lstrip("﻿") != "year":
        raise ParseError(1, header[0] if header else "", "first header must be 'year'")
    units = header[1:]
    if not units:
        raise ParseError(1, "", "no unit columns")
    _check_unique(units)

    years, rows = [], []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise ParseError(lineno, "", f"expected {len(header)} fields, got {len(rec)}")
        try:
            year = int(rec[0])
        except ValueError:
            raise ParseError(lineno, "year", f"non-integer year {rec[0]!r}") from None
        row = []
        for unit, cell in zip(units, rec[1:]):
            cell = cell.strip()
            if not cell:
                raise ValidationError("missing cell", year=year, unit=unit)
            row.append(_parse_float(cell, lineno, unit))
        years.append(year)
        rows.append(row)
    if not years:
        raise ValidationError("panel has no data rows")
    return OutcomePanel(tuple(units), tuple(years), np.array(rows), outcome_label)


def load_outcome_panel(path, outcome_label: str = "outcome") -> OutcomePanel:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_outcome_panel(fh, outcome_label)


def panel_to_csv(panel: OutcomePanel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", *panel.unit_names])
    for year, row in zip(panel.years, panel.values):
        w.writerow([year, *(format_float(v) for v in row)])
    return buf.getvalue()


def write_panel(panel: OutcomePanel, path) -> None:
    Path(path).write_text(panel_to_csv(panel), encoding="utf-8")


@dataclass(frozen=True)
class DEADataset:
    """Per-year cross-sections of DEA inputs and outputs.

    ``inputs[t]`` has shape (n_units, m) and ``outputs[t]`` (n_units, r) for
    the t-th entry of ``years``; rows follow ``unit_names``.
    """

    unit_names: tuple[str, ...]
    years: tuple[int, ...]
    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    inputs: tuple[np.ndarray, ...]
    outputs: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "unit_names", tuple(self.unit_names))
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        object.__setattr__(self, "inputs", tuple(_readonly(x) for x in self.inputs))
        object.__setattr__(self, "outputs", tuple(_readonly(y) for y in self.outputs))
        n, m, r = len(self.unit_names), len(self.input_labels), len(self.output_labels)
        if m < 1 or r < 1:
            raise ValidationError("need at least one input and one output column")
        if n < 2:
            raise ValidationError("need at least two units per year")
        if not self.years:
            raise ValidationError("dataset has no years")
        _check_years(self.years)
        _check_unique(self.unit_names)
        if len(self.inputs) != len(self.years) or len(self.outputs) != len(self.years):
            raise ValidationError("one input and one output block per year required")
        for year, x, y in zip(self.years, self.inputs, self.outputs):
            if x.shape != (n, m) or y.shape != (n, r):
                raise ValidationError(f"block shape mismatch in year {year}")
            for block, labels in ((x, self.input_labels), (y, self.output_labels)):
                bad = np.argwhere(~(block > 0))
                if len(bad):
                    i, k = bad[0]
                    raise DomainError(year, self.unit_names[i], labels[k], float(block[i, k]))

    @property
    def n_units(self) -> int:
        return len(self.unit_names)

    @property
    def n_inputs(self) -> int:
        return len(self.input_labels)

    @property
    def n_outputs(self) -> int:
        return len(self.output_labels)

    def year_block(self, year: int) -> tuple[np.ndarray, np.ndarray]:
        try:
            t = self.years.index(int(year))
        except ValueError:
            raise ArgumentError(f"year {year} not in dataset") from None
        return self.inputs[t], self.outputs[t]

    def unit_index(self, unit: str) -> int:
        try:
            return self.unit_names.index(unit)
        except ValueError:
            raise ArgumentError(f"unknown unit {unit!r}") from None


def read_dea_dataset(stream) -> DEADataset:
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(1, "year", "empty file") from None
    if len(header) < 4 or header[0].lstrip("﻿") != "year" or header[1] != "unit":
        raise ParseError(1, header[0] if header else "", "header must start with 'year,unit'")
    in_cols, out_cols = [], []
    for k, name in enumerate(header[2:], start=2):
        if name.startswith("in:") and len(name) > 3:
            if out_cols:
                raise ParseError(1, name, "input columns must precede output columns")
            in_cols.append(k)
        elif name.startswith("out:") and len(name) > 4:
            out_cols.append(k)
        else:
            raise ParseError(1, name, "column role must be declared as 'in:<name>' or 'out:<name>'")
    if not in_cols or not out_cols:
        raise ParseError(1, "", "need at least one in: and one out: column")
    input_labels = tuple(header[k][3:] for k in in_cols)
    output_labels = tuple(header[k][4:] for k in out_cols)

    cells: dict[int, dict[str, tuple[list[float], list[float]]]] = {}
    unit_order: list[str] = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise ParseError(lineno, "", f"expected {len(header)} fields, got {len(rec)}")
        try:
            year = int(rec[0])
        except ValueError:
            raise ParseError(lineno, "year", f"non-integer year {rec[0]!r}") from None
        unit = rec[1].strip()
        if not unit:
            raise ParseError(lineno, "unit", "empty unit name")
        vals = []
        for k in range(2, len(header)):
            cell = rec[k].strip()
            if not cell:
                raise ValidationError(f"missing value in column {header[k]!r}", year=year, unit=unit)
            v = _parse_float(cell, lineno, header[k])
            if not v > 0 or math.isinf(v):
                raise DomainError(year, unit, header[k], v)
            vals.append(v)
        per_year = cells.setdefault(year, {})
        if unit in per_year:
            raise ValidationError("duplicate row", year=year, unit=unit)
        per_year[unit] = (vals[: len(in_cols)], vals[len(in_cols):])
        if unit not in unit_order:
            unit_order.append(unit)

    if not cells:
        raise ValidationError("dataset has no data rows")
    years = sorted(cells)
    inputs, outputs = [], []
    for year in years:
        per_year = cells[year]
        for unit in unit_order:
            if unit not in per_year:
                raise ValidationError("unit missing from year", year=year, unit=unit)
        inputs.append([per_year[u][0] for u in unit_order])
        outputs.append([per_year[u][1] for u in unit_order])
    return DEADataset(
        tuple(unit_order), tuple(years), input_labels, output_labels, tuple(inputs), tuple(outputs)
    )


def load_dea_dataset(path) -> DEADataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_dea_dataset(fh)


def dea_dataset_to_csv(data: DEADataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["year", "unit"]
        + [f"in:{n}" for n in data.input_labels]
        + [f"out:{n}" for n in data.output_labels]
    )
    for year, x, y in zip(data.years, data.inputs, data.outputs):
        for unit, xi, yi in zip(data.unit_names, x, y):
            w.writerow([year, unit, *(format_float(v) for v in xi), *(format_float(v) for v in yi)])
    return buf.getvalue()


@dataclass(frozen=True)
class EvaluationConfig:
    """Who is treated, when, and how the control-group search is bounded.

    ``intervention_year`` is the last pre-treatment year.
    """

    treated_unit: str
    intervention_year: int
    outcome_label: str = "outcome"
    excluded_units: tuple[str, ...] = field(default_factory=tuple)
    max_subset_size: int | None = None
    # Plain AIC decreases monotonically with subset size on short pre-periods
    # and then always picks the largest admissible model.
    aic_variant: str = "aicc"

    def __post_init__(self):
        object.__setattr__(self, "excluded_units", tuple(self.excluded_units))
        object.__setattr__(self, "intervention_year", int(self.intervention_year))
        if self.aic_variant not in AIC_VARIANTS:
            raise ValidationError(f"aic_variant must be one of {AIC_VARIANTS}, got {self.aic_variant!r}")
        if self.max_subset_size is not None and self.max_subset_size < 1:
            raise ValidationError("max_subset_size must be >= 1")
        if self.treated_unit in self.excluded_units:
            raise ValidationError("treated unit cannot be excluded", unit=self.treated_unit)

    def validate(self, panel: OutcomePanel) -> None:
        if self.treated_unit not in panel.unit_names:
            raise ValidationError("treated unit not in panel", unit=self.treated_unit)
        for u in self.excluded_units:
            if u not in panel.unit_names:
                raise ValidationError("excluded unit not in panel", unit=u)
        n_pre = sum(1 for y in panel.years if y <= self.intervention_year)
        n_post = sum(1 for y in panel.years if y > self.intervention_year)
        if n_pre < 3 or n_post < 1:
            raise ValidationError(
                f"intervention year {self.intervention_year} leaves {n_pre} pre and "
                f"{n_post} post years (need >= 3 and >= 1)"
            )

    def candidates(self, panel: OutcomePanel) -> tuple[str, ...]:
        """Control candidates in panel column order."""
        skip = {self.treated_unit, *self.excluded_units}
        return tuple(u for u in panel.unit_names if u not in skip)

    def pre_years(self, panel: OutcomePanel) -> tuple[int, ...]:
        return tuple(y for y in panel.years if y <= self.intervention_year)

    def post_years(self, panel: OutcomePanel) -> tuple[int, ...]:
        return tuple(y for y in panel.years if y > self.intervention_year)

    def with_year(self, year: int) -> "EvaluationConfig":
        return EvaluationConfig(
            self.treated_unit, year, self.outcome_label,
            self.excluded_units, self.max_subset_size, self.aic_variant,
        )


def _data_text(name: str) -> str:
    return resources.files("placeeval").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def bundled_table1() -> OutcomePanel:
    """Super-efficiency scores of 20 cities, 1995-2015, two decimals as published."""
    return read_outcome_panel(io.StringIO(_data_text("table1_efficiency.csv")), "super_efficiency")


def _table1_summary(kind: str) -> dict[str, float]:
    out = {}
    for rec in csv.DictReader(io.StringIO(_data_text("table1_printed_summary.csv"))):
        if rec["kind"] == kind:
            out[rec["key"]] = float(rec["value"])
    return out


def table1_printed_means() -> dict[str, float]:
    """Published per-city mean row (plus the key ``"range"`` for the mean range)."""
    return _table1_summary("mean")


def table1_printed_ranges() -> dict[int, float]:
    """Published per-year max-minus-min column."""
    return {int(k): v for k, v in _table1_summary("range").items()}
