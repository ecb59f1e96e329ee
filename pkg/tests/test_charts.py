import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from placeeval.charts import ChartSpec, emit_svg_chart, render_svg, series_from
from placeeval.errors import ArgumentError

SVG = "{http://www.w3.org/2000/svg}"
GOLDEN = Path(__file__).parent / "golden" / "chart.svg"


def golden_spec():
    years = list(range(1995, 2016))
    actual = [0.3 + 0.02 * i + (0.05 if i > 15 else 0.0) for i in range(21)]
    cf = [0.31 + 0.019 * i for i in range(21)]
    return ChartSpec(
        title="Actual vs counterfactual <efficiency> & co",
        series=[("actual", series_from(years, actual)), ("counterfactual", series_from(years, cf))],
        vertical_marker_year=2010,
        y_label="super_efficiency",
    )


def polylines(svg):
    return ET.fromstring(svg.encode()).iter(f"{SVG}polyline")


def test_constant_series_is_horizontal():
    svg = render_svg(ChartSpec("flat", [("c", {2000: 1.5, 2001: 1.5, 2002: 1.5})]))
    (line,) = list(polylines(svg))
    ys = {pt.split(",")[1] for pt in line.get("points").split()}
    assert len(ys) == 1


def test_two_series_and_marker():
    spec = golden_spec()
    root = ET.fromstring(render_svg(spec).encode())
    assert len(list(root.iter(f"{SVG}polyline"))) == 2
    dashed = [e for e in root.iter(f"{SVG}line") if e.get("class") == "marker"]
    assert len(dashed) == 1 and dashed[0].get("stroke-dasharray")
    assert root.get("width") == "800" and root.get("height") == "500"


def test_data_attributes_round_trip():
    spec = golden_spec()
    for line, (label, data) in zip(polylines(render_svg(spec)), spec.series):
        assert line.get("data-label") == label
        years = [int(y) for y in line.get("data-years").split()]
        values = [float(v) for v in line.get("data-values").split()]
        assert values == [data[y] for y in years]


def test_series_truncated_to_common_years():
    spec = ChartSpec("t", [("a", {1: 1.0, 2: 2.0, 3: 3.0}), ("b", {2: 1.0, 3: 0.0, 4: 5.0})])
    assert spec.years == (2, 3)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(series=[]),
        dict(series=[("a", {1: 1.0}), ("b", {2: 1.0})]),
        dict(series=[("a", {1: float("inf"), 2: 1.0})]),
        dict(series=[("a", {1: 1.0, 2: 1.0})], vertical_marker_year=5),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ArgumentError):
        ChartSpec("bad", **kwargs)


def test_golden_file(tmp_path):
    out = tmp_path / "chart.svg"
    emit_svg_chart(golden_spec(), out)
    assert out.read_bytes() == GOLDEN.read_bytes()
    emit_svg_chart(golden_spec(), out)
    assert out.read_bytes() == GOLDEN.read_bytes()
