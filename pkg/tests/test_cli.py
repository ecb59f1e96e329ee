import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from placeeval import cli
from placeeval.panel import load_outcome_panel, panel_to_csv

from conftest import dea_csv_text, factor_panel

SVG = "{http://www.w3.org/2000/svg}"


def run(*argv):
    return cli.main(["--quiet", *map(str, argv)])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def synth(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text(panel_to_csv(factor_panel(7, 14, 11, noise=0.1)))
    return path


@pytest.fixture
def exact(tmp_path):
    p = factor_panel(6, 14, 5)
    vals = p.values.copy()
    vals[:, 0] = vals[:, p.unit_index("c2")]
    path = tmp_path / "exact.csv"
    path.write_text(panel_to_csv(p.with_values(vals)))
    return path


# --- dea ------------------------------------------------------------------

def test_dea_two_units(tmp_path, capsys):
    src = tmp_path / "dea.csv"
    src.write_text("year,unit,in:x,out:y\n2000,A,1,1\n2000,B,2,1\n")
    rc = run("dea", "--input", src, "--out", tmp_path / "eff.csv", "--table", tmp_path / "eff.txt")
    assert rc == 0
    panel = load_outcome_panel(tmp_path / "eff.csv")
    assert np.allclose(panel.values, [[2.0, 0.5]], atol=1e-9)
    out = capsys.readouterr().out
    assert "2.00" in out and "0.50" in out
    assert (tmp_path / "eff.txt").read_text() == out


def test_dea_zero_input(tmp_path, capsys):
    src = tmp_path / "dea.csv"
    src.write_text("year,unit,in:labour,out:y\n2000,A,1,1\n2000,B,0,1\n")
    assert run("dea", "--input", src, "--out", tmp_path / "eff.csv") == 1
    err = capsys.readouterr().err
    assert "2000" in err and "B" in err and "labour" in err


def test_dea_missing_file(tmp_path):
    assert run("dea", "--input", tmp_path / "nope.csv", "--out", tmp_path / "o.csv") == 1


def test_dea_twenty_by_twentyone(tmp_path):
    src = tmp_path / "dea.csv"
    src.write_text(dea_csv_text(20, 21, 3, 2, seed=9))
    assert run("--threads", 4, "dea", "--input", src, "--out", tmp_path / "eff.csv") == 0
    panel = load_outcome_panel(tmp_path / "eff.csv")
    assert panel.shape == (21, 20)
    assert np.all(panel.values > 0)


def test_dea_inf_cells_warn(tmp_path, monkeypatch, capsys):
    from placeeval.panel import OutcomePanel

    def fake_table(data, threads=1):
        return OutcomePanel(("A", "B"), (2000,), np.array([[np.inf, 0.5]]), "super_efficiency")

    monkeypatch.setattr(cli, "efficiency_table", fake_table)
    src = tmp_path / "dea.csv"
    src.write_text("year,unit,in:x,out:y\n2000,A,1,1\n2000,B,2,1\n")
    rc = cli.main(["dea", "--input", str(src), "--out", str(tmp_path / "eff.csv")])
    assert rc == 0
    captured = capsys.readouterr()
    assert "INF" in captured.out and "WARNING" in captured.err
    assert "INF" in (tmp_path / "eff.csv").read_text()


# --- evaluate -------------------------------------------------------------

def test_evaluate_bundled(tmp_path, capsys):
    out = tmp_path / "out"
    rc = run("evaluate", "--panel", "bundled:table1", "--treated", "Zhoushan",
             "--intervention-year", 2010, "--out-dir", out)
    assert rc == 0
    rows = read_rows(out / "effects.csv")
    assert [int(r["year"]) for r in rows] == [2011, 2012, 2013, 2014, 2015]
    sel = json.loads((out / "selection.json").read_text())
    assert sel["selection"]["search_space_size"] == 507623
    assert sel["selection"]["chosen"]["r_squared"] >= 0.99
    printed = capsys.readouterr().out
    assert "Treatment effect" in printed and "mean" in printed


def test_evaluate_unknown_treated(synth, tmp_path):
    assert run("evaluate", "--panel", synth, "--treated", "Nanjing",
               "--intervention-year", 1998, "--out-dir", tmp_path / "o") == 1


def test_evaluate_no_candidates_is_method_error(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text(panel_to_csv(factor_panel(3, 10, 0)))
    rc = run("evaluate", "--panel", path, "--treated", "T", "--intervention-year", 1995,
             "--exclude", "c1,c2", "--out-dir", tmp_path / "o")
    assert rc == 2


def test_evaluate_exact_match_zero_effects(exact, tmp_path):
    out = tmp_path / "o"
    assert run("evaluate", "--panel", exact, "--treated", "T",
               "--intervention-year", 1999, "--out-dir", out) == 0
    effects = [float(r["effect"]) for r in read_rows(out / "effects.csv")]
    assert len(effects) == 4
    assert np.allclose(effects, 0.0, atol=1e-12)


def test_chart_values_equal_csv(synth, tmp_path):
    out = tmp_path / "o"
    assert run("evaluate", "--panel", synth, "--treated", "T",
               "--intervention-year", 1998, "--out-dir", out) == 0
    rows = read_rows(out / "paths.csv")
    root = ET.parse(out / "counterfactual.svg").getroot()
    lines = {e.get("data-label"): e for e in root.iter(f"{SVG}polyline")}
    for col in ("actual", "counterfactual"):
        line = lines[col]
        assert line.get("data-years").split() == [r["year"] for r in rows]
        assert line.get("data-values").split() == [r[col] for r in rows]
    markers = [e for e in root.iter(f"{SVG}line") if e.get("class") == "marker"]
    assert len(markers) == 1
    effects = read_rows(out / "effects.csv")
    assert [r["counterfactual"] for r in effects] == [r["counterfactual"] for r in rows[-len(effects):]]


def test_identical_runs_identical_bytes(synth, tmp_path):
    for name in ("a", "b"):
        assert run("evaluate", "--panel", synth, "--treated", "T",
                   "--intervention-year", 1998, "--out-dir", tmp_path / name) == 0
    for f in ("selection.json", "effects.csv", "paths.csv", "counterfactual.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_flags_override_config(synth, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"treated_unit": "T", "intervention_year": 1997,
                               "max_subset_size": 1, "aic_variant": "aic"}))
    out = tmp_path / "o"
    assert run("--config", cfg, "evaluate", "--panel", synth, "--intervention-year", 1999,
               "--out-dir", out) == 0
    sel = json.loads((out / "selection.json").read_text())
    assert sel["intervention_year"] == 1999
    assert sel["max_subset_size"] == 1 and sel["aic_variant"] == "aic"
    assert len(sel["selection"]["chosen"]["controls"]) == 1


def test_global_flags_after_subcommand(synth, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"treated_unit": "T", "intervention_year": 1998}))
    assert run("evaluate", "--config", cfg, "--threads", 2, "--panel", synth,
               "--out-dir", tmp_path / "o") == 0


def test_unknown_config_key(synth, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"treated_unit": "T", "intervention_year": 1998, "colour": "red"}))
    assert run("--config", cfg, "evaluate", "--panel", synth, "--out-dir", tmp_path / "o") == 1


# --- placebo --------------------------------------------------------------

def test_placebo_bundled_offset_two(tmp_path, capsys):
    out = tmp_path / "o"
    rc = run("placebo", "--panel", "bundled:table1", "--treated", "Zhoushan",
             "--intervention-year", 2010, "--out-dir", out)
    assert rc == 0
    rep = json.loads((out / "placebo.json").read_text())
    assert rep["placebo_year"] == 2008
    assert [int(r["year"]) for r in read_rows(out / "placebo_effects.csv")] == list(range(2009, 2016))
    assert list(read_rows(out / "placebo_paths.csv")[0]) == ["year", "actual", "original_cf", "placebo_cf"]
    root = ET.parse(out / "placebo.svg").getroot()
    assert len(list(root.iter(f"{SVG}polyline"))) == 3
    assert "sign_agreement" in capsys.readouterr().out


def test_placebo_too_short_pre_period(synth, tmp_path):
    # 1990..1995 pre period; offset 3 leaves 1990..1992
    rc = run("placebo", "--panel", synth, "--treated", "T", "--intervention-year", 1995,
             "--offset", 3, "--out-dir", tmp_path / "o")
    assert rc == 2


def test_placebo_offset_zero_matches_evaluate(synth, tmp_path):
    common = ["--panel", synth, "--treated", "T", "--intervention-year", 1998]
    assert run("evaluate", *common, "--out-dir", tmp_path / "e") == 0
    assert run("placebo", *common, "--offset", 0, "--out-dir", tmp_path / "p") == 0
    assert (tmp_path / "p" / "placebo_effects.csv").read_bytes() == (tmp_path / "e" / "effects.csv").read_bytes()


def test_module_entry_point(synth, tmp_path):
    import subprocess
    import sys

    res = subprocess.run(
        [sys.executable, "-m", "placeeval", "evaluate", "--panel", str(synth), "--treated", "T",
         "--intervention-year", "1998", "--out-dir", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert "wrote" in res.stderr
