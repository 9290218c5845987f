from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from forecast_stability import build_report_bundle, emit_plots, emit_quantile_table
from forecast_stability.cli import cli_main
from forecast_stability.metrics import (
    AccuracyReport,
    CvGrid,
    EmptyInput,
    histogram,
)
from forecast_stability.report import load_metrics_files

SVG_NS = "{http://www.w3.org/2000/svg}"


def grid_from_cv(cv):
    cv = np.asarray(cv, dtype=float)
    mean = np.where(cv > 0, 1.0, 1.0)  # nonzero means keep the type invariant loose
    return CvGrid(cv=cv, mean=mean, std=cv * mean)


def write_experiment_config(tmp_path, run_count=2, models=None):
    if models is None:
        models = [
            {"label": "sn", "kind": {"kind": "seasonal_naive", "params": {"period": 7}}}
        ]
    cfg = {
        "dataset": {
            "synth": {
                "n_series": 3,
                "length": 40,
                "level_range": [20, 60],
                "season_period": 7,
                "season_amplitude": 5,
                "noise_std": 3,
                "seed": 17,
            }
        },
        "split": {"train_length": 33, "horizon": 7},
        "models": models,
        "run_count": run_count,
        "master_seed": 5,
    }
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(cfg))
    return path


# -------------------------------------------------------------- exit codes

def test_unknown_subcommand_is_usage_error(capsys):
    assert cli_main(["frobnicate"]) == 1
    assert cli_main([]) == 1


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert cli_main(["run", "--help"]) == 0


def test_metrics_on_missing_runs_is_data_error(tmp_path, capsys):
    assert cli_main(["metrics", "--runs", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_with_missing_config_is_data_error(tmp_path, capsys):
    assert cli_main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_generate_with_bad_json_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli_main(["generate", "--config", str(bad), "--out", str(tmp_path / "d.csv")]) == 2


# ---------------------------------------------------------------- pipeline

def test_run_deterministic_model_produces_identical_blocks(tmp_path, capsys):
    cfg_path = write_experiment_config(tmp_path, run_count=2)
    out = tmp_path / "runs"
    assert cli_main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    rows = (out / "runs.csv").read_text().strip().splitlines()[1:]
    run0 = [r.split(",", 2)[2] for r in rows if r.split(",")[1] == "0"]
    run1 = [r.split(",", 2)[2] for r in rows if r.split(",")[1] == "1"]
    assert run0 == run1


def test_generate_then_run_from_csv(tmp_path, capsys):
    synth = tmp_path / "synth.json"
    synth.write_text(
        json.dumps({"n_series": 2, "length": 30, "noise_std": 1.0, "seed": 4})
    )
    data = tmp_path / "data.csv"
    assert cli_main(["generate", "--config", str(synth), "--out", str(data)]) == 0
    cfg = {
        "dataset": {"csv": str(data)},
        "split": {"train_length": 25, "horizon": 5},
        "models": [{"label": "gm", "kind": {"kind": "global_mean", "params": {}}}],
        "run_count": 2,
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "runs"
    assert cli_main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "runs.csv").exists()


def test_full_pipeline_and_metrics_round_trip(tmp_path, capsys):
    cfg_path = write_experiment_config(
        tmp_path,
        run_count=3,
        models=[
            {"label": "sn", "kind": {"kind": "seasonal_naive", "params": {"period": 7}}},
            {
                "label": "lar",
                "kind": {
                    "kind": "linear_ar",
                    "params": {"lags": 4, "epochs": 3, "learning_rate": 0.05, "batch_size": 8},
                },
            },
        ],
    )
    out = tmp_path / "runs"
    assert cli_main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert cli_main(["metrics", "--runs", str(out)]) == 0
    assert cli_main(["report", "--runs", str(out)]) == 0

    table = (out / "table.csv").read_text().strip().splitlines()
    assert table[0] == "model,q25,q50,q75,q90"
    assert len(table) == 3  # two models
    for row in table[1:]:
        values = [float(v) for v in row.split(",")[1:]]
        assert values == sorted(values)  # quantile monotonicity

    report = json.loads((out / "report.json").read_text())
    assert set(report["models"]) == {"sn", "lar"}

    grids, accuracy = load_metrics_files(out)
    assert set(grids) == {"sn", "lar"}
    assert all(len(a.rmse_per_run) == 3 for a in accuracy.values())


def test_report_outputs_are_byte_deterministic(tmp_path, capsys):
    cfg_path = write_experiment_config(tmp_path, run_count=2)
    out = tmp_path / "runs"
    cli_main(["run", "--config", str(cfg_path), "--out", str(out)])
    cli_main(["metrics", "--runs", str(out)])
    rep_a = tmp_path / "report_a"
    rep_b = tmp_path / "report_b"
    assert cli_main(["report", "--runs", str(out), "--out", str(rep_a)]) == 0
    assert cli_main(["report", "--runs", str(out), "--out", str(rep_b)]) == 0
    for name in ("table.csv", "report.json", "cv_hist_sn.svg", "rmse_distribution.svg"):
        assert (rep_a / name).read_bytes() == (rep_b / name).read_bytes()


# ------------------------------------------------------------ table format

def test_all_zero_grid_row_format():
    grids = {"label": grid_from_cv(np.zeros((2, 3)))}
    text = emit_quantile_table(grids)
    assert text.splitlines()[1] == "label,0.000,0.000,0.000,0.000"


def test_quantile_table_hand_checked_median():
    grids = {"m": grid_from_cv(np.array([[0.0, 0.1], [0.2, 0.3]]))}
    lines = emit_quantile_table(grids).splitlines()
    assert lines[0] == "model,q25,q50,q75,q90"
    q50 = lines[1].split(",")[2]
    assert q50 == "0.150"


def test_quantile_table_rows_sorted_by_label():
    grids = {
        "zeta": grid_from_cv(np.zeros((1, 2))),
        "alpha": grid_from_cv(np.zeros((1, 2))),
    }
    lines = emit_quantile_table(grids).splitlines()
    assert [row.split(",")[0] for row in lines[1:]] == ["alpha", "zeta"]


def test_quantile_table_custom_probs():
    grids = {"m": grid_from_cv(np.array([[0.0, 1.0]]))}
    lines = emit_quantile_table(grids, probs=(0.5, 0.9)).splitlines()
    assert lines[0] == "model,q50,q90"


def test_empty_table_rejected():
    with pytest.raises(EmptyInput):
        emit_quantile_table({})


# ------------------------------------------------------------------- plots

def make_bundle(cv_values, rmse_values=(1.0, 2.0, 3.0), bins=4, clip=1.0):
    grid = grid_from_cv(cv_values)
    return build_report_bundle(
        {"m": grid},
        {"m": AccuracyReport(model_label="m", rmse_per_run=tuple(rmse_values))},
        bins=bins,
        clip_upper=clip,
    )


def test_svg_bar_counts_match_histogram(tmp_path):
    cv = np.array([[0.05, 0.3, 0.3], [0.8, 0.9, 2.0]])
    bundle = make_bundle(cv, bins=4, clip=1.0)
    paths = emit_plots(bundle, tmp_path)
    hist_path = next(p for p in paths if p.name == "cv_hist_m.svg")
    root = ET.parse(hist_path).getroot()
    bars = [
        el
        for el in root.iter(f"{SVG_NS}rect")
        if el.get("class") == "bar"
    ]
    counts = [int(el.get("data-count")) for el in bars]
    expected = histogram(cv.reshape(-1), 4, 1.0)
    assert counts == [c for _, _, c in expected.bins]
    assert sum(counts) + expected.excluded == cv.size


def test_svg_median_line_at_left_edge_for_all_zero_cv(tmp_path):
    bundle = make_bundle(np.zeros((2, 3)))
    emit_plots(bundle, tmp_path)
    root = ET.parse(tmp_path / "cv_hist_m.svg").getroot()
    median = next(
        el for el in root.iter(f"{SVG_NS}line") if el.get("class") == "median"
    )
    assert float(median.get("data-median")) == 0.0
    assert float(median.get("x1")) == 60.0  # left edge of the plot area


def test_rmse_plot_has_point_per_run(tmp_path):
    bundle = make_bundle(np.zeros((1, 2)), rmse_values=(1.0, 1.5, 2.0, 4.0))
    emit_plots(bundle, tmp_path)
    root = ET.parse(tmp_path / "rmse_distribution.svg").getroot()
    points = [el for el in root.iter(f"{SVG_NS}circle") if el.get("class") == "pt"]
    assert len(points) == 4
    assert sorted(float(p.get("data-rmse")) for p in points) == [1.0, 1.5, 2.0, 4.0]


def test_bundle_conservation_enforced():
    cv = np.array([[0.1, 0.5, 3.0]])
    bundle = make_bundle(cv, bins=5, clip=1.0)
    model = bundle.models[0]
    assert model.cv_histogram.total_count + model.cv_histogram.excluded == 3


def test_empty_bundle_rejected():
    with pytest.raises(EmptyInput):
        build_report_bundle({}, {})
    from forecast_stability.report import ReportBundle

    with pytest.raises(EmptyInput):
        emit_plots(ReportBundle(models=(), run_count=0), "unused")


def test_report_single_format_writes_only_that_file(tmp_path):
    cfg_path = write_experiment_config(tmp_path, run_count=2)
    out = tmp_path / "runs"
    cli_main(["run", "--config", str(cfg_path), "--out", str(out)])
    cli_main(["metrics", "--runs", str(out)])
    rep = tmp_path / "table_only"
    assert cli_main(["report", "--runs", str(out), "--out", str(rep), "--format", "csv"]) == 0
    assert (rep / "table.csv").exists()
    assert not (rep / "report.json").exists()
    assert not list(rep.glob("*.svg"))
