"""Experiment orchestration: seeded refit runs on fixed inputs.

An experiment fixes a dataset, a train/test split, and a roster of models,
then fits every model R times varying nothing but the seed. Per-run seeds
are ``derive_seed(master_seed, fnv1a64(label) XOR run_id)``, so each
model's seed stream is independent of roster order and the whole
experiment is a pure function of its config. Forecasts are post-processed
(clipped, rounded) before they are recorded: stability and accuracy both
describe the numbers a planner would actually receive.

Persistence is plain CSV plus a JSON manifest; see ``persist_runs``.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .dataset import (
    SplitSpec,
    SynthConfig,
    TimeSeriesDataset,
    load_long_csv,
    split,
    synth_generate,
)
from .ensemble import (
    DEFAULT_ITERATIONS,
    DEFAULT_WINDOWS,
    component_seed,
    fit_ensemble,
    predict_ensemble,
)
from .errors import ForecastStabilityError
from .forecasters import ForecasterKind, fit, kind_from_json, kind_to_json, predict
from .metrics import ForecastSet, postprocess
from .seeding import derive_seed, fnv1a64

DEFAULT_RUN_COUNT = 10

RUNS_FILE = "runs.csv"
ACTUALS_FILE = "actuals.csv"
MANIFEST_FILE = "manifest.json"


class HarnessError(ForecastStabilityError):
    pass


class EmptyExperiment(HarnessError):
    pass


class SchemaMismatch(HarnessError):
    pass


class RaggedRuns(HarnessError):
    pass


@dataclass(frozen=True)
class CsvSource:
    """Panel loaded from a long-format CSV file."""

    path: str
    fill_missing: bool = False


@dataclass(frozen=True)
class EnsembleRequest:
    """Roster entry asking the harness to fit an ensemble each run."""

    components: tuple[ForecasterKind, ...]
    n_windows: int = DEFAULT_WINDOWS

    def __post_init__(self):
        if not self.components:
            raise ValueError("ensemble request needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))


@dataclass(frozen=True)
class ModelEntry:
    """One labelled model in the experiment roster."""

    label: str
    forecaster: ForecasterKind | None = None
    ensemble: EnsembleRequest | None = None

    def __post_init__(self):
        if (self.forecaster is None) == (self.ensemble is None):
            raise ValueError(
                f"model {self.label!r} must set exactly one of forecaster/ensemble"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment bit-for-bit."""

    dataset: CsvSource | SynthConfig
    split: SplitSpec
    models: tuple[ModelEntry, ...]
    run_count: int = DEFAULT_RUN_COUNT
    master_seed: int = 0
    ensemble_iterations: int = DEFAULT_ITERATIONS
    output_dir: str | None = None

    def __post_init__(self):
        if self.run_count < 2:
            raise ValueError("run_count must be >= 2")
        labels = [entry.label for entry in self.models]
        if not labels:
            raise ValueError("experiment needs at least one model")
        if len(set(labels)) != len(labels):
            raise ValueError("model labels must be unique")
        object.__setattr__(self, "models", tuple(self.models))


@dataclass(frozen=True, eq=False)
class RunRecord:
    """One seeded fit+predict cycle: post-processed forecasts and timing."""

    model_label: str
    run_id: int
    seed: int
    forecast: np.ndarray
    duration_s: float

    def __post_init__(self):
        forecast = np.asarray(self.forecast)
        if forecast.dtype != np.int64 or np.any(forecast < 0):
            raise ValueError("forecast must be post-processed nonnegative integers")
        forecast = forecast.copy()
        forecast.flags.writeable = False
        object.__setattr__(self, "forecast", forecast)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """All run records plus the held-out actuals they are judged against."""

    records: tuple[RunRecord, ...]
    actuals: np.ndarray
    series_ids: tuple[str, ...]
    config: ExperimentConfig


def run_seed(master_seed: int, label: str, run_id: int) -> int:
    """Per-run seed: label hash keeps model streams apart, run id varies."""
    return derive_seed(master_seed, fnv1a64(label) ^ run_id)


def load_panel(source: CsvSource | SynthConfig) -> TimeSeriesDataset:
    if isinstance(source, SynthConfig):
        return synth_generate(source)
    return load_long_csv(source.path, fill_missing=source.fill_missing)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute every (model, run) cell of the experiment grid.

    Training data, split, and hyperparameters are identical across the R
    runs of a label; only the seed changes. Raises on the first failure
    without emitting partial results.
    """
    panel = load_panel(cfg.dataset)
    train, actuals = split(panel, cfg.split)
    horizon = cfg.split.horizon
    records = []
    for entry in cfg.models:
        for run_id in range(cfg.run_count):
            seed = run_seed(cfg.master_seed, entry.label, run_id)
            started = time.perf_counter()
            if entry.forecaster is not None:
                raw = predict(fit(entry.forecaster, train, seed), horizon)
            else:
                request = entry.ensemble
                spec = fit_ensemble(
                    request.components,
                    train,
                    horizon,
                    n_windows=request.n_windows,
                    seed=seed,
                    iterations=cfg.ensemble_iterations,
                )
                fitted = [
                    fit(kind, train, component_seed(seed, index))
                    for index, kind in enumerate(spec.components)
                ]
                raw = predict_ensemble(spec, fitted, horizon)
            forecast = postprocess(raw)
            records.append(
                RunRecord(
                    model_label=entry.label,
                    run_id=run_id,
                    seed=seed,
                    forecast=forecast,
                    duration_s=time.perf_counter() - started,
                )
            )
    return ExperimentResult(
        records=tuple(records),
        actuals=actuals,
        series_ids=train.series_ids,
        config=cfg,
    )


def persist_runs(result: ExperimentResult, out_dir: str | Path) -> None:
    """Write runs.csv, actuals.csv, and manifest.json into a directory.

    runs.csv rows are ``model,run_id,item_id,h,value`` sorted by that key;
    forecast values are integer literals. actuals.csv is ``item_id,h,value``
    with round-trip precision (actual demand may be fractional). The
    manifest echoes the config and the seed of every run.
    """
    if not result.records:
        raise EmptyExperiment("refusing to persist an experiment with no runs")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ids = result.series_ids
    run_lines = ["model,run_id,item_id,h,value"]
    for record in sorted(result.records, key=lambda r: (r.model_label, r.run_id)):
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        for i in order:
            for t in range(record.forecast.shape[1]):
                run_lines.append(
                    f"{record.model_label},{record.run_id},{ids[i]},{t + 1},"
                    f"{record.forecast[i, t]}"
                )

    actual_lines = ["item_id,h,value"]
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    for i in order:
        for t in range(result.actuals.shape[1]):
            actual_lines.append(f"{ids[i]},{t + 1},{_format_value(result.actuals[i, t])}")

    seeds: dict[str, list[int]] = {}
    for record in result.records:
        seeds.setdefault(record.model_label, []).append(record.seed)
    manifest = {
        "config": config_to_json(result.config),
        "seeds": seeds,
        "created_at": dt.datetime.now(dt.timezone.utc).isoformat(),
    }

    (out_dir / RUNS_FILE).write_text("\n".join(run_lines) + "\n", encoding="utf-8")
    (out_dir / ACTUALS_FILE).write_text(
        "\n".join(actual_lines) + "\n", encoding="utf-8"
    )
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _format_value(value: float) -> str:
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def load_runs(path: str | Path) -> tuple[dict[str, ForecastSet], np.ndarray]:
    """Reconstruct per-model forecast tensors and actuals from a directory.

    Validates that every run of a model covers the same full (item, step)
    grid and that actuals align with the forecasts.
    """
    path = Path(path)
    runs_path = path / RUNS_FILE
    actuals_path = path / ACTUALS_FILE
    if not runs_path.exists():
        raise FileNotFoundError(f"{runs_path} not found")
    if not actuals_path.exists():
        raise FileNotFoundError(f"{actuals_path} not found")

    cells: dict[str, dict[int, dict[tuple[str, int], float]]] = {}
    with runs_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["model", "run_id", "item_id", "h", "value"]:
            raise SchemaMismatch(f"{runs_path}: unexpected header {header}")
        for row in reader:
            if not row:
                continue
            model, run_text, item, h_text, value_text = row
            run_id, step = int(run_text), int(h_text)
            grid = cells.setdefault(model, {}).setdefault(run_id, {})
            if (item, step) in grid:
                raise SchemaMismatch(
                    f"{runs_path}: duplicate row for {model} run {run_id} "
                    f"{item} h={step}"
                )
            grid[(item, step)] = float(value_text)
    if not cells:
        raise EmptyExperiment(f"{runs_path}: no forecast rows")

    actual_cells: dict[tuple[str, int], float] = {}
    with actuals_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["item_id", "h", "value"]:
            raise SchemaMismatch(f"{actuals_path}: unexpected header {header}")
        for row in reader:
            if not row:
                continue
            item, h_text, value_text = row
            key = (item, int(h_text))
            if key in actual_cells:
                raise SchemaMismatch(f"{actuals_path}: duplicate row for {key}")
            actual_cells[key] = float(value_text)
    if not actual_cells:
        raise EmptyExperiment(f"{actuals_path}: no rows")

    ids = sorted({item for item, _ in actual_cells})
    horizon = max(step for _, step in actual_cells)
    expected = {(item, step) for item in ids for step in range(1, horizon + 1)}
    if set(actual_cells) != expected:
        raise RaggedRuns(f"{actuals_path}: incomplete (item, h) grid")
    actuals = np.array(
        [[actual_cells[(item, step)] for step in range(1, horizon + 1)] for item in ids]
    )

    sets: dict[str, ForecastSet] = {}
    for model in sorted(cells):
        by_run = cells[model]
        run_ids = sorted(by_run)
        if run_ids != list(range(len(run_ids))):
            raise RaggedRuns(f"{runs_path}: {model} run ids are not contiguous")
        grids = []
        for run_id in run_ids:
            grid = by_run[run_id]
            if set(grid) != expected:
                raise RaggedRuns(
                    f"{runs_path}: {model} run {run_id} does not cover the "
                    "(item, h) grid of the actuals"
                )
            grids.append(
                [[grid[(item, step)] for step in range(1, horizon + 1)] for item in ids]
            )
        sets[model] = ForecastSet(series_ids=tuple(ids), values=np.array(grids))
    return sets, actuals


def config_to_json(cfg: ExperimentConfig) -> dict:
    if isinstance(cfg.dataset, SynthConfig):
        dataset = {
            "synth": {
                "n_series": cfg.dataset.n_series,
                "length": cfg.dataset.length,
                "level_range": list(cfg.dataset.level_range),
                "season_period": cfg.dataset.season_period,
                "season_amplitude": cfg.dataset.season_amplitude,
                "noise_std": cfg.dataset.noise_std,
                "intermittency": cfg.dataset.intermittency,
                "seed": cfg.dataset.seed,
            }
        }
    else:
        dataset = {"csv": cfg.dataset.path, "fill_missing": cfg.dataset.fill_missing}
    models = []
    for entry in cfg.models:
        if entry.forecaster is not None:
            models.append({"label": entry.label, "kind": kind_to_json(entry.forecaster)})
        else:
            models.append(
                {
                    "label": entry.label,
                    "ensemble": {
                        "components": [
                            kind_to_json(k) for k in entry.ensemble.components
                        ],
                        "n_windows": entry.ensemble.n_windows,
                    },
                }
            )
    out = {
        "dataset": dataset,
        "split": {
            "train_length": cfg.split.train_length,
            "horizon": cfg.split.horizon,
        },
        "models": models,
        "run_count": cfg.run_count,
        "master_seed": cfg.master_seed,
        "ensemble_iterations": cfg.ensemble_iterations,
    }
    if cfg.output_dir is not None:
        out["output_dir"] = cfg.output_dir
    return out


def synth_from_json(obj: Mapping) -> SynthConfig:
    """Parse a synthetic-panel recipe from its JSON object form."""
    try:
        return SynthConfig(
            n_series=int(obj["n_series"]),
            length=int(obj["length"]),
            level_range=tuple(obj.get("level_range", (50.0, 150.0))),
            season_period=int(obj.get("season_period", 7)),
            season_amplitude=float(obj.get("season_amplitude", 0.0)),
            noise_std=float(obj.get("noise_std", 0.0)),
            intermittency=float(obj.get("intermittency", 0.0)),
            seed=int(obj.get("seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad synthetic panel config: {exc}") from exc


def config_from_json(obj: Mapping) -> ExperimentConfig:
    """Parse an experiment config from its JSON object form.

    Raises ValueError on schema problems so the CLI reports them as data
    errors rather than crashes.
    """
    try:
        dataset_obj = obj["dataset"]
        if "synth" in dataset_obj:
            dataset: CsvSource | SynthConfig = synth_from_json(dataset_obj["synth"])
        elif "csv" in dataset_obj:
            dataset = CsvSource(
                path=str(dataset_obj["csv"]),
                fill_missing=bool(dataset_obj.get("fill_missing", False)),
            )
        else:
            raise ValueError("dataset must specify either 'csv' or 'synth'")
        models = []
        for entry in obj["models"]:
            label = str(entry["label"])
            if "kind" in entry:
                models.append(
                    ModelEntry(label=label, forecaster=kind_from_json(entry["kind"]))
                )
            elif "ensemble" in entry:
                ens = entry["ensemble"]
                models.append(
                    ModelEntry(
                        label=label,
                        ensemble=EnsembleRequest(
                            components=tuple(
                                kind_from_json(k) for k in ens["components"]
                            ),
                            n_windows=int(ens.get("n_windows", DEFAULT_WINDOWS)),
                        ),
                    )
                )
            else:
                raise ValueError(f"model {label!r} must specify 'kind' or 'ensemble'")
        return ExperimentConfig(
            dataset=dataset,
            split=SplitSpec(
                train_length=int(obj["split"]["train_length"]),
                horizon=int(obj["split"]["horizon"]),
            ),
            models=tuple(models),
            run_count=int(obj.get("run_count", DEFAULT_RUN_COUNT)),
            master_seed=int(obj.get("master_seed", 0)),
            ensemble_iterations=int(
                obj.get("ensemble_iterations", DEFAULT_ITERATIONS)
            ),
            output_dir=obj.get("output_dir"),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad experiment config: {exc}") from exc
