"""Drive the four CLI stages end to end in a scratch directory.

generate -> run -> metrics -> report, exactly as you would from a shell.

Run: python3 demos/05_cli_pipeline.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

SYNTH = {
    "n_series": 10,
    "length": 120,
    "level_range": [40, 110],
    "season_period": 7,
    "season_amplitude": 12,
    "noise_std": 4,
    "seed": 5,
}

EXPERIMENT = {
    "split": {"train_length": 113, "horizon": 7},
    "models": [
        {"label": "seasonal_naive", "kind": {"kind": "seasonal_naive", "params": {"period": 7}}},
        {
            "label": "linear_ar",
            "kind": {
                "kind": "linear_ar",
                "params": {"lags": 4, "epochs": 3, "learning_rate": 0.05, "batch_size": 16},
            },
        },
    ],
    "run_count": 5,
    "master_seed": 0,
}


def cli(*argv):
    cmd = [sys.executable, "-m", "forecast_stability.cli", *argv]
    print(f"$ forecast-stability {' '.join(argv)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(proc.returncode)


with tempfile.TemporaryDirectory() as tmp:
    base = Path(tmp)
    (base / "synth.json").write_text(json.dumps(SYNTH))
    cli("generate", "--config", str(base / "synth.json"), "--out", str(base / "data.csv"))

    EXPERIMENT["dataset"] = {"csv": str(base / "data.csv")}
    (base / "experiment.json").write_text(json.dumps(EXPERIMENT))
    cli("run", "--config", str(base / "experiment.json"), "--out", str(base / "runs"))
    cli("metrics", "--runs", str(base / "runs"))
    cli("report", "--runs", str(base / "runs"), "--bins", "40", "--clip", "0.5")

    print("\nruns directory now holds:")
    for path in sorted((base / "runs").iterdir()):
        print(f"  {path.name}")
    print("\ntable.csv:")
    print((base / "runs" / "table.csv").read_text())
