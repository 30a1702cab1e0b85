"""End-to-end acceptance: the search engine drives the real trainer.

A four-evaluation run (2 initial antibodies + 2 clones) over the built-in
synthetic dataset must complete with every affinity in [0, 1] and a valid
report. The engine is used strictly through its CLI and report format.
"""

import json
import subprocess
import sys

import pytest


def test_engine_roundtrip_four_evaluations(tmp_path):
    config = {
        "population_size": 2,
        "generations": 1,
        "select_fraction": 0.5,
        "newcomers": 0,
        "clone_factor": 2,
        "stages_max": 1,
        "layers_per_cell": 3,
        "seed": 13,
        "dataset": "synthetic",
        "train_fraction": 0.5,
        "epochs": 1,
        "evaluator": f"worker:{sys.executable} -m celltrainer",
        "worker_timeout": 600.0,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    report_path = tmp_path / "report.jsonl"

    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "cellnas.cli",
            "search",
            "--config", str(config_path),
            "--report", str(report_path),
            "--manifest", str(tmp_path / "manifest.json"),
        ],
        capture_output=True,
        text=True,
        timeout=900,
    )
    assert result.returncode == 0, result.stderr

    records = [json.loads(line) for line in report_path.read_text().splitlines()]
    types = [r["type"] for r in records]
    assert types[0] == "config" and types[-1] == "summary"
    summary = records[-1]
    assert summary["evaluations_requested"] == 4
    assert 1 <= summary["evaluations"] <= 4
    assert 0.0 <= summary["best_affinity"] <= 1.0
    generation = [r for r in records if r["type"] == "generation"]
    assert len(generation) == 1
    affinities = [a for _, a in generation[0]["population"] if a is not None]
    assert affinities and all(0.0 <= a <= 1.0 for a in affinities)
    assert "best affinity" in result.stdout


def test_engine_sees_worker_errors_as_zero_affinity(tmp_path):
    # unknown dataset: every evaluation errors, the search still completes
    config = {
        "population_size": 2,
        "generations": 1,
        "select_fraction": 0.5,
        "newcomers": 0,
        "clone_factor": 1,
        "stages_max": 1,
        "layers_per_cell": 2,
        "seed": 5,
        "dataset": "imagenet",
        "evaluator": f"worker:{sys.executable} -m celltrainer",
        "worker_timeout": 600.0,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    report_path = tmp_path / "report.jsonl"
    result = subprocess.run(
        [
            sys.executable, "-m", "cellnas.cli", "search",
            "--config", str(config_path),
            "--report", str(report_path),
            "--manifest", str(tmp_path / "manifest.json"),
        ],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert result.returncode == 0, result.stderr
    summary = json.loads(report_path.read_text().splitlines()[-1])
    assert summary["best_affinity"] == 0.0
