import json

import numpy as np
import pytest

from seasurrogate.errors import ConfigError
from seasurrogate.harness.dataset import normalize
from seasurrogate.harness.sweep import COLUMNS, architecture_sweep, expand_grid, run_row
from seasurrogate.harness.training import TrainConfig, evaluate, train_surrogate

BASE = TrainConfig(train_steps=30, tbptt_len=32, seed=2)
GRID = {"layers": [1, 2], "neurons": [4], "train_steps": [30], "train_fractions": [0.5, 1.0]}


def test_grid_expansion(small_catamaran):
    rows = expand_grid(GRID, small_catamaran)
    assert len(rows) == 4
    assert rows[0] == {"cell_kind": "lstm", "layers": 1, "neurons": 4, "train_steps": 30,
                       "num_sequences": 2, "train_fraction": 0.5}
    with pytest.raises(ConfigError, match="unknown"):
        expand_grid({"dropout": [0.1]}, small_catamaran)
    with pytest.raises(ConfigError):
        expand_grid({"layers": []}, small_catamaran)


def test_singleton_sweep_equals_direct_run(small_catamaran):
    report = architecture_sweep(small_catamaran, {"neurons": [4], "train_steps": [30]}, BASE)
    (row,) = report.rows
    direct = evaluate(train_surrogate(normalize(small_catamaran), TrainConfig(neurons=4, train_steps=30,
                                                                              tbptt_len=32, seed=2)),
                      normalize(small_catamaran), "test")
    assert row["status"] == "ok" and row["overall_rse"] == direct.overall


def test_sweep_is_deterministic_and_threads_agree(small_catamaran):
    a = architecture_sweep(small_catamaran, GRID, BASE)
    b = architecture_sweep(small_catamaran, GRID, BASE, workers=3)
    assert [r["overall_rse"] for r in a.rows] == [r["overall_rse"] for r in b.rows]


def test_resume_skips_journalled_rows(small_catamaran, tmp_path):
    journal = tmp_path / "sweep.jsonl"
    first = architecture_sweep(small_catamaran, {**GRID, "layers": [1]}, BASE, journal=journal)
    lines = journal.read_text().splitlines()
    assert len(lines) == 2
    # tamper with a journalled score: a resumed run must keep it rather than retrain
    row = json.loads(lines[0])
    row["overall_rse"] = -1.0
    journal.write_text(json.dumps(row) + "\n" + lines[1] + "\n{torn")
    resumed = architecture_sweep(small_catamaran, GRID, BASE, journal=journal, resume=True)
    assert len(resumed.rows) == 4
    assert resumed.find(layers=1, train_fraction=0.5)[0]["overall_rse"] == -1.0
    assert resumed.find(layers=2, train_fraction=1.0)[0]["overall_rse"] > 0
    assert first.rows[1] == resumed.find(layers=1, train_fraction=1.0)[0]
    fresh = architecture_sweep(small_catamaran, GRID, BASE, journal=journal)
    assert all(r["overall_rse"] > 0 for r in fresh.rows)


def test_failed_rows_are_recorded(small_catamaran):
    report = architecture_sweep(small_catamaran, {"neurons": [4], "train_steps": [10], "num_sequences": [1, 9]},
                                BASE)
    ok, failed = report.sorted_rows()
    assert ok["status"] == "ok"
    assert failed["status"] == "failed" and "num_train" in failed["error"]
    assert "failed" in report.table()


def test_csv_output(small_catamaran, tmp_path):
    report = architecture_sweep(small_catamaran, {"neurons": [3, 4], "train_steps": [10]}, BASE)
    report.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].split(",")[:len(COLUMNS)] == list(COLUMNS)
    assert len(lines) == 3
    scores = [r["overall_rse"] for r in report.sorted_rows()]
    assert scores == sorted(scores)


def test_run_row_direct(small_catamaran):
    row = {"cell_kind": "gru", "layers": 1, "neurons": 3, "train_steps": 5, "num_sequences": 1,
           "train_fraction": 0.5}
    out = run_row(small_catamaran, row, BASE)
    assert out["status"] == "ok" and np.isfinite(out["overall_rse"]) and out["wall_time"] >= 0
