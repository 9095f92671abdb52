import os

import pytest

from meqc.utils import csv_export
from meqc.utils.csv_export import SWEEP_COLUMNS, emit_csv, read_csv


def _row(**overrides):
    row = {
        "seed": 0,
        "policy": "greedy",
        "param": "edge_cpu",
        "value": 1e10,
        "mean_cost": 1.0 / 3.0,
        "latency_cost": 0.1234567890123456,
        "energy_cost": 2.0e-7,
        "qpu_grant_rate": 0.0,
        "mean_success_prob": 0.75,
    }
    row.update(overrides)
    return row


def test_zero_rows_write_header_only(tmp_path):
    path = emit_csv([], tmp_path / "empty.csv")
    assert path.read_bytes() == (",".join(SWEEP_COLUMNS) + "\n").encode()


def test_fixed_header_lf_endings_and_twelve_digits(tmp_path):
    path = emit_csv([_row(), _row(seed=1)], tmp_path / "rows.csv")
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[1].split(",")[4] == "0.333333333333"
    df = read_csv(path)
    assert df["latency_cost"][0] == pytest.approx(0.1234567890123456, rel=1e-11)
    assert df["energy_cost"][0] == 2.0e-7
    assert not (tmp_path / "rows.csv.partial").exists()


def test_failed_rename_leaves_partial_marker(tmp_path, monkeypatch):
    def broken_replace(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(csv_export.os, "replace", broken_replace)
    with pytest.raises(OSError):
        emit_csv([_row()], tmp_path / "rows.csv")
    assert (tmp_path / "rows.csv.partial").exists()
    assert not (tmp_path / "rows.csv").exists()
    assert os.path.getsize(tmp_path / "rows.csv.partial") > 0
