"""CSV/JSON serialization of records, Fisher scans and posterior trajectories.

Every CSV has a header row and writes floats with 17 significant digits via
Python's locale-independent formatting, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .measurement import MeasurementRecord


def fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True, allow_nan=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_record(stem, record):
    """Write ``<stem>.csv`` (index, time, outcome_label) and ``<stem>.json``."""
    stem = Path(stem)
    times = record.times()
    rows = [(i + 1, times[i], o) for i, o in enumerate(record.outcomes)]
    csv_path = write_csv(stem.with_suffix(".csv"), ["index", "time", "outcome_label"], rows)
    meta = {
        "labels": list(record.labels),
        "initial_label": record.initial_label,
        "schedule": [[t, c] for t, c in record.schedule],
        "seed": record.seed,
        "n": len(record),
        "pair_counts": record.pair_counts,
        "pair_counts_orientation": "pair_counts[m][l] counts steps from labels[l] to labels[m]",
        "model": record.params,
    }
    json_path = write_json(stem.with_suffix(".json"), meta)
    return csv_path, json_path


def read_record(stem):
    stem = Path(stem)
    meta = read_json(stem.with_suffix(".json"))
    header, rows = read_csv(stem.with_suffix(".csv"))
    if header != ["index", "time", "outcome_label"]:
        raise ValueError(f"unexpected record header {header}")
    outcomes = [r[2] for r in sorted(rows, key=lambda r: int(r[0]))]
    record = MeasurementRecord(
        labels=tuple(meta["labels"]), initial_label=meta["initial_label"], outcomes=outcomes,
        schedule=[tuple(s) for s in meta["schedule"]], seed=meta.get("seed"),
        params=meta.get("model", {}))
    if "pair_counts" in meta and not np.array_equal(record.pair_counts, np.array(meta["pair_counts"])):
        raise ValueError("pair counts in the sidecar do not match the outcome list")
    return record


def write_fisher_scan(stem, scan, metadata=None):
    stem = Path(stem)
    rows = zip(scan.tau_grid, scan.per_measurement, scan.per_time)
    csv_path = write_csv(stem.with_suffix(".csv"), ["tau", "F_per_measurement", "F_per_time"], rows)
    meta = dict(metadata or {})
    meta.update(optimal_tau=scan.optimal_tau, optimal_value=scan.optimal_value,
                grid=dict(tau_min=float(scan.tau_grid[0]), tau_max=float(scan.tau_grid[-1]),
                          points=len(scan.tau_grid)))
    return csv_path, write_json(stem.with_suffix(".json"), meta)


def write_posterior(stem, candidates, trajectory, metadata=None):
    """Posterior trajectory: one row per measurement index, one column per candidate."""
    stem = Path(stem)
    header = ["index"] + [fmt(c) for c in candidates]
    rows = ([i] + list(row) for i, row in enumerate(np.asarray(trajectory)))
    csv_path = write_csv(stem.with_suffix(".csv"), header, rows)
    meta = dict(metadata or {})
    meta["grid"] = list(map(float, candidates))
    return csv_path, write_json(stem.with_suffix(".json"), meta)
