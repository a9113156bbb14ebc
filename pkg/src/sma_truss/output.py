"""Flat-file artifacts: ``timeseries.csv``, ``poincare.csv`` and ``metrics.txt``."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .engine import ScenarioResult

TIMESERIES_COLUMNS = ("tau", "x", "y", "u", "d_hat", "s", "xtilde", "xtilde_dot", "d_tilde")


def _num(value: float) -> str:
    # repr is locale independent and round-trips exactly
    return repr(float(value))


def _metric(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _num(value)


def write_timeseries(result: ScenarioResult, path) -> None:
    data = np.column_stack([getattr(result, name) for name in TIMESERIES_COLUMNS])
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_COLUMNS)
        for row in data.tolist():
            writer.writerow([repr(v) for v in row])


def write_poincare(result: ScenarioResult, path) -> None:
    period = 2.0 * math.pi / result.scenario.params.Omega if result.scenario.params.Omega > 0 else float("nan")
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("k", "tau", "x", "y"))
        for k, (x, y) in enumerate(result.poincare.tolist(), start=1):
            writer.writerow((k, _num(k * period), repr(x), repr(y)))


def write_metrics(metrics: dict, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for key, value in metrics.items():
            fh.write(f"{key}={_metric(value)}\n")


def write_result(result: ScenarioResult, out_dir, extra_metrics: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_timeseries(result, out / "timeseries.csv")
    write_poincare(result, out / "poincare.csv")
    metrics = dict(extra_metrics or {})
    metrics.update(result.metrics)
    write_metrics(metrics, out / "metrics.txt")
    return out


def read_metrics(path) -> dict[str, str]:
    metrics = {}
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            metrics[key.strip()] = value.strip()
    return metrics


def read_timeseries(path, required=TIMESERIES_COLUMNS) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(missing)}")
        rows = np.array([[float(v) for v in row] for row in reader], dtype=float)
    if rows.size == 0:
        rows = rows.reshape(0, len(header))
    return {name: rows[:, i] for i, name in enumerate(header)}
