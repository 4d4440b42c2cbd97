"""Serialization of experiment results: CSV tables, JSON reports, histograms."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from .experiments import ExperimentConfig, ResultTable

__all__ = ["load_config", "to_jsonable", "write_json", "write_table_csv", "write_histogram", "save_results"]


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def to_jsonable(value):
    """Recursively convert numpy types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cell(value):
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_table_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case"] + table.columns)
        for label, row in table.rows.items():
            writer.writerow([label] + [_cell(row.get(c, "")) for c in table.columns])


def write_histogram(bins, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in bins:
            writer.writerow([_cell(left), _cell(right), count])


def _values_csv(values, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("statistic\n")
        for v in np.asarray(values, float):
            fh.write(format(v, ".17g") + "\n")


def save_results(table: ResultTable, out_dir) -> list[Path]:
    """Write every output of ``table`` under ``out_dir``; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ParameterError(f"cannot create output directory {out}: {exc}") from exc
    stem = table.experiment.replace("-", "_")
    written = [out / f"{stem}.csv", out / f"{stem}.json"]
    write_table_csv(table, written[0])
    report = {"experiment": table.experiment, "rows": table.rows, "metadata": table.metadata}
    if "gaps" in table.extra:
        report["gaps"] = table.extra["gaps"]
    write_json(report, written[1])
    for (label, series), bins in table.extra.get("histograms", {}).items():
        path = out / f"hist_{label}_{series}.txt"
        write_histogram(bins, path)
        written.append(path)
    for (label, series), values in table.extra.get("samples", {}).items():
        path = out / f"stat_{label}_{series}.csv"
        _values_csv(values, path)
        written.append(path)
    for (label, series), values in table.extra.get("z", {}).items():
        path = out / f"z_{label}_{series}.csv"
        _values_csv(values, path)
        written.append(path)
    return written
