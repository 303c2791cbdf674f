"""Strict loaders for the simulator's documented output files.

Each loader validates the columns/keys it needs and fails with the missing
name; rendering never repairs or reinterprets data.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaMismatch(Exception):
    """Input file does not match the documented schema; names the column."""


class EmptyInput(Exception):
    """Input file parsed but contains no data rows."""


def _read_csv(path: str, required: tuple[str, ...]) -> dict[str, list[float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaMismatch(f"{Path(path).name}: missing column '{column}'")
        rows = list(reader)
    if not rows:
        raise EmptyInput(f"{Path(path).name}: no data rows")
    out: dict[str, list[float]] = {c: [] for c in required}
    for row in rows:
        for column in required:
            out[column].append(float(row[column]))
    return out


def load_survival(path: str) -> dict[str, list[float]]:
    return _read_csv(path, ("n", "empirical_survival", "exact_survival"))


def load_trace(path: str) -> dict[str, list[float]]:
    return _read_csv(path, ("step", "tau", "s"))


def load_trajectory(path: str) -> dict[str, list[float]]:
    return _read_csv(path, ("t", "tau_mean", "tau_se", "tau_newton"))


def load_cycles(path: str) -> dict[str, list[float]]:
    return _read_csv(path, ("cycle", "cumulative_deviation"))


def load_born(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{Path(path).name}: not valid JSON: {exc}") from exc
    for key in ("weights", "counts", "n_runs", "chi2_p"):
        if key not in data:
            raise SchemaMismatch(f"{Path(path).name}: missing column '{key}'")
    if not data["counts"]:
        raise EmptyInput(f"{Path(path).name}: empty counts")
    return data
