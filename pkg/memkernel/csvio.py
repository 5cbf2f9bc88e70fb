"""CSV and JSON artifacts.

Tables carry a header row, comma separators and 17 significant digits so
values survive a write/read cycle bit for bit.
"""
import hashlib
import json
import os
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError

FLOAT_FORMAT = "%.17g"


def write_table(path: str, columns: Sequence[str], data) -> str:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} column names for a table with {data.shape[1]} columns.")
    np.savetxt(path, data, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="")
    return path


def read_table(path: str) -> Tuple[List[str], np.ndarray]:
    """Header names and a (rows, columns) float array."""
    if not os.path.exists(path):
        raise ConfigError(f"CSV file not found at path: {path}")
    with open(path, "r") as f:
        header = f.readline().strip()
    if not header:
        raise ConfigError(f"CSV file {path} is empty.")
    columns = [name.strip() for name in header.split(",")]
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ConfigError(f"Failed to parse CSV file {path}: {e}") from e
    if data.size and data.shape[1] != len(columns):
        raise ConfigError(f"CSV file {path}: header names {len(columns)} columns, rows have {data.shape[1]}.")
    return columns, data


def write_solution(path: str, sol) -> str:
    """t, mode_1, ..., mode_J."""
    columns = ["t"] + [f"mode_{j}" for j in range(1, sol.op.mode_count + 1)]
    return write_table(path, columns, np.column_stack([sol.grid.nodes, sol.as_array().T]))


def write_kernel(path: str, kernel, name: str = None) -> str:
    name = name or kernel.role
    return write_table(path, ["t", name], np.column_stack([kernel.grid.nodes, kernel.trace.values]))


def write_field(path: str, points, values) -> str:
    return write_table(path, ["x", "value"], np.column_stack([points, values]))


def read_time_columns(path: str, grid) -> Dict[str, np.ndarray]:
    """Columns of a t-indexed CSV, checked against the grid nodes."""
    columns, data = read_table(path)
    if columns[0] != "t":
        raise ConfigError(f"CSV file {path} must start with a 't' column, got {columns[0]!r}.")
    if data.shape[0] != grid.size or not np.allclose(data[:, 0], grid.nodes, rtol=0.0, atol=1e-9 * grid.horizon):
        raise ConfigError(
            f"CSV file {path} does not sample the configured grid "
            f"(T={grid.horizon}, N={grid.steps}, {grid.size} rows expected, got {data.shape[0]})."
        )
    return {name: data[:, i] for i, name in enumerate(columns) if i > 0}


def read_field(path: str) -> np.ndarray:
    """Values of an x,value CSV on the uniform grid of [0, 1]."""
    columns, data = read_table(path)
    if columns[:2] != ["x", "value"]:
        raise ConfigError(f"Field CSV {path} must have columns x,value, got {columns}.")
    x = data[:, 0]
    if not np.allclose(x, np.linspace(0.0, 1.0, len(x)), atol=1e-9):
        raise ConfigError(f"Field CSV {path} must sample a uniform grid of [0, 1].")
    return data[:, 1]


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default)


def write_json(path: str, payload) -> str:
    with open(path, "w") as f:
        f.write(dumps(payload))
        f.write("\n")
    return path


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
