"""Matrix dumps: JSON with a shape header and row-major ``[re, im]`` pairs, or ``.npy``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["matrix_to_json", "matrix_from_json", "save_matrix", "load_matrix"]


def matrix_to_json(M: np.ndarray) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    flat = M.reshape(-1)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = np.asarray(obj["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix dump: {exc}") from exc
    if data.shape != (rows * cols, 2):
        raise ValueError(f"matrix dump has {data.shape[0]} entries, header says {rows}x{cols}")
    return (data[:, 0] + 1j * data[:, 1]).reshape(rows, cols)


def save_matrix(path, M: np.ndarray) -> Path:
    """Write ``.npy`` (binary) or JSON depending on the suffix."""
    path = Path(path)
    if path.suffix == ".npy":
        np.save(path, np.asarray(M))
    else:
        path.write_text(json.dumps(matrix_to_json(M)))
    return path


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        return np.load(path)
    return matrix_from_json(json.loads(path.read_text()))
