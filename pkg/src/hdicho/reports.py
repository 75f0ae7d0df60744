"""Report serialization: deterministic JSON and CSV grid dumps.

Reports for one run are deterministic given the config and seed; the
only nondeterministic data (start time, wall time) is isolated in the
single top-level ``timestamp`` field so byte-level comparison of two
runs just drops that key.  Files are written atomically (temp + rename).
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and odd floats to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if x != x:
            return "nan"
        if x == float("inf"):
            return "inf"
        if x == float("-inf"):
            return "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _atomic_write(path: str, data: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: str, obj) -> None:
    _atomic_write(path, json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n")


def write_csv_atomic(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def grid_csv(ev, grid, directions) -> tuple[list, list]:
    """Per-point solution-norm table: t, h(t), then |Phi(t) xi_k| columns."""
    pts = np.asarray(grid, dtype=float)
    h = np.asarray(ev.growth.forward(pts), dtype=float)
    Phi = ev.fundamental_grid(pts)
    vals = np.einsum("pij,dj->pdi", Phi, directions)
    norms = np.linalg.norm(vals, axis=2)
    header = ["t", "h"] + [f"norm_dir{k}" for k in range(directions.shape[0])]
    rows = [
        [float(pts[i]), float(h[i])] + [float(x) for x in norms[i]]
        for i in range(pts.size)
    ]
    return header, rows
