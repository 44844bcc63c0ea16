"""Deterministic mesh and frame export.

OBJ files carry `v x y z` lines in row-major (i, j) vertex order and 1-based
quad faces, formatted with 12 significant digits so identical scenes hash
identically.  Frame records serialize with sorted keys for the same reason.
"""
from __future__ import annotations

import json

import numpy as np


def _fmt(x):
    s = f"{float(x):.11e}"
    return s


def obj_bytes(grid, face_indices, comment=None) -> bytes:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    V = np.asarray(grid, dtype=float).reshape(-1, 3)
    for v in V:
        lines.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
    for quad in face_indices:
        a, b, c, d = (int(k) + 1 for k in quad)
        lines.append(f"f {a} {b} {c} {d}")
    return ("\n".join(lines) + "\n").encode()


def write_obj(path, grid, face_indices, comment=None):
    data = obj_bytes(grid, face_indices, comment)
    with open(path, "wb") as f:
        f.write(data)
    return data


def frame_record(t, grid, residuals, flags=None):
    """Serializable per-frame record: t, flat row-major vertices, residuals."""
    V = np.asarray(grid, dtype=float)
    return {
        "t": float(t),
        "shape": list(V.shape[:2]),
        "vertices": [round(float(x), 15) for x in V.reshape(-1)],
        "residuals": {k: float(v) for k, v in residuals.items()},
        "flags": dict(flags or {}),
    }


def frames_json_bytes(records) -> bytes:
    return json.dumps({"frames": records}, sort_keys=True,
                      separators=(",", ":")).encode()
