"""Report rendering: fold-sequence figures and delimited residual tables."""
from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Poly3DCollection  # noqa: E402
import numpy as np  # noqa: E402


def render_mesh_png(path, grid, face_indices, title=None):
    V = np.asarray(grid, dtype=float).reshape(-1, 3)
    polys = [V[list(q)] for q in face_indices]
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(111, projection="3d")
    pc = Poly3DCollection(polys, facecolor="#7fb2d9", edgecolor="k",
                          linewidths=0.6, alpha=0.92)
    ax.add_collection3d(pc)
    lo, hi = V.min(axis=0), V.max(axis=0)
    c = 0.5 * (lo + hi)
    r = max(float(np.max(hi - lo)) / 2, 1e-6)
    ax.set_xlim(c[0] - r, c[0] + r)
    ax.set_ylim(c[1] - r, c[1] + r)
    ax.set_zlim(c[2] - r, c[2] + r)
    ax.set_box_aspect((1, 1, 1))
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_residuals_csv(path, rows):
    """Delimited residual summary, one row per frame."""
    fields = ["frame", "t", "max_edge_dev", "max_planarity", "closure_gap",
              "closure_gap_trajectory", "at_limit"]
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in fields})


def render_sweep(outdir, prefix, frames, face_indices, plot=True):
    """PNG per frame alongside the residual table; returns written paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    rows = []
    for k, fr in enumerate(frames):
        rows.append({"frame": k, "t": fr["t"],
                     "max_edge_dev": fr["residuals"]["max_edge_dev"],
                     "max_planarity": fr["residuals"]["max_planarity"],
                     "closure_gap": fr["residuals"].get("closure_gap", 0.0),
                     "closure_gap_trajectory":
                         fr["residuals"].get("closure_gap_trajectory", 0.0),
                     "at_limit": fr["flags"].get("at_limit", False)})
        if plot:
            png = os.path.join(outdir, f"{prefix}_{k:04d}.png")
            grid = np.asarray(fr["vertices"]).reshape(fr["shape"] + [3])
            render_mesh_png(png, grid, face_indices, title=f"t = {fr['t']:.6f}")
            written.append(png)
    csv_path = os.path.join(outdir, f"{prefix}_residuals.csv")
    write_residuals_csv(csv_path, rows)
    written.append(csv_path)
    return written
