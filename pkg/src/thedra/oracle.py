"""Brute-force fold oracle: solve the constraint system directly.

Unknowns are all vertex coordinates of the deformed grid.  Equations are every
edge length, both diagonals of every face, row-height equality, top-view
column collinearity, a drive equation pinning the first profile X-run to
t * (reference run), and gauge constraints killing the rigid motions.  The
system is solved by damped least-squares continuation from the reference
configuration at t = 1, independently of the closed-form fold laws.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from .geom import DEFAULT_TOL, GeometryError, Tolerance
from .tube import THedralTube
from .fold import _grid_edge_sets


class _System:
    def __init__(self, tube: THedralTube):
        self.tube = tube
        I, J = tube.shape
        self.I, self.J = I, J
        ref = tube.grid.reshape(-1, 3)
        rows, cols = _grid_edge_sets(tube)
        pairs = []
        for a, b in rows + cols:
            pairs.extend(zip(a.tolist(), b.tolist()))
        for quad in tube.face_indices():
            a, b, c, d = quad
            pairs.append((a, c))
            pairs.append((b, d))
        self.pairs = np.array(pairs)
        self.ref_len = np.linalg.norm(ref[self.pairs[:, 1]] - ref[self.pairs[:, 0]], axis=1)
        # drive on the first profile edge with a genuine X-run
        E = tube.profile_edges()
        drive = next((j for j in range(len(E)) if abs(E[j, 0]) > 1e-9), None)
        if drive is None:
            raise GeometryError("oracle needs a profile edge with nonzero X-run")
        self.drive_j = drive
        self.drive_run = float(E[drive, 0])
        self.ref = ref

    def residuals(self, x, t):
        I, J = self.I, self.J
        g = x.reshape(-1, 3)
        out = []
        d = g[self.pairs[:, 1]] - g[self.pairs[:, 0]]
        # squared lengths keep every residual polynomial (complex-step safe)
        out.append((d * d).sum(axis=1) - self.ref_len ** 2)
        # rows stay in horizontal planes
        z = g[:, 2].reshape(I, J)
        out.append((z[1:, :] - z[0:1, :]).ravel())
        # top views of columns stay collinear (vertical column planes)
        if J >= 3:
            col = []
            for i in range(I):
                xy = g[i * J:(i + 1) * J, :2]
                v = xy[1:] - xy[0]
                col.append(v[:-1, 0] * v[1:, 1] - v[:-1, 1] * v[1:, 0])
            out.append(np.concatenate(col))
        # drive: the chosen profile X-run scales by t
        j = self.drive_j
        j2 = (j + 1) % J
        out.append(np.array([g[j2, 0] - g[j, 0] - t * self.drive_run]))
        # gauge: pin the first vertex and the profile plane y = 0
        out.append(g[0] - self.ref[0])
        out.append(g[:J, 1])
        return np.concatenate(out)


def continuation_fold(tube: THedralTube, t, steps=None, tol: Tolerance = DEFAULT_TOL):
    """Deformed grid at parameter t from the constraint solver alone."""
    sys_ = _System(tube)
    x = tube.grid.reshape(-1).copy()
    if steps is None:
        steps = max(2, int(abs(t - 1.0) / 0.08) + 1)
    for tk in np.linspace(1.0, t, steps + 1)[1:]:
        res = least_squares(sys_.residuals, x, args=(float(tk),), method="trf",
                            jac="cs", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=400)
        x = res.x
    final = np.max(np.abs(sys_.residuals(x, float(t))))
    if final > 1e-9:
        raise GeometryError(f"continuation did not converge (residual {final:.2e})")
    return x.reshape(tube.grid.shape)
