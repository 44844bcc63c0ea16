"""Trajectory data for the three kinematic tube types.

Type I sweeps the profile by translations along a base-plane polyline.
Type II composes per-step rotations and radial dilatations about one fixed
vertical axis.  Type III does the same about a moving axis through each prism
polygon vertex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import DEFAULT_TOL, GeometryError, Tolerance, rot2


@dataclass(frozen=True)
class PolylineTrajectory:
    """Type I: planar polyline in the base plane."""

    points: np.ndarray       # (I, 2)
    closed: bool = False

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 2:
            raise GeometryError("trajectory needs at least 2 planar points")
        d = np.diff(P, axis=0)
        if np.any(np.linalg.norm(d, axis=1) == 0.0):
            raise GeometryError("degenerate trajectory: zero-length edge")
        object.__setattr__(self, "points", np.ascontiguousarray(P))

    @property
    def steps(self):
        return len(self.points) - 1

    def edge_vectors(self):
        P = self.points
        if self.closed:
            return np.diff(np.vstack([P, P[:1]]), axis=0)
        return np.diff(P, axis=0)


@dataclass(frozen=True)
class AxisTrajectory:
    """Type II: stationary vertical axis at (axis_x, 0) plus per-step data."""

    axis_x: float
    angles: tuple            # theta_i in radians, nonzero, |theta_i| < pi
    factors: tuple           # dilatation factors > 0

    def __post_init__(self):
        ang = tuple(float(a) for a in self.angles)
        fac = tuple(float(f) for f in self.factors)
        if len(ang) != len(fac) or not ang:
            raise GeometryError("angles and factors must be equal-length, non-empty")
        if any(not (0.0 < abs(a) < math.pi) for a in ang):
            raise GeometryError("rotation angles must be nonzero with |angle| < pi; "
                                "alternating senses are allowed for zip-row rims")
        if any(f <= 0.0 for f in fac):
            raise GeometryError("dilatation factors must be positive")
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "factors", fac)

    @property
    def steps(self):
        return len(self.angles)

    def cumulative(self):
        """Cumulative factors L_i and angles Theta_i, index 0 = reference."""
        L = np.concatenate([[1.0], np.cumprod(self.factors)])
        Th = np.concatenate([[0.0], np.cumsum(self.angles)])
        return L, Th


@dataclass(frozen=True)
class PrismTrajectory:
    """Type III: per-step stretch rotation about the vertical line through each
    prism vertex.  The first prism vertex must lie on the X-axis; each later one
    must lie on the profile-plane line produced by the preceding steps."""

    prism: np.ndarray        # (steps, 2) axis points in the base plane
    angles: tuple
    factors: tuple
    phi_axis: float | None = field(default=None, compare=False)

    def __post_init__(self):
        W = np.asarray(self.prism, dtype=float)
        ang = tuple(float(a) for a in self.angles)
        fac = tuple(float(f) for f in self.factors)
        if W.ndim != 2 or W.shape[1] != 2 or len(W) != len(ang) or len(ang) != len(fac):
            raise GeometryError("prism vertices, angles, and factors must align")
        if not ang:
            raise GeometryError("type III trajectory needs at least one step")
        if any(abs(math.sin(a)) < 1e-12 for a in ang):
            raise GeometryError("degenerate step: rotation angle multiple of pi")
        if any(f <= 0.0 for f in fac):
            raise GeometryError("dilatation factors must be positive")
        object.__setattr__(self, "prism", np.ascontiguousarray(W))
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "factors", fac)

    @property
    def steps(self):
        return len(self.angles)

    def validate(self, tol: Tolerance = DEFAULT_TOL):
        """Check the prism polygon against the pencil of profile-plane lines."""
        W = self.prism
        scale = max(1.0, float(np.max(np.abs(W))))
        if abs(W[0, 1]) > tol.eps_len * scale * 100:
            raise GeometryError("prism incompatible: first vertex must lie on the X-axis")
        e = np.array([1.0, 0.0])
        for i in range(self.steps):
            e = rot2(self.angles[i]) @ e
            if i + 1 < self.steps:
                d = W[i + 1] - W[i]
                if abs(e[0] * d[1] - e[1] * d[0]) > tol.eps_len * scale * 100:
                    raise GeometryError(
                        f"prism incompatible with pencil angles at vertex {i + 1}")

    def axis_params(self):
        """Axis positions in profile coordinates, plus alignment offsets.

        a[i] is the profile-plane coordinate of prism vertex i's axis on the
        line carrying column i; these coordinates are invariant under the fold.
        """
        W = self.prism
        a = [float(W[0, 0])]
        e = np.array([1.0, 0.0])
        L = 1.0
        for i in range(self.steps - 1):
            e = rot2(self.angles[i]) @ e
            L *= self.factors[i]
            delta = float(np.dot(W[i + 1] - W[i], e))
            a.append(a[-1] + delta / L)
        return a
