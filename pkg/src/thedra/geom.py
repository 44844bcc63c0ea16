"""Tolerance-governed planar and spatial primitives shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    """Invalid or degenerate geometric input."""


class FoldRangeError(GeometryError):
    """A fold parameter outside the admissible range.

    Carries the limiting feature so callers (CLI, HTTP service) can report
    which segment binds.
    """

    def __init__(self, message, t=None, feature=None, index=None):
        super().__init__(message)
        self.t = t
        self.feature = feature
        self.index = index


@dataclass(frozen=True)
class Tolerance:
    """Central tolerance knobs, threaded explicitly through every check.

    eps_len is relative to the local length scale, eps_plane is scaled by the
    bounding-box diagonal of the face under test, eps_angle is in radians.
    """

    eps_len: float = 1e-9
    eps_plane: float = 1e-9
    eps_angle: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.eps_len <= 1e-6):
            raise GeometryError("eps_len must be in (0, 1e-6]")
        if self.eps_plane <= 0.0 or self.eps_angle <= 0.0:
            raise GeometryError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()

# Cap used when a fold range is unbounded on the upper side.
T_MAX_CAP = 1.0e6


def vec(*xs):
    return np.array(xs, dtype=float)


def norm(v):
    return float(np.linalg.norm(v))


def unit(v):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise GeometryError("cannot normalize zero vector")
    return np.asarray(v, dtype=float) / n


def rot2(theta):
    """2x2 rotation matrix."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rot3_axis(axis, theta):
    """Rodrigues rotation about an arbitrary axis direction."""
    k = unit(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


@dataclass(frozen=True)
class RigidMotion:
    """Orientation-preserving (or reflecting) affine map p -> R p + t."""

    R: np.ndarray
    t: np.ndarray

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    def apply(self, pts):
        return np.asarray(pts, dtype=float) @ self.R.T + self.t

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        return RigidMotion(self.R @ other.R, self.R @ other.t + self.t)


def kabsch(src, dst, allow_reflection=False):
    """Best rigid motion mapping point set src onto dst (least squares)."""
    P = np.asarray(src, dtype=float)
    Q = np.asarray(dst, dtype=float)
    if P.shape != Q.shape or P.ndim != 2:
        raise GeometryError("kabsch needs two equal (n,3) point sets")
    cp, cq = P.mean(axis=0), Q.mean(axis=0)
    H = (P - cp).T @ (Q - cq)
    U, _, Vt = np.linalg.svd(H)
    D = np.eye(H.shape[0])
    if not allow_reflection and np.linalg.det(Vt.T @ U.T) < 0:
        D[-1, -1] = -1.0
    R = Vt.T @ D @ U.T
    return RigidMotion(R, cq - R @ cp)


def rigid_gap(src, dst, allow_reflection=False):
    """Max vertex distance after the best rigid alignment of src onto dst."""
    m = kabsch(src, dst, allow_reflection=allow_reflection)
    return float(np.max(np.linalg.norm(m.apply(src) - np.asarray(dst), axis=1)))


@dataclass(frozen=True)
class QuadFace:
    """Four corners in cyclic order A, B, C, D."""

    corners: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=float)
        if c.shape != (4, 3):
            raise GeometryError("QuadFace needs four 3D corners")
        if not np.all(np.isfinite(c)):
            raise GeometryError("QuadFace corners must be finite")
        object.__setattr__(self, "corners", c)

    def is_trapezoid(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """AB parallel to DC within eps_angle."""
        a, b, c, d = self.corners
        u, v = b - a, c - d
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            return False
        sin_angle = np.linalg.norm(np.cross(u / nu, v / nv))
        return bool(sin_angle <= tol.eps_angle)


def _collinear_triple(p, q, r, scale):
    area2 = np.linalg.norm(np.cross(q - p, r - p))
    return area2 <= 1e-14 * scale * scale


def planarity_deviation(face) -> float:
    """Scaled planarity of a quad.

    Maximum distance of a corner from the plane through the other three,
    divided by the diagonal (largest corner distance) of the face.  Using the
    intrinsic diagonal keeps the measure invariant under rigid motions.
    Degenerate faces (three collinear or coincident corners) report 0 by
    convention.
    """
    P = np.asarray(face.corners if isinstance(face, QuadFace) else face, dtype=float)
    if P.shape != (4, 3):
        raise GeometryError("planarity_deviation expects a quad")
    diag = max(float(np.linalg.norm(P[i] - P[j])) for i in range(4) for j in range(i + 1, 4))
    if diag == 0.0:
        return 0.0
    for i in range(4):
        o = [k for k in range(4) if k != i]
        if _collinear_triple(P[o[0]], P[o[1]], P[o[2]], diag):
            return 0.0
    worst = 0.0
    for i in range(4):
        o = [k for k in range(4) if k != i]
        n = np.cross(P[o[1]] - P[o[0]], P[o[2]] - P[o[0]])
        worst = max(worst, abs(np.dot(P[i] - P[o[0]], n / np.linalg.norm(n))))
    return worst / diag


def polyline_arclength(points) -> float:
    """Total length of a polyline; additive under concatenation."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2:
        raise GeometryError("polyline needs at least 2 points")
    return float(np.sum(np.linalg.norm(np.diff(P, axis=0), axis=1)))


def signed_area(poly2) -> float:
    """Shoelace area of a closed 2D polygon (vertices without repeat)."""
    P = np.asarray(poly2, dtype=float)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(p1, p2, q1, q2, eps):
    d1, d2 = p2 - p1, q2 - q1
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(den) < eps:
        return False
    r = q1 - p1
    s = (r[0] * d2[1] - r[1] * d2[0]) / den
    u = (r[0] * d1[1] - r[1] * d1[0]) / den
    return eps < s < 1 - eps and eps < u < 1 - eps


def polygon_is_simple(poly2, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when no two non-adjacent edges cross (interior crossings only)."""
    P = np.asarray(poly2, dtype=float)
    n = len(P)
    scale = max(1.0, float(np.max(np.abs(P))))
    eps = tol.eps_len * scale
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(P[i], P[(i + 1) % n], P[j], P[(j + 1) % n], eps):
                return False
    return True


def fit_plane(points):
    """Least-squares plane of a point cloud: returns (point, unit normal, max residual)."""
    P = np.asarray(points, dtype=float)
    c = P.mean(axis=0)
    _, _, Vt = np.linalg.svd(P - c)
    n = Vt[-1]
    res = float(np.max(np.abs((P - c) @ n))) if len(P) else 0.0
    return c, n, res
