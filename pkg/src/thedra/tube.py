"""Construction of T-hedral tubes from profile + trajectory data.

All builders return a structured vertex grid V[i][j] with trajectory index i
and profile index j.  Rows (fixed j) stay in horizontal planes, columns
(fixed i) in vertical planes, and every face is a planar trapezoid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geom import DEFAULT_TOL, GeometryError, QuadFace, Tolerance, planarity_deviation, rot2
from .section import DiscreteCrossSection, validate_discrete
from .trajectory import AxisTrajectory, PolylineTrajectory, PrismTrajectory


@dataclass(frozen=True)
class THedralTube:
    grid: np.ndarray                  # (I, J, 3)
    ttype: str                        # "I" | "II" | "III"
    closed_j: bool                    # profile polygon closed
    closed_i: bool = False            # trajectory closed (torus-like)
    profile2d: np.ndarray | None = None
    trajectory: object | None = None
    dense_axis: str | None = None     # None | "profile" | "trajectory"
    densities: tuple | None = None
    smooth_profile: object | None = None   # generating SmoothCrossSection, if any

    @property
    def shape(self):
        return self.grid.shape[:2]

    def profile_edges(self):
        """Profile edge vectors (x-run, z-run) taken from column 0."""
        col = self.grid[0]
        pts = np.vstack([col, col[:1]]) if self.closed_j else col
        d = np.diff(pts, axis=0)
        return np.stack([d[:, 0], d[:, 2]], axis=1)

    def faces(self):
        """Iterate (i, j, QuadFace) over all faces including closure rings."""
        I, J = self.shape
        ni = I if self.closed_i else I - 1
        nj = J if self.closed_j else J - 1
        for i in range(ni):
            i2 = (i + 1) % I
            for j in range(nj):
                j2 = (j + 1) % J
                yield i, j, QuadFace(np.array([
                    self.grid[i, j], self.grid[i2, j],
                    self.grid[i2, j2], self.grid[i, j2]]))

    def face_indices(self):
        I, J = self.shape
        ni = I if self.closed_i else I - 1
        nj = J if self.closed_j else J - 1
        out = []
        for i in range(ni):
            i2 = (i + 1) % I
            for j in range(nj):
                j2 = (j + 1) % J
                out.append((i * J + j, i2 * J + j, i2 * J + j2, i * J + j2))
        return out


def _as_profile_array(profile, tol):
    if isinstance(profile, DiscreteCrossSection):
        return np.asarray(profile.vertices, dtype=float), True
    P = np.asarray(profile, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2 or len(P) < 2:
        raise GeometryError("profile needs at least 2 planar points")
    return P, False


def _normalize_profile(P, tol):
    """Translate so the first vertex sits on the X-axis."""
    Q = P.copy()
    Q[:, 1] -= Q[0, 1]
    return Q


def build(profile, trajectory, ttype=None, tol: Tolerance = DEFAULT_TOL,
          validate_profile=True) -> THedralTube:
    """Build a tube (or open T-hedral patch) of type I, II, or III."""
    P, closed = _as_profile_array(profile, tol)
    P = _normalize_profile(P, tol)
    if closed and validate_profile:
        rep = validate_discrete(DiscreteCrossSection.from_points(P, tol), tol)
        if not rep.valid:
            raise GeometryError("profile fails the slope-class validation")
    if ttype is None:
        ttype = {PolylineTrajectory: "I", AxisTrajectory: "II",
                 PrismTrajectory: "III"}[type(trajectory)]
    if ttype == "I":
        grid = _grid_type_i(P, trajectory, tol)
    elif ttype == "II":
        grid = _grid_type_ii(P, trajectory, tol)
    elif ttype == "III":
        grid = _grid_type_iii(P, trajectory, tol)
    else:
        raise GeometryError(f"unknown tube type {ttype!r}")
    return THedralTube(grid, ttype, closed_j=closed,
                       closed_i=getattr(trajectory, "closed", False),
                       profile2d=P, trajectory=trajectory)


def _grid_type_i(P, traj: PolylineTrajectory, tol):
    if not isinstance(traj, PolylineTrajectory):
        raise GeometryError("type I needs a polyline trajectory")
    T = traj.points - traj.points[0] + np.array([P[0, 0], 0.0])
    d = np.diff(T, axis=0)
    lens = np.linalg.norm(d, axis=1)
    if np.any(np.abs(d[:, 1]) <= tol.eps_len * lens):
        raise GeometryError("degenerate projection: trajectory edge parallel to profile plane")
    I, J = len(T), len(P)
    grid = np.empty((I, J, 3))
    grid[:, :, 0] = T[:, 0][:, None] + (P[:, 0] - P[0, 0])[None, :]
    grid[:, :, 1] = T[:, 1][:, None]
    grid[:, :, 2] = P[:, 1][None, :]
    return grid


def _radial_coords(P, axis_x, tol):
    rho = P[:, 0] - axis_x
    span = max(1.0, float(np.max(np.abs(P))))
    if np.min(rho) > tol.eps_len * span:
        return rho
    if np.max(rho) < -tol.eps_len * span:
        return rho
    raise GeometryError("profile must not cross the axis plane")


def _grid_type_ii(P, traj: AxisTrajectory, tol):
    if not isinstance(traj, AxisTrajectory):
        raise GeometryError("type II needs an axis trajectory")
    rho = _radial_coords(P, traj.axis_x, tol)
    L, Th = traj.cumulative()
    I, J = len(L), len(P)
    grid = np.empty((I, J, 3))
    grid[:, :, 0] = traj.axis_x + (L * np.cos(Th))[:, None] * rho[None, :]
    grid[:, :, 1] = (L * np.sin(Th))[:, None] * rho[None, :]
    grid[:, :, 2] = P[:, 1][None, :]
    return grid


def _grid_type_iii(P, traj: PrismTrajectory, tol):
    if not isinstance(traj, PrismTrajectory):
        raise GeometryError("type III needs a prism trajectory")
    traj.validate(tol)
    I, J = traj.steps + 1, len(P)
    grid = np.empty((I, J, 3))
    grid[:, :, 2] = P[:, 1][None, :]
    col = P[:, 0].astype(float)
    coly = np.zeros(J)
    grid[0, :, 0], grid[0, :, 1] = col, coly
    for i in range(traj.steps):
        w = traj.prism[i]
        R = traj.factors[i] * rot2(traj.angles[i])
        xy = np.stack([col, coly], axis=1)
        xy = (xy - w) @ R.T + w
        col, coly = xy[:, 0], xy[:, 1]
        grid[i + 1, :, 0], grid[i + 1, :, 1] = col, coly
    return grid


def tube_invariant_report(tube: THedralTube, tol: Tolerance = DEFAULT_TOL):
    """Max violations of the structural invariants (planarity, trapezoids,
    row heights, column verticality)."""
    g = tube.grid
    I, J = tube.shape
    max_plan = 0.0
    max_trap = 0.0
    for _, _, f in tube.faces():
        max_plan = max(max_plan, planarity_deviation(f))
        a, b, c, d = f.corners
        u, v = b - a, c - d
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu > 0 and nv > 0:
            max_trap = max(max_trap, float(np.linalg.norm(np.cross(u / nu, v / nv))))
    row_dev = float(np.max(np.abs(g[:, :, 2] - g[0:1, :, 2]))) if I > 1 else 0.0
    col_dev = 0.0
    for i in range(I):
        xy = g[i, :, :2]
        d = xy - xy[0]
        if J >= 3:
            ref = None
            for k in range(1, J):
                if np.linalg.norm(d[k]) > 0:
                    ref = d[k] / np.linalg.norm(d[k])
                    break
            if ref is not None:
                col_dev = max(col_dev, float(np.max(np.abs(d[:, 0] * ref[1] - d[:, 1] * ref[0]))))
    return {"max_planarity": max_plan, "max_trapezoid_sin": max_trap,
            "max_row_height_dev": row_dev, "max_column_plane_dev": col_dev}


# ---------------------------------------------------------------------------
# Type conversion between the moving-axis and fixed-axis constructions


def map_phi(tube: THedralTube, tol: Tolerance = DEFAULT_TOL) -> THedralTube:
    """Map a type III tube to the type II tube with parallel corresponding edges.

    The pencil axis is placed at the stored source axis when the tube came out
    of map_phi_inverse, otherwise at the first prism vertex.
    """
    if tube.ttype != "III" or not isinstance(tube.trajectory, PrismTrajectory):
        raise GeometryError("map_phi expects a type III tube")
    traj = tube.trajectory
    axis_x = traj.phi_axis if traj.phi_axis is not None else float(traj.prism[0, 0])
    t2 = AxisTrajectory(axis_x, traj.angles, traj.factors)
    return build(_profile_of(tube), t2, "II", tol, validate_profile=False)


def map_phi_inverse(tube: THedralTube, prism, tol: Tolerance = DEFAULT_TOL) -> THedralTube:
    """Map a type II tube to a type III tube over the given prism polygon.

    The prism is a free input; it only has to be compatible with the pencil
    angles.  The source axis is recorded so map_phi round-trips exactly.
    """
    if tube.ttype != "II" or not isinstance(tube.trajectory, AxisTrajectory):
        raise GeometryError("map_phi_inverse expects a type II tube")
    src = tube.trajectory
    t3 = PrismTrajectory(np.asarray(prism, dtype=float), src.angles, src.factors,
                         phi_axis=src.axis_x)
    t3.validate(tol)
    return build(_profile_of(tube), t3, "III", tol, validate_profile=False)


def _profile_of(tube: THedralTube):
    if tube.closed_j:
        return DiscreteCrossSection.from_points(tube.profile2d, enforce_ccw=False)
    return tube.profile2d


# ---------------------------------------------------------------------------
# Semi-discrete sampling and closed-trajectory tubes


def sample_semi_discrete(profile, trajectory, ttype="I", profile_density=64,
                         trajectory_density=64, tol: Tolerance = DEFAULT_TOL) -> THedralTube:
    """Build a semi-discrete tube by densely sampling the smooth direction.

    A smooth profile gives the vertical kind (dense columns are developable
    strips); a smooth trajectory gives the horizontal kind.
    """
    from .smooth import SmoothCrossSection, SmoothTrajectory

    dense_axis = None
    densities = (profile_density, trajectory_density)
    smooth_prof = None
    if isinstance(profile, SmoothCrossSection):
        if profile_density < 2:
            raise GeometryError("density must be at least 2")
        prof = profile.sample_polyline(profile_density)
        prof = DiscreteCrossSection.from_points(prof, tol, enforce_ccw=False)
        dense_axis = "profile"
        smooth_prof = profile
    else:
        prof = profile
    if isinstance(trajectory, SmoothTrajectory):
        if trajectory_density < 2:
            raise GeometryError("density must be at least 2")
        traj = PolylineTrajectory(trajectory.sample(trajectory_density))
        if dense_axis == "profile":
            raise GeometryError("only one direction may be smooth in a semi-discrete tube")
        dense_axis = "trajectory"
    else:
        traj = trajectory
    tube = build(prof, traj, ttype, tol, validate_profile=False)
    return replace(tube, dense_axis=dense_axis, densities=densities,
                   smooth_profile=smooth_prof)


def build_closed_trajectory_tube(profile, trajectory: PolylineTrajectory,
                                 tol: Tolerance = DEFAULT_TOL) -> THedralTube:
    """Torus-like type I tube closed along the trajectory as well.

    Closure must survive the fold: trajectory edges grouped by the absolute
    angle to the X-axis need vanishing oriented transverse sums, mirroring the
    profile condition under the translational fold law.
    """
    P, closed = _as_profile_array(profile, tol)
    if not closed:
        raise GeometryError("closed-trajectory tubes need a closed profile")
    T = np.asarray(trajectory.points, dtype=float)
    if len(T) < 3:
        raise GeometryError("closed trajectory needs at least 3 vertices")
    scale = max(1.0, float(np.max(np.abs(T))))
    if np.linalg.norm(T[-1] - T[0]) <= tol.eps_len * scale * 10:
        T = T[:-1]
    if len(T) < 3:
        raise GeometryError("closed trajectory needs at least 3 edges")
    report = trajectory_closure_report(T, tol)
    if not report["valid"]:
        raise GeometryError(
            "trajectory closure does not survive folding; offending classes: "
            f"{report['offending']}")
    ctraj = PolylineTrajectory(T, closed=True)
    tube = build(profile, ctraj, "I", tol)
    return replace(tube, closed_i=True)


def trajectory_closure_report(T, tol: Tolerance = DEFAULT_TOL):
    """Per-class oriented transverse sums for a closed base-plane polyline."""
    E = np.diff(np.vstack([T, T[:1]]), axis=0)
    lens = np.linalg.norm(E, axis=1)
    perim = float(lens.sum())
    ang = np.arctan2(np.abs(E[:, 1]), np.abs(E[:, 0]))   # |angle to X-axis|
    order = np.argsort(ang)
    groups = []
    for k in order:
        if groups and ang[k] - ang[groups[-1][-1]] <= tol.eps_angle:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])
    classes = []
    offending = []
    for g in groups:
        s = float(sum(np.sign(E[k, 1]) * lens[k] for k in g))
        classes.append({"angle_deg": math.degrees(float(np.median(ang[g]))),
                        "members": list(g), "oriented_sum": s})
        if abs(s) > tol.eps_len * perim * 10:
            offending.append(len(classes) - 1)
    return {"classes": classes, "offending": offending, "valid": not offending}
