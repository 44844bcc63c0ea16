"""One-parameter isometric deformation of profiles and tubes.

A profile edge with X-run dx and length s deforms to (t*dx, sign * sqrt(s^2 -
t^2 dx^2)): the horizontal run scales by the fold parameter t while the edge
keeps its length.  Everything else follows from requiring all edge lengths and
face diagonals of the vertex grid to be preserved:

* type I   -- trajectory X-runs scale by 1/t, transverse runs adjust;
* type II  -- cumulative radial factors L_i become mu_i = sqrt(L_i^2 - 1 + t^2)
              and the step angles satisfy
              cos theta*_i = ((t^2 - 1) + L_{i-1} L_i cos theta_i) / (mu_{i-1} mu_i);
* type III -- same scalars as type II, with each prism vertex pinned to its
              (fold-invariant) profile coordinate on the carrying line.

The reference configuration is t = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geom import (DEFAULT_TOL, FoldRangeError, GeometryError, QuadFace, T_MAX_CAP,
                   Tolerance, planarity_deviation, rot2)
from .section import DiscreteCrossSection, ProfileSegment, slope_classes
from .trajectory import AxisTrajectory, PolylineTrajectory, PrismTrajectory
from .tube import THedralTube


def deform_segment(seg: ProfileSegment, t: float):
    """Deformed (X-run, Z-run) of one profile segment at fold parameter t."""
    if t < 0:
        raise FoldRangeError("fold parameter must be non-negative", t=t)
    dx, _ = seg.displacement()
    s = seg.length
    rest = s * s - t * t * dx * dx
    if rest < -1e-12 * s * s:
        raise FoldRangeError("beyond flexion limit", t=t, feature="row-horizontal")
    return np.array([t * dx, seg.z_sign * math.sqrt(max(rest, 0.0))])


def _deform_edges(edges, t, what="profile"):
    """Vectorized edge law; raises FoldRangeError naming the binding edge.

    Rests within rounding of zero snap exactly to the flexion limit so that
    edges binding simultaneously (classmates) flatten consistently and the
    profile closure survives at the very end of the range.
    """
    E = np.asarray(edges, dtype=float)
    dx, dz = E[:, 0], E[:, 1]
    s2 = dx * dx + dz * dz
    run2 = t * t * dx * dx
    rest = s2 - run2
    snap = 64 * np.finfo(float).eps * (s2 + run2)
    bad = rest < -snap
    if np.any(bad):
        raise FoldRangeError("beyond flexion limit", t=t, feature="row-horizontal",
                             index=int(np.flatnonzero(bad)[0]))
    rest = np.where(np.abs(rest) <= snap, 0.0, np.maximum(rest, 0.0))
    return np.stack([t * dx, np.sign(dz) * np.sqrt(rest)], axis=1)


def _deform_trajectory_edges(edges, t):
    """Type I trajectory law: X-runs scale by 1/t, lengths preserved."""
    E = np.asarray(edges, dtype=float)
    ux, uy = E[:, 0], E[:, 1]
    r2 = ux * ux + uy * uy
    if t <= 0:
        raise FoldRangeError("fold parameter must be positive for type I", t=t)
    sx = ux / t
    rest = r2 - sx * sx
    snap = 64 * np.finfo(float).eps * (r2 + sx * sx)
    bad = rest < -snap
    if np.any(bad):
        raise FoldRangeError("beyond flexion limit", t=t, feature="column-flat",
                             index=int(np.flatnonzero(bad)[0]))
    rest = np.where(np.abs(rest) <= snap, 0.0, np.maximum(rest, 0.0))
    return np.stack([sx, np.sign(uy) * np.sqrt(rest)], axis=1)


def fold_closure_gap(cs: DiscreteCrossSection, t, tol: Tolerance = DEFAULT_TOL):
    """Norm of the deformed profile's closure defect; the validator's oracle."""
    gap = _deform_edges(cs.edge_vectors(), t).sum(axis=0)
    return float(np.linalg.norm(gap))


@dataclass(frozen=True)
class FoldRange:
    t_min: float
    t_max: float
    feature_min: tuple | None      # (kind, index) limiting the lower end
    feature_max: tuple | None
    notes: tuple = ()

    def contains(self, t, slack=1e-9):
        return self.t_min - slack <= t <= self.t_max + slack


def _profile_edge_array(tube: THedralTube):
    return tube.profile_edges()


def fold_range(tube: THedralTube, tol: Tolerance = DEFAULT_TOL) -> FoldRange:
    """Admissible fold interval and the feature binding at each end."""
    E = _profile_edge_array(tube)
    s = np.linalg.norm(E, axis=1)
    adx = np.abs(E[:, 0])
    notes = []
    with np.errstate(divide="ignore"):
        caps = np.where(adx > tol.eps_len * s, s / np.where(adx == 0, 1.0, adx), np.inf)
    j = int(np.argmin(caps))
    if math.isinf(caps[j]):
        t_max, feature_max = T_MAX_CAP, ("unbounded", -1)
    else:
        t_max, feature_max = float(caps[j]), ("row-horizontal", j)
    if abs(t_max - 1.0) <= 1e-9:
        notes.append("touches flexion limit at reference")

    t_min, feature_min = 0.0, None
    traj = tube.trajectory
    if tube.ttype == "I" and isinstance(traj, PolylineTrajectory):
        U = traj.edge_vectors()
        r = np.linalg.norm(U, axis=1)
        ratios = np.abs(U[:, 0]) / r
        i = int(np.argmax(ratios))
        if ratios[i] > tol.eps_len:
            t_min, feature_min = float(ratios[i]), ("column-flat", i)
    elif tube.ttype in ("II", "III"):
        if isinstance(traj, AxisTrajectory):
            L = np.concatenate([[1.0], np.cumprod(traj.factors)])
            th = np.asarray(traj.angles)
        else:
            L = np.concatenate([[1.0], np.cumprod(traj.factors)])
            th = np.asarray(traj.angles)
        worst, arg = 0.0, None
        for i in range(len(th)):
            La, Lb = L[i], L[i + 1]
            m2 = La * La + Lb * Lb - 2 * La * Lb * math.cos(th[i])
            b = 1.0 - (La * Lb * math.sin(th[i])) ** 2 / m2
            for cand in (b, 1.0 - Lb * Lb):
                if cand > worst:
                    worst, arg = cand, i
        if worst > 0:
            t_min, feature_min = math.sqrt(worst), ("column-flat", arg)
    return FoldRange(t_min, t_max, feature_min, feature_max, tuple(notes))


@dataclass(frozen=True)
class FoldState:
    t: float
    grid: np.ndarray
    factors: dict
    max_edge_dev: float
    max_planarity: float
    closure_gap: float
    closure_gap_trajectory: float = 0.0


@dataclass(frozen=True)
class IsometryReport:
    max_edge_dev: float
    max_diag_dev: float
    max_planarity: float

    @property
    def max_dev(self):
        return max(self.max_edge_dev, self.max_diag_dev)


def _grid_edge_sets(tube: THedralTube):
    I, J = tube.shape
    g = tube.grid
    rows = []
    ni = I if tube.closed_i else I - 1
    nj = J if tube.closed_j else J - 1
    for i in range(ni):
        rows.append((np.arange(J) + i * J, np.arange(J) + ((i + 1) % I) * J))
    cols = []
    for j in range(nj):
        cols.append((np.arange(I) * J + j, np.arange(I) * J + (j + 1) % J))
    return rows, cols


def certify_isometry(tube: THedralTube, state, tol: Tolerance = DEFAULT_TOL) -> IsometryReport:
    """Max relative deviation over all edges and both face diagonals, plus the
    worst planarity of the deformed faces.  Independent of how the state was
    produced."""
    grid = state.grid if isinstance(state, FoldState) else np.asarray(state, dtype=float)
    if grid.shape != tube.grid.shape:
        raise GeometryError("grid dimension mismatch")
    ref = tube.grid.reshape(-1, 3)
    cur = grid.reshape(-1, 3)
    rows, cols = _grid_edge_sets(tube)
    max_edge = 0.0
    for a, b in rows + cols:
        lr = np.linalg.norm(ref[b] - ref[a], axis=1)
        lc = np.linalg.norm(cur[b] - cur[a], axis=1)
        max_edge = max(max_edge, float(np.max(np.abs(lc - lr) / lr)))
    max_diag = 0.0
    max_plan = 0.0
    for quad in tube.face_indices():
        a, b, c, d = quad
        for p, q in ((a, c), (b, d)):
            lr = np.linalg.norm(ref[q] - ref[p])
            lc = np.linalg.norm(cur[q] - cur[p])
            max_diag = max(max_diag, abs(lc - lr) / lr)
        max_plan = max(max_plan, planarity_deviation(cur[[a, b, c, d]]))
    return IsometryReport(max_edge, max_diag, max_plan)


def _check_range(tube, t, tol):
    fr = fold_range(tube, tol)
    if not fr.contains(t, slack=1e-9 * max(1.0, t)):
        end = fr.feature_max if t > fr.t_max else fr.feature_min
        raise FoldRangeError(
            f"fold parameter {t} outside admissible range [{fr.t_min}, {fr.t_max}]",
            t=t, feature=None if end is None else end[0],
            index=None if end is None else end[1])
    return fr


def fold(tube: THedralTube, t: float, tol: Tolerance = DEFAULT_TOL) -> FoldState:
    """Deform the tube isometrically to fold parameter t (reference t = 1)."""
    _check_range(tube, t, tol)
    if tube.ttype == "I":
        grid, factors, gaps = _fold_type_i(tube, t)
    elif tube.ttype == "II":
        grid, factors, gaps = _fold_type_ii(tube, t)
    elif tube.ttype == "III":
        grid, factors, gaps = _fold_type_iii(tube, t)
    else:
        raise GeometryError(f"unknown tube type {tube.ttype!r}")
    rep = certify_isometry(tube, grid, tol)
    return FoldState(t, grid, factors, rep.max_dev, rep.max_planarity,
                     gaps[0], gaps[1])


def _profile_star(tube, t):
    """Deformed profile vertex coordinates (x*, z*) and the closure gap."""
    P = tube.profile2d
    if tube.closed_j:
        edges = np.diff(np.vstack([P, P[:1]]), axis=0)
    else:
        edges = np.diff(P, axis=0)
    ds = _deform_edges(edges, t)
    n_v = len(P)
    x = P[0, 0] + np.concatenate([[0.0], np.cumsum(ds[:n_v - 1, 0])])
    z = np.concatenate([[0.0], np.cumsum(ds[:n_v - 1, 1])])
    gap = float(np.linalg.norm(ds.sum(axis=0))) if tube.closed_j else 0.0
    return x, z, gap


def _fold_type_i(tube, t):
    px, pz, pgap = _profile_star(tube, t)
    traj = tube.trajectory
    U = traj.edge_vectors()
    du = _deform_trajectory_edges(U, t)
    I = len(traj.points)
    tx = px[0] + np.concatenate([[0.0], np.cumsum(du[:I - 1, 0])])
    ty = np.concatenate([[0.0], np.cumsum(du[:I - 1, 1])])
    tgap = float(np.linalg.norm(du.sum(axis=0))) if tube.closed_i else 0.0
    grid = np.empty((I, len(px), 3))
    grid[:, :, 0] = tx[:, None] + (px - px[0])[None, :]
    grid[:, :, 1] = ty[:, None]
    grid[:, :, 2] = pz[None, :]
    return grid, {"type": "I", "trajectory_x_scale": 1.0 / t}, (pgap, tgap)


def _mu_theta_star(traj, t):
    L = np.concatenate([[1.0], np.cumprod(traj.factors)])
    mu2 = L * L - 1.0 + t * t
    if np.any(mu2 < -1e-12):
        raise FoldRangeError("beyond flexion limit", t=t, feature="column-flat",
                             index=int(np.flatnonzero(mu2 < -1e-12)[0]))
    mu = np.sqrt(np.maximum(mu2, 0.0))
    th = np.asarray(traj.angles, dtype=float)
    La, Lb = L[:-1], L[1:]
    cos_star = ((t * t - 1.0) + La * Lb * np.cos(th)) / (mu[:-1] * mu[1:])
    if np.any(np.abs(cos_star) > 1 + 1e-9):
        raise FoldRangeError("beyond flexion limit", t=t, feature="column-flat",
                             index=int(np.flatnonzero(np.abs(cos_star) > 1 + 1e-9)[0]))
    # sin(theta*) has its own smooth closed form; going through arccos alone
    # would lose half the precision at the column-flat end of the range
    m2 = La * La + Lb * Lb - 2 * La * Lb * np.cos(th)
    sin2 = (La * Lb * np.sin(th)) ** 2 + (t * t - 1.0) * m2
    sin_star = np.sqrt(np.maximum(sin2, 0.0)) / (mu[:-1] * mu[1:])
    # the rotation sense of each step persists inside the admissible range
    theta_star = np.sign(th) * np.arctan2(sin_star, cos_star)
    return L, mu, theta_star


def _fold_type_ii(tube, t):
    L, mu, th_star = _mu_theta_star(tube.trajectory, t)
    return _fold_type_ii_core(tube, t, mu, th_star)


def _fold_type_ii_core(tube, t, mu, th_star):
    _, pz, pgap = _profile_star(tube, t)
    traj = tube.trajectory
    # radial coordinates scale through mu (mu_0 = t covers the profile scaling)
    rho = tube.profile2d[:, 0] - traj.axis_x
    Th = np.concatenate([[0.0], np.cumsum(th_star)])
    I, J = len(mu), len(rho)
    grid = np.empty((I, J, 3))
    grid[:, :, 0] = traj.axis_x + (mu * np.cos(Th))[:, None] * rho[None, :]
    grid[:, :, 1] = (mu * np.sin(Th))[:, None] * rho[None, :]
    grid[:, :, 2] = pz[None, :]
    return grid, {"type": "II", "mu": mu, "theta_star": th_star,
                  "axis_x": traj.axis_x}, (pgap, 0.0)


def _fold_type_iii(tube, t):
    L, mu, th_star = _mu_theta_star(tube.trajectory, t)
    return _fold_type_iii_core(tube, t, mu, th_star)


def _fold_type_iii_core(tube, t, mu, th_star):
    px, pz, pgap = _profile_star(tube, t)
    traj = tube.trajectory
    a = traj.axis_params()
    S = traj.steps
    I, J = S + 1, len(px)
    grid = np.empty((I, J, 3))
    grid[:, :, 2] = pz[None, :]
    col = np.stack([px, np.zeros(J)], axis=1)
    grid[0, :, 0], grid[0, :, 1] = col[:, 0], col[:, 1]
    # axis offsets scale with the profile: distances to the axis go to t*(x - a)
    w = np.array([px[0] + t * (a[0] - tube.profile2d[0, 0]), 0.0])
    e = np.array([1.0, 0.0])
    prism_star = [w.copy()]
    for k in range(S):
        R = rot2(th_star[k])
        e = R @ e
        lam = mu[k + 1] / mu[k] if mu[k] > 0 else 0.0
        col = (col - w) @ (lam * R).T + w
        grid[k + 1, :, 0], grid[k + 1, :, 1] = col[:, 0], col[:, 1]
        if k + 1 < S:
            w = w + mu[k + 1] * (a[k + 1] - a[k]) * e
            prism_star.append(w.copy())
    return grid, {"type": "III", "mu": mu, "theta_star": th_star,
                  "prism_star": np.array(prism_star)}, (pgap, 0.0)


def fold_with_scalars(tube: THedralTube, mu, th_star,
                      tol: Tolerance = DEFAULT_TOL) -> FoldState:
    """Deform a pencil or prism tube from prescribed strip scalars.

    mu are the deformed cumulative radial factors (mu[0] is the profile fold
    parameter t) and th_star the signed deformed step angles.  Unlike fold()
    this follows switched working modes, where some step angles have flipped
    sign relative to the reference; the caller owns the validity of the
    scalars and reads the certified residuals off the returned state.
    """
    mu = np.asarray(mu, dtype=float)
    th_star = np.asarray(th_star, dtype=float)
    t = float(mu[0])
    if tube.ttype == "II":
        grid, factors, gaps = _fold_type_ii_core(tube, t, mu, th_star)
    elif tube.ttype == "III":
        grid, factors, gaps = _fold_type_iii_core(tube, t, mu, th_star)
    else:
        raise GeometryError("fold_with_scalars expects a pencil or prism tube")
    rep = certify_isometry(tube, grid, tol)
    return FoldState(t, grid, factors, rep.max_dev, rep.max_planarity,
                     gaps[0], gaps[1])


# ---------------------------------------------------------------------------
# Switching at flexion limits


@dataclass(frozen=True)
class SwitchState:
    kind: str                      # "horizontal" | "vertical"
    flipped_classes: tuple         # class representative angles (deg) flipped
    segment_signs: dict            # profile segment index -> post-switch z_sign
    label: str
    theoretical: bool = False
    warning: str | None = None


def switching_states(tube: THedralTube, limit_end: str,
                     tol: Tolerance = DEFAULT_TOL):
    """Enumerate working-mode branches at a flexion limit.

    Horizontal limits flip whole slope classes (all-or-nothing keeps the class
    sums zero); vertical limits are listed but flagged as theoretical since the
    flipped tube self-intersects.
    """
    fr = fold_range(tube, tol)
    feature = {"max": fr.feature_max, "min": fr.feature_min}.get(limit_end)
    if feature is None:
        raise GeometryError(f"limit_end must be 'min' or 'max' with a finite limit, "
                            f"got {limit_end!r}")
    kind, _ = feature
    if kind == "unbounded":
        raise GeometryError("tube has no flexion limit at this end")
    if kind == "column-flat":
        return [
            SwitchState("vertical", (), {}, "fold back", theoretical=True,
                        warning="vertical switching causes self-intersection"),
            SwitchState("vertical", (), {}, "flip column through", theoretical=True,
                        warning="vertical switching causes self-intersection"),
        ]
    t_end = fr.t_max if limit_end == "max" else fr.t_min
    E = tube.profile_edges()
    segs = [ProfileSegment.from_edge(dx, dz, tol) for dx, dz in E]
    groups = slope_classes(segs, tol)
    binding = []
    for g in groups:
        c = abs(math.cos(segs[g[0]].slope))
        if c > 0 and abs(t_end * c - 1.0) <= 1e-7:
            binding.append(g)
    if not binding:
        raise GeometryError("tube is not at a horizontal flexion limit at this end")
    states = []
    for mask in range(2 ** len(binding)):
        signs = {k: s.z_sign for k, s in enumerate(segs)}
        flipped = []
        for b, g in enumerate(binding):
            if mask >> b & 1:
                flipped.append(round(math.degrees(segs[g[0]].abs_slope), 6))
                for k in g:
                    signs[k] = -signs[k]
        if mask == 0:
            label = "fold back"
        elif mask == 2 ** len(binding) - 1:
            label = "flip through"
        else:
            label = "partial flip"
        states.append(SwitchState("horizontal", tuple(flipped), signs, label))
    return states


# ---------------------------------------------------------------------------
# Reinterpreting a fold state as a new reference tube


def reference_from_state(tube: THedralTube, state: FoldState,
                         tol: Tolerance = DEFAULT_TOL) -> THedralTube:
    """Rebuild generating data from a deformed grid so the family composes."""
    g = state.grid
    prof = np.stack([g[0, :, 0], g[0, :, 2]], axis=1)
    if tube.ttype == "I":
        traj = PolylineTrajectory(g[:, 0, :2].copy(),
                                  closed=getattr(tube.trajectory, "closed", False))
        return replace(tube, grid=g, profile2d=prof, trajectory=traj)
    if tube.ttype == "II":
        ax = tube.trajectory.axis_x
        rel = g[:, 0, :2] - np.array([ax, 0.0])
        r = np.linalg.norm(rel, axis=1)
        ang = np.arctan2(rel[:, 1], rel[:, 0])
        ang = np.unwrap(ang - ang[0])
        traj = AxisTrajectory(ax, tuple(np.diff(ang)), tuple(r[1:] / r[:-1]))
        return replace(tube, grid=g, profile2d=prof, trajectory=traj)
    if tube.ttype == "III":
        mu = state.factors["mu"]
        traj = PrismTrajectory(state.factors["prism_star"],
                               tuple(state.factors["theta_star"]),
                               tuple(mu[1:] / mu[:-1]))
        return replace(tube, grid=g, profile2d=prof, trajectory=traj)
    raise GeometryError(f"unknown tube type {tube.ttype!r}")
