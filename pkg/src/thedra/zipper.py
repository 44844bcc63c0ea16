"""Zipper couplings: tubes glued along a zip row with non-parallel base planes.

The zip row's profile must be a straight segment, so the row belongs to a
cylinder (translational case) or to a cone (non-translational case).  For the
cylinder, any two cut planes whose intersection line is orthogonal to the
rulings keep cutting it in planar curves throughout the fold; for the cone,
the row has to wrap the cap of a plane-symmetric flexible octahedron and the
cut planes must be orthogonal to its symmetry plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .geom import (DEFAULT_TOL, GeometryError, RigidMotion, Tolerance, kabsch,
                   fit_plane, rot2, rot3_axis, unit)
from .fold import certify_isometry, fold, fold_range, fold_with_scalars
from .section import DiscreteCrossSection, validate_discrete
from .trajectory import AxisTrajectory, PolylineTrajectory
from .tube import THedralTube, build, map_phi_inverse


@dataclass
class ZipRow:
    kind: str                        # "cylindrical" | "bricard-cap"
    segment: np.ndarray              # (2, 3) straight profile piece at reference
    trajectory: np.ndarray | None = None   # cylindrical directrix polyline
    normals: tuple = ()              # base-plane normals of the zipped tubes
    cap: object | None = None        # BricardCap for the conical case


# ---------------------------------------------------------------------------
# Translational zipper


@dataclass
class ZipperPartner:
    tube: THedralTube
    placement: RigidMotion
    base_angle: float
    u_cut: np.ndarray               # material ruling parameters of its zip rim
    seg_len: float
    frame: tuple                    # (xhat, yhat, zhat) of its build frame


@dataclass
class TranslationalZipper:
    tube_a: THedralTube
    edge_a: int
    partners: list
    zip_row: ZipRow
    tol: Tolerance = field(default=DEFAULT_TOL)

    def joint_fold(self, t_a):
        return fold_translational_zipper(self, t_a)

    def common_range(self, margin=0.02):
        """Joint fold interval: fold-range intersection shrunk to the states
        every partner can actually match."""
        fr = fold_range(self.tube_a, self.tol)
        lo, hi = fr.t_min, fr.t_max
        for p in self.partners:
            fr_b = fold_range(p.tube, self.tol)
            lo, hi = max(lo, fr_b.t_min), min(hi, fr_b.t_max)
        span = hi - lo
        lo, hi = lo + margin * span, hi - margin * span

        def ok(t):
            try:
                self.joint_fold(float(t))
                return True
            except GeometryError:
                return False

        for _ in range(60):
            if ok(lo):
                break
            lo = lo + 0.05 * (1.0 - lo)
        for _ in range(60):
            if ok(hi):
                break
            hi = 1.0 + 0.95 * (hi - 1.0)
        if not (lo < hi):
            raise GeometryError("no common fold range for the zipped tubes")
        return lo, hi


@dataclass
class ZipperState:
    t_a: float
    grids: list                 # world-frame grids, tube A first
    placements: list
    t_partners: list
    max_edge_dev: float
    max_planarity: float
    max_zip_gap: float          # zip row from A vs from each partner
    base_dihedrals: list        # angle between base planes, per partner


def _perp_turn_angles(poly, d_hat):
    """Turning angles of the polyline projected orthogonally to the rulings."""
    E = np.diff(poly, axis=0)
    P = E - np.outer(E @ d_hat, d_hat)
    out = []
    for k in range(len(P) - 1):
        a, b = P[k], P[k + 1]
        cross = np.dot(np.cross(a, b), d_hat)
        out.append(math.atan2(cross, float(np.dot(a, b))))
    return np.array(out)


def _parallelogram_partner(d2, wing, seg_len):
    """Valid partner profile completing the shared segment to a parallelogram.

    `wing` is the free 2D side vector in the partner frame (any non-horizontal
    direction not parallel to the segment works)."""
    w = np.asarray(wing, dtype=float)
    if w.shape != (2,):
        raise GeometryError("auto partner needs a 2D wing vector in place of the "
                            "edge index")
    if abs(w[1]) < 1e-9 * np.linalg.norm(w):
        raise GeometryError("wing vector must not be horizontal")
    seg = seg_len * d2
    if abs(w[0] * seg[1] - w[1] * seg[0]) < 1e-9 * seg_len * np.linalg.norm(w):
        raise GeometryError("wing vector parallel to the shared segment")
    pts = np.array([[0.0, 0.0], w, w + seg, seg])
    return pts, float(seg_len)


def _embed_profile(profile_b, edge_b, d2, tol):
    """Rotate profile_b so edge_b lands on the shared line, end vertex at origin."""
    if isinstance(profile_b, DiscreteCrossSection):
        P = profile_b.vertices
    else:
        P = np.asarray(profile_b, dtype=float)
    n = len(P)
    e = P[(edge_b + 1) % n] - P[edge_b]
    L = float(np.linalg.norm(e))
    # align the edge direction with -d2 by a pure rotation (no reflection)
    ang = math.atan2(-d2[1], -d2[0]) - math.atan2(e[1], e[0])
    Q = P @ rot2(ang).T
    Q = Q - Q[(edge_b + 1) % n]
    return np.roll(Q, -(edge_b + 1), axis=0), L


def build_translational_zipper(profile_a, edge_a, trajectory, partners,
                               tol: Tolerance = DEFAULT_TOL) -> TranslationalZipper:
    """Zip one driving tube with one or more partner tubes along a shared row.

    partners: iterable of (profile, edge_index, base_angle_degrees); passing
    None as the profile completes the shared segment to a parallelogram, with
    the edge slot carrying the free side vector instead.  All base planes
    belong to the pencil through the line orthogonal to the rulings, and each
    partner profile has to be a valid cross-section in its own zip placement
    (rotating a general profile into place breaks the slope classes; only the
    parallelogram family survives arbitrary rotations).
    """
    from .smooth import SmoothCrossSection, SmoothTrajectory

    if isinstance(profile_a, SmoothCrossSection):
        raise GeometryError("zip profiles are discrete; sample smooth sections first")
    if isinstance(trajectory, SmoothTrajectory):
        trajectory = PolylineTrajectory(trajectory.sample(64))
    rep = validate_discrete(profile_a, tol)
    if not rep.valid:
        raise GeometryError("driving profile fails the slope-class validation")
    tube_a = build(profile_a, trajectory, "I", tol)
    J = len(profile_a.vertices)
    j0, j1 = edge_a, (edge_a + 1) % J
    Q0, Q1 = tube_a.grid[0, j0], tube_a.grid[0, j1]
    L_a = float(np.linalg.norm(Q1 - Q0))
    d_hat = (Q1 - Q0) / L_a
    r_a = tube_a.grid[:, j0]
    built = []
    for profile_b, edge_b, angle_deg in partners:
        if isinstance(profile_b, SmoothCrossSection):
            seg = profile_b.segments[edge_b]
            if seg.tag != "line":
                raise GeometryError(
                    "zip row profile must be a straight line-segment; "
                    f"segment {edge_b} is {seg.tag}")
            raise GeometryError("sample the smooth partner profile to a polyline first")
        if not (0.0 < angle_deg < 180.0):
            raise GeometryError("base-plane angle must lie in (0, 180) degrees")
        if isinstance(profile_b, DiscreteCrossSection):
            repb = validate_discrete(profile_b, tol)
            if not repb.valid:
                raise GeometryError("partner profile fails the slope-class validation")
        delta = math.radians(angle_deg)
        n_beta = rot3_axis([0.0, 1.0, 0.0], delta) @ np.array([0.0, 0.0, 1.0])
        dn = float(d_hat @ n_beta)
        if abs(dn) < 1e-9:
            raise GeometryError(
                "cut-plane pencil line not orthogonal to the rulings: the partner "
                "base plane contains the ruling direction")
        # partner frame: base plane beta through Q0, right-handed always
        yhat = np.array([0.0, 1.0, 0.0])
        xhat = unit(d_hat - dn * n_beta)
        zhat = np.cross(xhat, yhat)
        d2 = np.array([float(d_hat @ xhat), float(d_hat @ zhat)])
        if profile_b is None:
            prof2, L_b = _parallelogram_partner(d2, edge_b, L_a)
        else:
            prof2, L_b = _embed_profile(profile_b, edge_b, d2, tol)
        emb = DiscreteCrossSection.from_points(prof2, tol, enforce_ccw=False)
        if not validate_discrete(emb, tol).valid:
            raise GeometryError(
                "partner profile is not a valid cross-section in its zip "
                "placement; profiles must contain the shared segment at the "
                "slope induced by the base-plane angle")
        # partner trajectory: cut of the cylinder by its own base plane
        u_cut = -((r_a - Q0) @ zhat) / float(d_hat @ zhat)
        rim_b = r_a + u_cut[:, None] * d_hat
        tb2 = np.stack([(rim_b - Q0) @ xhat, (rim_b - Q0) @ yhat], axis=1)
        tube_b = build(DiscreteCrossSection.from_points(prof2, tol, enforce_ccw=False),
                       PolylineTrajectory(tb2), "I", tol, validate_profile=False)
        R = np.stack([xhat, yhat, zhat], axis=1)
        built.append(ZipperPartner(tube_b, RigidMotion(R, Q0.copy()),
                                   delta, u_cut, L_b, (xhat, yhat, zhat)))
    zr = ZipRow("cylindrical", np.stack([Q0, Q1]), r_a.copy(),
                tuple([np.array([0.0, 0.0, 1.0])] + [p.placement.R[:, 2] for p in built]))
    zp = TranslationalZipper(tube_a, edge_a, built, zr, tol)
    st = zp.joint_fold(1.0)
    scale = max(1.0, float(np.max(np.abs(tube_a.grid))))
    if st.max_zip_gap > 1e-8 * scale:
        raise GeometryError("zip row mismatch at reference")
    return zp


def _partner_t(partner: ZipperPartner, target_angle, tol):
    """Partner fold parameter matching the first perpendicular turn angle."""
    tube_b = partner.tube
    J = tube_b.shape[1]

    def angle_of(t_b):
        g = fold(tube_b, t_b, tol).grid
        d = g[0, J - 1] - g[0, 0]
        return _perp_turn_angles(g[:, 0], d / np.linalg.norm(d))[0]

    fr = fold_range(tube_b, tol)
    lo, hi = fr.t_min + 1e-9, fr.t_max - 1e-12
    f = lambda t: angle_of(t) - target_angle
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        ts = np.linspace(lo, hi, 33)
        vals = [f(float(tt)) for tt in ts]
        for k in range(32):
            if vals[k] * vals[k + 1] <= 0:
                lo, hi, flo, fhi = ts[k], ts[k + 1], vals[k], vals[k + 1]
                break
        else:
            raise GeometryError("no partner fold state matches the zip row")
    return float(brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))


def fold_translational_zipper(zp: TranslationalZipper, t_a) -> ZipperState:
    st_a = fold(zp.tube_a, t_a, zp.tol)
    J = zp.tube_a.shape[1]
    j0, j1 = zp.edge_a, (zp.edge_a + 1) % J
    r_star = st_a.grid[:, j0]
    d_star = st_a.grid[0, j1] - st_a.grid[0, j0]
    d_star = d_star / np.linalg.norm(d_star)
    target = _perp_turn_angles(r_star, d_star)
    grids = [st_a.grid]
    placements = [RigidMotion.identity()]
    tps, dihedrals = [], []
    max_dev = st_a.max_edge_dev
    max_plan = st_a.max_planarity
    zip_gap = 0.0
    for p in zp.partners:
        t_b = _partner_t(p, target[0], zp.tol)
        st_b = fold(p.tube, t_b, zp.tol)
        Jb = p.tube.shape[1]
        src = np.vstack([st_b.grid[:, 0], st_b.grid[:, Jb - 1]])
        dst = np.vstack([r_star + p.u_cut[:, None] * d_star,
                         r_star + (p.u_cut + p.seg_len)[:, None] * d_star])
        pl = kabsch(src, dst)
        gap = float(np.max(np.linalg.norm(pl.apply(src) - dst, axis=1)))
        zip_gap = max(zip_gap, gap)
        grids.append(pl.apply(st_b.grid.reshape(-1, 3)).reshape(st_b.grid.shape))
        placements.append(pl)
        tps.append(t_b)
        max_dev = max(max_dev, st_b.max_edge_dev)
        max_plan = max(max_plan, st_b.max_planarity)
        n_b = pl.R @ np.array([0.0, 0.0, 1.0])
        dihedrals.append(math.acos(min(1.0, abs(float(n_b[2])))))
    return ZipperState(t_a, grids, placements, tps, max_dev, max_plan, zip_gap,
                       dihedrals)


# ---------------------------------------------------------------------------
# Plane-symmetric flexible cap (conical zip rows)


@dataclass
class BricardCap:
    """Cap of a plane-symmetric flexible octahedron, wrapped by n zip faces.

    Rulings u1, u2 and their mirrors u3, u4 through the symmetry plane y = 0
    form a spherical four-bar with equal opposite links; its one-parameter
    motion is coordinatized by y1 = u1_y.
    """

    apex: np.ndarray
    n: int
    u1: np.ndarray
    u2: np.ndarray
    c12: float = field(init=False)
    c23: float = field(init=False)
    laterals: list = field(default_factory=list)     # (i, j, coeff_i, coeff_j)
    s_a: np.ndarray | None = None                    # |V A_k| material distances
    s_b: np.ndarray | None = None
    s_eq_a: np.ndarray | None = None                 # pure-ruling cut distances
    s_eq_b: np.ndarray | None = None
    y1_ref: float = field(init=False)

    def __post_init__(self):
        self.u1 = unit(self.u1)
        self.u2 = unit(self.u2)
        u3 = _mirror_y(self.u1)
        self.c12 = float(self.u1 @ self.u2)
        self.c23 = float(self.u2 @ u3)
        self.y1_ref = float(self.u1[1])

    def rulings(self, y1=None):
        """Unit rulings (u1..u4) at flexion coordinate y1 (reference when None)."""
        if y1 is None:
            u1, u2 = self.u1, self.u2
        else:
            u1, u2 = _solve_four_bar(self, y1)
        return np.stack([u1, u2, _mirror_y(u1), _mirror_y(u2)])


def _mirror_y(v):
    return np.array([v[0], -v[1], v[2]])


def _solve_four_bar(cap: BricardCap, y1):
    """Closed-form symmetric spherical four-bar at flexion coordinate y1."""
    if abs(y1) >= 1.0:
        raise GeometryError("flexion coordinate out of range")
    rho1 = math.sqrt(1.0 - y1 * y1)
    y2 = (cap.c12 - cap.c23) / (2.0 * y1)
    if abs(y2) >= 1.0:
        raise GeometryError("flexion stalled: partner ruling leaves the sphere")
    rho2 = math.sqrt(1.0 - y2 * y2)
    cosd = (cap.c12 + cap.c23) / (2.0 * rho1 * rho2)
    if abs(cosd) > 1.0:
        raise GeometryError("flexion stalled: face angles cannot close")
    # keep u1's horizontal direction fixed (gauge); u2 sits at +/- delta from it
    ref1 = cap.u1.copy()
    r1 = math.hypot(ref1[0], ref1[2])
    e1 = np.array([ref1[0], ref1[2]]) / r1
    delta = math.acos(max(-1.0, min(1.0, cosd)))
    ref2 = cap.u2
    e2r = np.array([ref2[0], ref2[2]])
    sgn = 1.0 if (e1[0] * e2r[1] - e1[1] * e2r[0]) >= 0 else -1.0
    e2 = rot2(sgn * delta) @ e1
    u1 = np.array([rho1 * e1[0], y1, rho1 * e1[1]])
    u2 = np.array([rho2 * e2[0], y2, rho2 * e2[1]])
    return u1, u2


def _lateral_dirs(cap: BricardCap, rulings):
    """Material lateral vectors (not normalized) for k = 0..n."""
    out = []
    for (i, j, ci, cj) in cap.laterals:
        out.append(ci * rulings[i] + cj * rulings[j])
    return out


def build_bricard_cap(n, apex_height=2.0, dir1=(0.35, 0.9), dir2=(1.15, 1.05),
                      beta_frac=0.45, beta_tilt_deg=12.0,
                      tol: Tolerance = DEFAULT_TOL) -> BricardCap:
    """Construct the cap and its two rim cuts.

    dir1/dir2 are (azimuth, polar) of the first two rulings (radians); the
    other two are their mirrors.  The lower rim lies in the base plane z = 0,
    the upper rim in a plane tilted about the y-direction by beta_tilt_deg.
    """
    if n < 3:
        raise GeometryError("cap needs at least 3 faces")
    V = np.array([0.0, 0.0, apex_height])

    def ruling(az, pol):
        return np.array([math.sin(pol) * math.cos(az),
                         math.sin(pol) * math.sin(az),
                         -math.cos(pol)])

    cap = BricardCap(V, n, ruling(*dir1), ruling(*dir2))
    R = cap.rulings()
    if np.any(R[:, 2] >= -1e-6):
        raise GeometryError("rulings must point below the apex")
    if R[0][1] * R[1][1] <= 0:
        raise GeometryError("first two rulings must lie on one side of the "
                            "symmetry plane")
    # material lateral sequence: the start cut balances y inside face (u4, u1)
    lats = [(3, 0, abs(R[0][1]), abs(R[1][1]))]
    for k in range(1, n):
        r = (k - 1) % 4
        lats.append((r, r, 0.5, 0.5))    # a pure ruling
    iL, jL = (n - 2) % 4, (n - 1) % 4
    yi, yj = R[iL][1], R[jL][1]
    if yi * yj < 0:
        # the symmetry-plane line lies inside this face: end there
        lats.append((iL, jL, abs(yj), abs(yi)))
    else:
        lats.append((iL, jL, 0.5, 0.5))  # equal mix, still collinear with the apex
    cap.laterals = lats
    dirs = [unit(v) for v in _lateral_dirs(cap, R)]
    s_a = []
    for d in dirs:
        if d[2] >= -1e-9:
            raise GeometryError("a lateral misses the base plane")
        s_a.append(-V[2] / d[2])
    cap.s_a = np.array(s_a)
    n_beta = np.array([math.sin(math.radians(beta_tilt_deg)), 0.0,
                       math.cos(math.radians(beta_tilt_deg))])
    p_beta = V + beta_frac * (np.array([0.0, 0.0, 0.0]) - V)
    s_b = []
    for d in dirs:
        dn = float(d @ n_beta)
        if abs(dn) < 1e-9:
            raise GeometryError("upper cut plane parallel to a lateral")
        s_b.append(float((p_beta - V) @ n_beta) / dn)
    cap.s_b = np.array(s_b)
    if np.any(cap.s_b <= 1e-9) or np.any(cap.s_b >= cap.s_a - 1e-9):
        raise GeometryError("upper rim must cut the laterals between apex and base")
    cap.s_eq_a = -V[2] / R[:, 2]
    cap.s_eq_b = np.array([float((p_beta - V) @ n_beta) / float(R[k] @ n_beta)
                           for k in range(4)])
    return cap


@dataclass
class CapState:
    y1: float
    rulings: np.ndarray
    lateral_dirs: list
    rim_a: np.ndarray
    rim_b: np.ndarray
    plane_a: tuple               # (normal, offset)
    plane_b: tuple
    rim_planarity: float
    apex_collinearity: float
    flat: bool
    equator_a: np.ndarray | None = None    # anti-parallelogram cycles (4 points)
    equator_b: np.ndarray | None = None


def flex_bricard_cap(cap: BricardCap, y1, tol: Tolerance = DEFAULT_TOL) -> CapState:
    """Cap pose at flexion coordinate y1, gauged so the lower rim is horizontal."""
    R = cap.rulings(y1)
    dirs = [unit(v) for v in _lateral_dirs(cap, R)]
    # gauge: rotate about the y-line through the apex so rim_a is horizontal
    A_rel = np.array([cap.s_a[k] * dirs[k] for k in range(cap.n + 1)])
    _, nrm, _ = fit_plane(A_rel)
    if abs(nrm[1]) > 1e-7:
        raise GeometryError("rim plane lost its symmetry-plane orthogonality")
    ang = math.atan2(nrm[0], nrm[2])
    if ang > math.pi / 2:
        ang -= math.pi
    elif ang < -math.pi / 2:
        ang += math.pi
    G = rot3_axis([0.0, 1.0, 0.0], -ang)
    if sum((G @ d)[2] for d in dirs) > 0:       # keep the cap hanging downward
        G = rot3_axis([0.0, 1.0, 0.0], math.pi - ang)
    R = R @ G.T
    dirs = [G @ d for d in dirs]
    V = cap.apex
    A = np.array([V + cap.s_a[k] * dirs[k] for k in range(cap.n + 1)])
    B = np.array([V + cap.s_b[k] * dirs[k] for k in range(cap.n + 1)])
    _, na, resa = fit_plane(A)
    _, nb, resb = fit_plane(B)
    col = max(float(np.max([np.linalg.norm(np.cross(A[k] - V, dirs[k]))
                            for k in range(cap.n + 1)])),
              float(np.max([np.linalg.norm(np.cross(B[k] - V, dirs[k]))
                            for k in range(cap.n + 1)])))
    flat = _rulings_coplanar(R)
    eq_a = eq_b = None
    if cap.s_eq_a is not None:
        eq_a = V + cap.s_eq_a[:, None] * R
        eq_b = V + cap.s_eq_b[:, None] * R
    return CapState(y1, R, dirs, A, B, (na, float(na @ A[0])),
                    (nb, float(nb @ B[0])), max(resa, resb), col, flat,
                    eq_a, eq_b)


def _rulings_coplanar(R, eps=1e-6):
    M = np.asarray(R)                       # rays through the apex: rank 2 = flat
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s[-1] <= eps * s[0])


def cap_flex_range(cap: BricardCap, tol: Tolerance = DEFAULT_TOL):
    """Feasible flexion interval [y1_lo, y1_hi]; both endpoints are flat poses."""
    def feasible(y1):
        try:
            _solve_four_bar(cap, y1)
            return True
        except GeometryError:
            return False

    y0 = cap.y1_ref
    sign = 1.0 if y0 > 0 else -1.0
    lo_lim = 1e-6 * sign
    hi_lim = (1.0 - 1e-12) * sign

    def bisect(a, b):
        # a feasible, b infeasible
        for _ in range(200):
            m = 0.5 * (a + b)
            if feasible(m):
                a = m
            else:
                b = m
        return a

    hi = bisect(y0, hi_lim) if not feasible(hi_lim) else hi_lim
    lo = bisect(y0, lo_lim) if not feasible(lo_lim) else lo_lim
    return (min(lo, hi), max(lo, hi))


def cap_flat_poses(cap: BricardCap, tol: Tolerance = DEFAULT_TOL):
    """The two flat poses at the ends of the flexion range."""
    lo, hi = cap_flex_range(cap, tol)
    flats = []
    for y in (lo, hi):
        R = cap.rulings(y)
        if _rulings_coplanar(R, eps=1e-5):
            flats.append(y)
    return flats


def pencil_cut_planarity(cap: BricardCap, state: CapState, samples=5):
    """Material cuts by planes in the pencil of the two rims stay planar."""
    worst = 0.0
    ref = flex_bricard_cap(cap, cap.y1_ref)
    for w in np.linspace(0.15, 0.85, samples):
        nn = unit((1 - w) * ref.plane_a[0] + w * ref.plane_b[0])
        cc = (1 - w) * ref.plane_a[1] + w * ref.plane_b[1]
        s_cut = [(cc - float(nn @ cap.apex)) / float(nn @ d)
                 for d in ref.lateral_dirs]
        pts = np.array([cap.apex + s_cut[k] * state.lateral_dirs[k]
                        for k in range(cap.n + 1)])
        _, _, res = fit_plane(pts)
        worst = max(worst, res)
    return worst


# ---------------------------------------------------------------------------
# Non-translational zipper (conical zip row over the flexible cap)


def _extract_axis_trajectory(rim, axis_foot):
    """Type II step data of a planar polyline about a vertical axis point."""
    rel = rim[:, :2] - np.asarray(axis_foot)[None, :2]
    r = np.linalg.norm(rel, axis=1)
    if np.any(r < 1e-12):
        raise GeometryError("rim touches the axis")
    phi = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    dphi = np.diff(phi)
    if np.any(np.abs(dphi) < 1e-12) or np.any(np.abs(dphi) >= math.pi):
        raise GeometryError("degenerate rim step about the axis")
    return r, dphi, r[1:] / r[:-1]


def _deform_profile_2d(P, t):
    """Deformed vertex positions of a 2D profile polygon (anchor fixed)."""
    edges = np.diff(np.vstack([P, P[:1]]), axis=0)
    dx, dz = edges[:, 0], edges[:, 1]
    s2 = dx * dx + dz * dz
    rest = np.maximum(s2 - t * t * dx * dx, 0.0)
    ds = np.stack([t * dx, np.sign(dz) * np.sqrt(rest)], axis=1)
    n = len(P)
    out = np.empty_like(P)
    out[0] = P[0]
    out[1:] = P[0] + np.cumsum(ds[:n - 1], axis=0)
    return out


@dataclass
class NonTranslationalZipper:
    cap: BricardCap
    tube_a: THedralTube
    tube_b: THedralTube | None
    placement_b: RigidMotion | None
    profile_b2: np.ndarray
    seg_lens: np.ndarray           # |A_k B_k| material lengths
    prism: np.ndarray | None = None
    helper: THedralTube | None = None
    tube_b_grid: np.ndarray | None = None     # reference b-grid (prism variant)
    cos_psi_a_ref: float = 1.0
    cos_psi_b_ref: float = 1.0
    frame_flip: bool = False                   # upper-rim frame orientation
    glue_surfaces: bool = False
    tol: Tolerance = field(default=DEFAULT_TOL)


def _parallelogram_on(p0, p1, v):
    return np.array([p0, p1, p1 + v, p0 + v])


def _beta_frame(n_beta, toward):
    """Frame of a cut plane orthogonal to the symmetry plane (y in-plane)."""
    yhat = np.array([0.0, 1.0, 0.0])
    zhat = unit(n_beta if float(n_beta @ toward) > 0 else -n_beta)
    xhat = np.cross(yhat, zhat)
    return xhat, yhat, zhat


def _plane_frame(n, toward):
    """Orthonormal in-plane basis for an arbitrary plane normal."""
    zhat = unit(n if float(n @ toward) > 0 else -np.asarray(n, float))
    seed = np.array([0.0, 1.0, 0.0])
    if abs(float(seed @ zhat)) > 0.9:
        seed = np.array([1.0, 0.0, 0.0])
    xpl = unit(seed - float(seed @ zhat) * zhat)
    ypl = np.cross(zhat, xpl)
    return xpl, ypl, zhat


def build_nontranslational_zipper(cap: BricardCap, v_a=(0.6, 0.9), v_b=(0.6, 0.9),
                                  prism=None, glue_surfaces=False,
                                  tol: Tolerance = DEFAULT_TOL) -> NonTranslationalZipper:
    """Tubes over the two rim planes of a flexible cap, glued along its faces.

    v_a / v_b complete the shared rim segments into parallelogram
    cross-sections for the two sides.  A prism turns the zip row from the
    fixed-axis kind into the moving-axis kind first, enlarging the design
    space; glue_surfaces records the open-ended surface-gluing variant without
    further classification.
    """
    ref = flex_bricard_cap(cap, cap.y1_ref, tol)
    V = cap.apex
    seg_lens = cap.s_a - cap.s_b
    # --- side a: pencil tube over the lower rim plane
    A2 = np.stack([ref.rim_a[:, 0], ref.rim_a[:, 2]], axis=1)
    B0 = ref.rim_b[0]
    if abs(ref.rim_a[0, 1]) > 1e-8 or abs(B0[1]) > 1e-8:
        raise GeometryError("start lateral must lie in the symmetry plane")
    a0 = np.array([ref.rim_a[0, 0], ref.rim_a[0, 2]])
    b0 = np.array([B0[0], B0[2]])
    prof_a = _parallelogram_on(a0, b0, np.asarray(v_a, float))
    _, dphi, fac = _extract_axis_trajectory(ref.rim_a, [V[0], V[1]])
    traj_a = AxisTrajectory(V[0], tuple(dphi), tuple(fac))
    tube_a = build(DiscreteCrossSection.from_points(prof_a, tol, enforce_ccw=False),
                   traj_a, "II", tol, validate_profile=False)
    gap = np.max(np.linalg.norm(tube_a.grid[:, 0] - ref.rim_a, axis=1))
    if gap > 1e-7 * max(1.0, float(np.max(np.abs(ref.rim_a)))):
        raise GeometryError(f"side-a tube does not reproduce the rim (gap {gap:.2e})")
    d0 = ref.lateral_dirs[0]
    cos_a = math.hypot(d0[0], d0[1])
    zp = NonTranslationalZipper(cap, tube_a, None, None, None, seg_lens,
                                glue_surfaces=glue_surfaces, tol=tol,
                                cos_psi_a_ref=cos_a)
    if prism is not None:
        return _attach_prism_side(zp, np.asarray(prism, float), v_b, ref, tol)
    # --- side b: pencil tube over the upper rim plane, in its own frame
    n_beta = ref.plane_b[0]
    if abs(n_beta[1]) > 1e-8:
        raise GeometryError("upper rim plane must stay orthogonal to the symmetry plane")
    xhat, yhat, zhat = _beta_frame(n_beta, ref.rim_a.mean(axis=0) - ref.rim_b.mean(axis=0))
    zhat_off = float(zhat @ ref.rim_b[0])
    F = V - (float(zhat @ V) - zhat_off) * zhat          # axis foot on beta
    Rb = np.stack([xhat, yhat, zhat], axis=1)
    rim_b_loc = (ref.rim_b - F) @ Rb
    if np.max(np.abs(rim_b_loc[:, 2])) > 1e-8:
        raise GeometryError("upper rim is not planar in its own plane")
    frame_flip = False
    _, dphi_b, fac_b = _extract_axis_trajectory(rim_b_loc, [0.0, 0.0])
    if dphi_b[0] < 0:  # keep the first reference step positive for determinism
        frame_flip = True
        xhat, yhat = -xhat, -yhat
        Rb = np.stack([xhat, yhat, zhat], axis=1)
        rim_b_loc = (ref.rim_b - F) @ Rb
        _, dphi_b, fac_b = _extract_axis_trajectory(rim_b_loc, [0.0, 0.0])
    A0_loc = (ref.rim_a[0] - F) @ Rb
    b0f = np.array([rim_b_loc[0, 0], 0.0])
    a0f = np.array([A0_loc[0], A0_loc[2]])
    prof_b = _parallelogram_on(b0f, a0f, np.asarray(v_b, float))
    traj_b = AxisTrajectory(0.0, tuple(dphi_b), tuple(fac_b))
    tube_b = build(DiscreteCrossSection.from_points(prof_b, tol, enforce_ccw=False),
                   traj_b, "II", tol, validate_profile=False)
    pl_b = RigidMotion(Rb, F)
    gap_b = np.max(np.linalg.norm(pl_b.apply(tube_b.grid[:, 0]) - ref.rim_b, axis=1))
    if gap_b > 1e-7 * max(1.0, float(np.max(np.abs(ref.rim_b)))):
        raise GeometryError(f"side-b tube does not reproduce the rim (gap {gap_b:.2e})")
    db = d0 - float(d0 @ zhat) * zhat
    zp.tube_b = tube_b
    zp.placement_b = pl_b
    zp.profile_b2 = prof_b
    zp.cos_psi_b_ref = float(np.linalg.norm(db))
    zp.frame_flip = frame_flip
    return zp


def _lateral_frames(helper_grid):
    A = helper_grid[:, 0]
    D = helper_grid[:, 1] - helper_grid[:, 0]
    dirs = D / np.linalg.norm(D, axis=1)[:, None]
    return A, dirs


def _similarity_grid(A, dirs, n_beta, origin, xpl, ypl, prof_pts3):
    """Orbit of the first profile column under the per-step plane similarities."""
    heights = prof_pts3 @ n_beta
    inpl = np.stack([(prof_pts3 - origin) @ xpl, (prof_pts3 - origin) @ ypl], axis=1)
    zc = inpl[:, 0] + 1j * inpl[:, 1]
    hA = A @ n_beta
    dn = dirs @ n_beta
    if np.any(np.abs(dn) < 1e-12):
        raise GeometryError("a lateral is parallel to the partner base plane")
    grids = [zc]
    h1, h2 = 0.0, 1.0

    def lat_point(k, h):
        tau = (h - hA[k]) / dn[k]
        p = A[k] + tau * dirs[k] - origin
        return float(p @ xpl) + 1j * float(p @ ypl)

    for k in range(len(A) - 1):
        p1, p2 = lat_point(k, h1), lat_point(k, h2)
        q1, q2 = lat_point(k + 1, h1), lat_point(k + 1, h2)
        a = (q2 - q1) / (p2 - p1)
        b = q1 - a * p1
        zc = a * zc + b
        grids.append(zc)
    out = np.empty((len(A), len(prof_pts3), 3))
    for k, z in enumerate(grids):
        out[k] = origin + np.real(z)[:, None] * xpl + np.imag(z)[:, None] * ypl \
            + heights[:, None] * n_beta
    return out


def _attach_prism_side(zp: NonTranslationalZipper, prism, v_b, ref, tol):
    """Moving-axis variant: the zip row is rebuilt over the given prism.

    The upper rim becomes the planar cut of the transformed strip through the
    first lateral at its original material height; those material cut lengths
    stay coplanar throughout the fold.
    """
    cap, tube_a = zp.cap, zp.tube_a
    zp.prism = prism
    tube_a3 = map_phi_inverse(tube_a, prism, tol)
    zp.tube_a = tube_a3
    a0 = tube_a.profile2d[0]
    b0 = tube_a.profile2d[1]
    useg = (b0 - a0) / np.linalg.norm(b0 - a0)
    span = float(np.max(cap.s_a)) * 1.5
    helper_prof = np.stack([a0, a0 + span * useg])
    helper = build(helper_prof, tube_a3.trajectory, "III", tol, validate_profile=False)
    zp.helper = helper
    A, dirs = _lateral_frames(helper.grid)
    # cut plane through the first lateral at the pencil strip's material height
    nb = ref.plane_b[0]
    anchor = A[0] + (cap.s_a[0] - cap.s_b[0]) * dirs[0]
    c_off = float(nb @ anchor)
    dn = dirs @ nb
    if np.any(np.abs(dn) < 1e-9):
        raise GeometryError("prism variant: cut plane parallel to a lateral")
    m = (c_off - A @ nb) / dn
    if np.any(m <= 1e-9) or np.any(m >= span - 1e-9):
        raise GeometryError("prism variant: cut leaves the strip")
    zp.seg_lens = m
    Bp = A + m[:, None] * dirs
    _, nb2, res = fit_plane(Bp)
    if res > 1e-8 * max(1.0, float(np.max(np.abs(Bp)))):
        raise GeometryError("prism variant: upper rim is not planar")
    toward = A.mean(axis=0) - Bp.mean(axis=0)
    xpl, ypl, zhat = _plane_frame(nb2, toward)
    origin = Bp[0].copy()
    # reference partner profile: parallelogram spanned in (segment, out-of-plane)
    b0f = np.array([0.0, 0.0])
    a0f = np.array([float(np.linalg.norm(A[0] - Bp[0])), 0.0])
    prof_seg = _parallelogram_on(b0f, a0f, np.asarray(v_b, float))
    e1 = unit(A[0] - Bp[0])
    e2 = unit(zhat - float(zhat @ e1) * e1)
    prof3 = origin + prof_seg[:, 0][:, None] * e1 + prof_seg[:, 1][:, None] * e2
    grid_b = _similarity_grid(A, dirs, zhat, origin, xpl, ypl, prof3)
    zp.tube_b_grid = grid_b
    # store the profile in base-frame coordinates (fold scales base-parallel runs)
    xi_hat = unit(e1 - float(e1 @ zhat) * zhat)
    rel = prof3 - origin
    zp.profile_b2 = np.stack([rel @ xi_hat, rel @ zhat], axis=1)
    d0 = dirs[0]
    zp.cos_psi_a_ref = math.hypot(d0[0], d0[1])
    db = d0 - float(d0 @ zhat) * zhat
    zp.cos_psi_b_ref = float(np.linalg.norm(db))
    return zp


@dataclass
class NonTranslationalState:
    lam: float
    t_a: float
    t_b: float
    grid_a: np.ndarray
    grid_b: np.ndarray
    rim_gap: float
    max_edge_dev: float
    max_planarity: float
    rim_planarity: float
    apex_collinearity: float
    pencil_planarity: float
    at_flat_pose: bool


def _rim_scalars(rim, axis_foot, ref_radius0):
    """Deformed strip scalars (mu, signed step angles) read off a rim polyline."""
    rel = rim[:, :2] - np.asarray(axis_foot, float)[None, :2]
    r = np.linalg.norm(rel, axis=1)
    phi = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    return r / ref_radius0, np.diff(phi)


def fold_nontranslational_zipper(zp: NonTranslationalZipper, y1,
                                 tol: Tolerance = DEFAULT_TOL) -> NonTranslationalState:
    """Assembly state at cap flexion y1, driven by the cap.

    The side tubes are rebuilt from the strip scalars read off the deformed
    rims; this follows the cap straight through the tubes' own bifurcation
    configurations (switched working modes).  The returned residuals certify
    that both rebuilt tubes stay isometric to their references and keep the
    shared segment on the cap's start lateral.
    """
    if zp.prism is not None:
        return _fold_prism_variant(zp, y1, tol)
    cap = zp.cap
    st = flex_bricard_cap(cap, y1, tol)
    V = cap.apex
    # side a: scalars about the vertical axis through the apex
    rho_a0 = float(abs(zp.tube_a.profile2d[0, 0] - V[0]))
    mu_a, th_a = _rim_scalars(st.rim_a, V[:2], rho_a0)
    fa = fold_with_scalars(zp.tube_a, mu_a, th_a, tol)
    t_a = float(mu_a[0])
    pa = kabsch(fa.grid[:, 0], st.rim_a)
    gap_a = float(np.max(np.linalg.norm(pa.apply(fa.grid[:, 0]) - st.rim_a, axis=1)))
    ga = pa.apply(fa.grid.reshape(-1, 3)).reshape(fa.grid.shape)
    seg = ga[0, 1] - ga[0, 0]
    seg_gap = float(np.linalg.norm(
        np.cross(seg, np.asarray(st.lateral_dirs[0]))))   # segment off its lateral
    # side b: scalars in the moving upper-rim frame
    nb = st.plane_b[0]
    xhat, yhat, zhat = _beta_frame(nb, st.rim_a.mean(axis=0) - st.rim_b.mean(axis=0))
    if zp.frame_flip:
        xhat, yhat = -xhat, -yhat
    F = V - float(zhat @ (V - st.rim_b[0])) * zhat
    Rb = np.stack([xhat, yhat, zhat], axis=1)
    rim_b_loc = (st.rim_b - F) @ Rb
    rho_b0 = float(abs(zp.tube_b.profile2d[0, 0]))
    mu_b, th_b = _rim_scalars(rim_b_loc, [0.0, 0.0], rho_b0)
    fb = fold_with_scalars(zp.tube_b, mu_b, th_b, tol)
    t_b = float(mu_b[0])
    pb = kabsch(fb.grid[:, 0], rim_b_loc)
    gb_loc = pb.apply(fb.grid.reshape(-1, 3))
    gb = (F + gb_loc @ Rb.T).reshape(fb.grid.shape)
    gap_b = float(np.max(np.linalg.norm(gb[:, 0] - st.rim_b, axis=1)))
    return NonTranslationalState(
        y1, t_a, t_b, ga, gb, max(gap_a, gap_b, seg_gap),
        max(fa.max_edge_dev, fb.max_edge_dev),
        max(fa.max_planarity, fb.max_planarity),
        st.rim_planarity, st.apex_collinearity,
        pencil_cut_planarity(cap, st), st.flat)


def _fold_prism_variant(zp: NonTranslationalZipper, y1, tol):
    cap = zp.cap
    st = flex_bricard_cap(cap, y1, tol)
    V = cap.apex
    # both the pencil and the moving-axis strips share the same fold scalars
    rho_a0 = float(abs(zp.helper.profile2d[0, 0] - V[0]))
    mu_a, th_a = _rim_scalars(st.rim_a, V[:2], rho_a0)
    t_a = float(mu_a[0])
    fa = fold_with_scalars(zp.tube_a, mu_a, th_a, tol)
    fh = fold_with_scalars(zp.helper, mu_a, th_a, tol)
    gap_a = float(np.max(np.linalg.norm(fa.grid[:, 0] - fh.grid[:, 0], axis=1)))
    A, dirs = _lateral_frames(fh.grid)
    Bp = A + zp.seg_lens[:, None] * dirs
    _, nb, rim_res = fit_plane(Bp)
    toward = A.mean(axis=0) - Bp.mean(axis=0)
    xpl, ypl, zhat = _plane_frame(nb, toward)
    t_b = float(np.linalg.norm(dirs[0] - float(dirs[0] @ zhat) * zhat)) / zp.cos_psi_b_ref
    prof2_def = _deform_profile_2d(zp.profile_b2, t_b)
    e1 = unit(A[0] - Bp[0])
    xi_hat = unit(e1 - float(e1 @ zhat) * zhat)
    prof3 = Bp[0] + prof2_def[:, 0][:, None] * xi_hat + prof2_def[:, 1][:, None] * zhat
    grid_b = _similarity_grid(A, dirs, zhat, Bp[0], xpl, ypl, prof3)
    ref_tube_b = THedralTube(zp.tube_b_grid, "III", closed_j=True,
                             profile2d=zp.profile_b2)
    repb = certify_isometry(ref_tube_b, grid_b, tol)
    col = float(np.max([np.linalg.norm(np.cross(Bp[k] - A[k], dirs[k]))
                        for k in range(len(A))]))
    return NonTranslationalState(
        y1, t_a, t_b, fa.grid, grid_b, max(gap_a, rim_res),
        max(fa.max_edge_dev, repb.max_dev),
        max(fa.max_planarity, repb.max_planarity),
        rim_res, col, 0.0, st.flat)
