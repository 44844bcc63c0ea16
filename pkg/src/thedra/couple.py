"""Aligned coupling of tubes into sandwiches and metamaterials.

Tubes with parallel (or identical) base planes that share faces fold with one
common parameter.  The joint fold re-places every non-driver tube by rigidly
aligning its deformed shared vertices onto the neighbor's, walking a spanning
tree of the coupling graph; cycles are validated by their loop-closure
residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import DEFAULT_TOL, GeometryError, RigidMotion, Tolerance, kabsch
from .fold import FoldState, certify_isometry, fold, fold_range
from .tube import THedralTube


@dataclass
class AlignedCoupling:
    a: int
    b: int
    verts_a: np.ndarray      # flattened grid indices into tube a
    verts_b: np.ndarray
    kind: str = "face"       # "face" when whole faces coincide, else "crease"


@dataclass
class AssemblyState:
    t: float
    grids: list              # placed (I, J, 3) grids, world frame
    placements: list
    max_shared_gap: float
    max_edge_dev: float
    max_planarity: float
    loop_gap: float


@dataclass
class AlignedAssembly:
    tubes: list
    placements: list
    couplings: list
    driver: int = 0
    tol: Tolerance = field(default=DEFAULT_TOL)

    def fold_all(self, t) -> AssemblyState:
        states = [fold(tube, t, self.tol) for tube in self.tubes]
        placements = propagate_placements(self, states)
        grids = [pl.apply(st.grid.reshape(-1, 3)).reshape(st.grid.shape)
                 for pl, st in zip(placements, states)]
        shared = 0.0
        for c in self.couplings:
            pa = grids[c.a].reshape(-1, 3)[c.verts_a]
            pb = grids[c.b].reshape(-1, 3)[c.verts_b]
            shared = max(shared, float(np.max(np.linalg.norm(pa - pb, axis=1))))
        loop = _loop_gap(self, grids)
        return AssemblyState(t, grids, placements, shared,
                             max(s.max_edge_dev for s in states),
                             max(s.max_planarity for s in states), loop)

    def common_fold_range(self):
        los, his = [], []
        for tube in self.tubes:
            fr = fold_range(tube, self.tol)
            los.append(fr.t_min)
            his.append(fr.t_max)
        return max(los), min(his)


def _spanning_tree(n, couplings, driver):
    adj = {}
    for k, c in enumerate(couplings):
        adj.setdefault(c.a, []).append((c.b, k, False))
        adj.setdefault(c.b, []).append((c.a, k, True))
    seen = {driver}
    order = []
    fringe = [driver]
    tree = set()
    while fringe:
        u = fringe.pop(0)
        for v, k, rev in adj.get(u, []):
            if v not in seen:
                seen.add(v)
                tree.add(k)
                order.append((u, v, k, rev))
                fringe.append(v)
    if len(seen) != n:
        raise GeometryError("coupling graph is not connected")
    return order, tree


def propagate_placements(asm: AlignedAssembly, states):
    order, _ = _spanning_tree(len(asm.tubes), asm.couplings, asm.driver)
    placements = [None] * len(asm.tubes)
    placements[asm.driver] = asm.placements[asm.driver]
    for u, v, k, rev in order:
        c = asm.couplings[k]
        # indices of the shared vertices in tube v (src) and tube u (dst)
        src_idx, dst_idx = (c.verts_b, c.verts_a) if not rev else (c.verts_a, c.verts_b)
        src = states[v].grid.reshape(-1, 3)[src_idx]
        dst = placements[u].apply(states[u].grid.reshape(-1, 3))[dst_idx]
        allow_reflect = np.linalg.det(asm.placements[v].R) < 0
        placements[v] = kabsch(src, dst, allow_reflection=allow_reflect)
    return placements


def _loop_gap(asm: AlignedAssembly, grids):
    gap = 0.0
    _, tree = _spanning_tree(len(asm.tubes), asm.couplings, asm.driver)
    for k, c in enumerate(asm.couplings):
        if k in tree:
            continue
        pa = grids[c.a].reshape(-1, 3)[c.verts_a]
        pb = grids[c.b].reshape(-1, 3)[c.verts_b]
        gap = max(gap, float(np.max(np.linalg.norm(pa - pb, axis=1))))
    return gap


def detect_shared_vertices(tube_a, place_a, tube_b, place_b, tol: Tolerance = DEFAULT_TOL):
    """Index pairs of coinciding vertices of two placed tubes at reference."""
    A = place_a.apply(tube_a.grid.reshape(-1, 3))
    B = place_b.apply(tube_b.grid.reshape(-1, 3))
    scale = max(1.0, float(np.max(np.abs(A))))
    eps = 1e3 * tol.eps_len * scale
    pairs = []
    for i, p in enumerate(A):
        d = np.linalg.norm(B - p, axis=1)
        j = int(np.argmin(d))
        if d[j] <= eps:
            pairs.append((i, j))
    return pairs


def _shared_faces(tube_a, tube_b, pairs):
    lookup = dict(pairs)
    count = 0
    for quad in tube_a.face_indices():
        if all(v in lookup for v in quad):
            count += 1
    return count


def _probe_t(tubes, tol):
    lo, hi = 0.0, math.inf
    for tube in tubes:
        fr = fold_range(tube, tol)
        lo, hi = max(lo, fr.t_min), min(hi, fr.t_max)
    if hi > 1.0 + 1e-6:
        return 0.5 * (1.0 + min(hi, 2.0))
    return 0.5 * (1.0 + lo)


def _filter_tracking_pairs(tube_a, tube_b, pairs, st_a, st_b, tol):
    """Keep only coincidences that persist under the fold (probe state).

    Accidental spatial coincidences between different trajectory steps break
    as soon as the tubes fold, so pairs are grouped by their step offset and
    each group must move rigidly at the probe state.
    """
    J_a, J_b = tube_a.shape[1], tube_b.shape[1]
    groups = {}
    for va, vb in pairs:
        key = va // J_a - vb // J_b
        groups.setdefault(key, []).append((va, vb))
    ga = st_a.grid.reshape(-1, 3)
    gb = st_b.grid.reshape(-1, 3)
    scale = max(1.0, float(np.max(np.abs(ga))))
    kept = []
    for g in sorted(groups.values(), key=len, reverse=True):
        idx_a = np.array([p[0] for p in g])
        idx_b = np.array([p[1] for p in g])
        if len(g) >= 2:
            m = kabsch(gb[idx_b], ga[idx_a], allow_reflection=True)
            res = float(np.max(np.linalg.norm(m.apply(gb[idx_b]) - ga[idx_a], axis=1)))
            if res > 1e-6 * scale:
                continue
        if kept:
            # must be rigidly consistent with the pairs kept so far
            all_a = np.concatenate([np.array([p[0] for p in kept]), idx_a])
            all_b = np.concatenate([np.array([p[1] for p in kept]), idx_b])
            m = kabsch(gb[all_b], ga[all_a], allow_reflection=True)
            res = float(np.max(np.linalg.norm(m.apply(gb[all_b]) - ga[all_a], axis=1)))
            if res > 1e-6 * scale:
                continue
        kept.extend(g)
    return kept


def couple_aligned(tubes, placements, driver=0, tol: Tolerance = DEFAULT_TOL,
                   require_faces=True) -> AlignedAssembly:
    """Assemble tubes that coincide on faces (or creases) at reference.

    Base planes must be parallel or identical; non-parallel base planes need a
    zipper coupling instead.
    """
    for pl in placements:
        up = pl.R @ np.array([0.0, 0.0, 1.0])
        if abs(abs(up[2]) - 1.0) > tol.eps_angle * 10:
            raise GeometryError("non-parallel base planes: use a zipper coupling")
    probe = _probe_t(tubes, tol)
    probe_states = [fold(tube, probe, tol) for tube in tubes]
    couplings = []
    for a in range(len(tubes)):
        for b in range(a + 1, len(tubes)):
            pairs = detect_shared_vertices(tubes[a], placements[a], tubes[b],
                                           placements[b], tol)
            pairs = _filter_tracking_pairs(tubes[a], tubes[b], pairs,
                                           probe_states[a], probe_states[b], tol)
            if len(pairs) < 2:
                continue
            kind = "face" if _shared_faces(tubes[a], tubes[b], pairs) else "crease"
            couplings.append(AlignedCoupling(
                a, b, np.array([p[0] for p in pairs]),
                np.array([p[1] for p in pairs]), kind))
    if not couplings:
        raise GeometryError("no shared faces or creases between the placed tubes")
    if require_faces and not any(c.kind == "face" for c in couplings):
        raise GeometryError("tubes share no whole face; pass require_faces=False "
                            "for crease-only (edge-sharing) assemblies")
    asm = AlignedAssembly(list(tubes), list(placements), couplings, driver, tol)
    st = asm.fold_all(1.0)
    scale = max(1.0, float(np.max(np.abs(tubes[0].grid))))
    if st.max_shared_gap > 1e3 * tol.eps_len * scale:
        raise GeometryError("shared faces do not coincide at reference")
    return asm


def translation_stack(tube: THedralTube, chord, count=2, driver=0,
                      tol: Tolerance = DEFAULT_TOL, require_faces=True):
    """Aligned assembly of `count` copies, each shifted by a profile chord.

    The chord is a 2D displacement in the profile plane that maps one profile
    edge onto an identical classmate, so consecutive copies share a face strip.
    """
    chord3 = np.array([chord[0], 0.0, chord[1]])
    tubes = [tube] * count
    placements = [RigidMotion(np.eye(3), k * chord3) for k in range(count)]
    return couple_aligned(tubes, placements, driver, tol, require_faces)


def metamaterial_array(tube: THedralTube, chord_u, chord_v, nu=3, nv=3,
                       tol: Tolerance = DEFAULT_TOL, require_faces=True):
    """nu x nv aligned array over two independent profile chords."""
    cu = np.array([chord_u[0], 0.0, chord_u[1]])
    cv = np.array([chord_v[0], 0.0, chord_v[1]])
    tubes, placements = [], []
    for i in range(nu):
        for j in range(nv):
            tubes.append(tube)
            placements.append(RigidMotion(np.eye(3), i * cu + j * cv))
    return couple_aligned(tubes, placements, 0, tol, require_faces)


# ---------------------------------------------------------------------------
# Edge-sharing along trajectory curves


@dataclass
class EdgeShareSpec:
    subtype: str               # "alpha-alpha" | "beta-beta" | "gamma-gamma"
    #                            | "alpha-beta" | "alpha-gamma"
    tube_a: int
    row_a: int
    tube_b: int
    row_b: int


@dataclass
class EdgeShareReport:
    valid: bool
    subtype: str
    curve_gap: float
    diagnostics: list


def _profile_tangent(tube: THedralTube, j):
    """Unit profile tangent at vertex j (smooth metadata wins when present)."""
    sp = getattr(tube, "smooth_profile", None)
    if sp is not None and tube.densities:
        density = tube.densities[0]
        seg_idx, k = divmod(j, density)
        seg = sp.segments[seg_idx % len(sp.segments)]
        s = seg.length * k / density
        v = np.array([float(seg.dfx(s)), float(seg.dfz(s))])
        return v / np.linalg.norm(v)
    P = tube.profile2d
    n = len(P)
    v = P[(j + 1) % n] - P[(j - 1) % n]
    return v / np.linalg.norm(v)


def _is_crease(tube: THedralTube, j, tol: Tolerance):
    sp = getattr(tube, "smooth_profile", None)
    if sp is not None and tube.densities:
        density = tube.densities[0]
        seg_idx, k = divmod(j, density)
        if k != 0:
            return False            # interior of a smooth segment
        segs = sp.segments
        prev = segs[(seg_idx - 1) % len(segs)]
        cur = segs[seg_idx % len(segs)]
        ta = np.array([float(prev.dfx(prev.length)), float(prev.dfz(prev.length))])
        tb = np.array([float(cur.dfx(0.0)), float(cur.dfz(0.0))])
        return abs(ta[0] * tb[1] - ta[1] * tb[0]) > 1e-6
    P = tube.profile2d
    n = len(P)
    if not tube.closed_j and (j == 0 or j == n - 1):
        return True
    a = P[j] - P[(j - 1) % n]
    b = P[(j + 1) % n] - P[j]
    s = abs(a[0] * b[1] - a[1] * b[0]) / (np.linalg.norm(a) * np.linalg.norm(b))
    return s > 1e-6


def validate_edge_share(spec: EdgeShareSpec, tubes, placements,
                        tol: Tolerance = DEFAULT_TOL) -> EdgeShareReport:
    """Check the touching condition of a generalized edge-sharing coupling."""
    ta, tb = tubes[spec.tube_a], tubes[spec.tube_b]
    ca = placements[spec.tube_a].apply(ta.grid[:, spec.row_a])
    cb = placements[spec.tube_b].apply(tb.grid[:, spec.row_b])
    if len(ca) != len(cb):
        return EdgeShareReport(False, spec.subtype, math.inf,
                               ["shared curves have different vertex counts"])
    gap = float(np.max(np.linalg.norm(ca - cb, axis=1)))
    diags = []
    scale = max(1.0, float(np.max(np.abs(ca))))
    if gap > 1e3 * tol.eps_len * scale:
        diags.append(f"curves do not coincide (gap {gap:.2e})")
    side_a, side_b = spec.subtype.split("-")
    for side, tube, row in ((side_a, ta, spec.row_a), (side_b, tb, spec.row_b)):
        crease = _is_crease(tube, row, tol)
        if side == "alpha" and not crease:
            diags.append(f"row {row} is not a crease")
        if side in ("beta", "gamma"):
            if crease:
                diags.append(f"row {row} is a crease, not a regular curve")
            else:
                tan = _profile_tangent(tube, row)
                vertical = abs(tan[0]) <= 1e-6
                if side == "beta" and not vertical:
                    diags.append(f"row {row}: tangent plane is not vertical")
                if side == "gamma" and vertical:
                    diags.append(f"row {row}: tangent plane is vertical")
    if spec.subtype == "gamma-gamma" and not diags:
        # touching regular curves must come from half-turn related profile points
        na = _profile_tangent(ta, spec.row_a)
        nb = _profile_tangent(tb, spec.row_b)
        if np.linalg.norm(na + nb) > 1e-6:
            diags.append("touching segments are not related by a half-turn")
    if spec.subtype == "alpha-gamma" and not diags:
        # the crease's two panels must not cross the partner's tangent plane
        tan = _profile_tangent(tb, spec.row_b)
        P = ta.profile2d
        n = len(P)
        j = spec.row_a
        d1 = P[j] - P[(j - 1) % n]
        d2 = P[(j + 1) % n] - P[j]
        c1 = tan[0] * d1[1] - tan[1] * d1[0]
        c2 = tan[0] * d2[1] - tan[1] * d2[0]
        if c1 * (-c2) < -tol.eps_len:
            diags.append("crease panels penetrate the partner tangent plane")
    return EdgeShareReport(not diags, spec.subtype, gap, diags)
