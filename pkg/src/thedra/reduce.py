"""Reduction of valid cross-sections to a terminal flexible quad.

A valid section's segments pair up classwise, after splitting, into either
identical pairs (opposite edge vectors) or mirror pairs (vectors related by an
X-axis flip).  Identical pairs are removed by subtracting a parallelogram row;
mirror pairs are first reflected in place through a vertical-symmetric deltoid
exchange (two deltoid steps with compensating X-runs) and then removed.  The
inverse operations drive the composed generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import DEFAULT_TOL, GeometryError, Tolerance
from .section import DiscreteCrossSection, validate_discrete


@dataclass
class DecompositionStep:
    op: str                    # "subtract" | "add"
    kind: str                  # "parallelogram-row" | "deltoid"
    quads: list                # quad geometry, each (4, 2) array
    edit: dict = field(repr=False, default_factory=dict)


@dataclass
class Decomposition:
    steps: list
    terminal: np.ndarray       # (4, 2) vertices
    terminal_kind: str         # parallelogram | deltoid | anti-parallelogram
    oplog: list = field(repr=False, default_factory=list)


class _EdgePoly:
    """Polygon as anchor vertex + cyclic edge list; vertices derived by cumsum.

    Edits on the edge list keep intermediate states meaningful even while the
    edge sum is temporarily nonzero (between the two halves of a deltoid
    exchange).
    """

    def __init__(self, anchor, edges):
        self.anchor = np.asarray(anchor, dtype=float)
        self.edges = [np.asarray(e, dtype=float) for e in edges]
        self.oplog = []    # every structural edit, splits included, for replay

    @classmethod
    def from_section(cls, cs: DiscreteCrossSection):
        return cls(cs.vertices[0], list(cs.edge_vectors()))

    @property
    def n(self):
        return len(self.edges)

    def vertices(self):
        V = np.vstack([self.anchor, self.anchor + np.cumsum(self.edges[:-1], axis=0)])
        return V

    def scale(self):
        return max(1.0, float(np.max(np.abs(self.vertices()))))

    def split_edge(self, k, first_len):
        e = self.edges[k]
        L = float(np.linalg.norm(e))
        if not (0 < first_len < L):
            raise GeometryError("split length out of range")
        u = e / L
        self.edges[k:k + 1] = [u * first_len, u * (L - first_len)]
        self.oplog.append({"kind": "split", "k": k})


def _canonical_vertices(pts, tol: Tolerance):
    """Drop collinear (flat) vertices, rotate so the lexicographic min comes first."""
    P = np.asarray(pts, dtype=float)
    scale = max(1.0, float(np.max(np.abs(P))))
    keep = []
    n = len(P)
    for i in range(n):
        a, b, c = P[(i - 1) % n], P[i], P[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) > 1e-9 * scale * scale:
            keep.append(i)
    Q = P[keep] if keep else P
    k0 = min(range(len(Q)), key=lambda k: (round(Q[k][0] / (1e-9 * scale)), round(Q[k][1] / (1e-9 * scale))))
    return np.roll(Q, -k0, axis=0)


def sections_match(a_pts, b_pts, tol: Tolerance = DEFAULT_TOL):
    """Geometric equality of closed polylines modulo flat vertices and start point."""
    A = _canonical_vertices(a_pts, tol)
    B = _canonical_vertices(b_pts, tol)
    if len(A) != len(B):
        return False
    scale = max(1.0, float(np.max(np.abs(A))))
    return bool(np.max(np.linalg.norm(A - B, axis=1)) <= 1e-7 * scale)


def _is_identical_pair(ei, ej, eps):
    return np.linalg.norm(ei + ej) <= eps


def _is_mirror_pair(ei, ej, eps):
    return np.linalg.norm(ei - np.array([ej[0], -ej[1]])) <= eps


def _find_identical_pair(P: _EdgePoly, eps):
    """Lowest-index pair of anti-parallel edges, splitting the longer on demand."""
    n = P.n
    for p in range(n):
        ep = P.edges[p]
        lp = np.linalg.norm(ep)
        for q in range(p + 1, n):
            eq = P.edges[q]
            lq = np.linalg.norm(eq)
            cross = ep[0] * eq[1] - ep[1] * eq[0]
            if abs(cross) > eps * max(lp, lq) or np.dot(ep, eq) >= 0:
                continue
            if abs(lp - lq) <= eps:
                return p, q
            if lp > lq:
                P.split_edge(p, lq)
                return p, q + 1
            P.split_edge(q, lp)
            return p, q
    return None


def _subtract_parallelogram_row(P: _EdgePoly, p, q, tol: Tolerance):
    """Remove anti-parallel pair (p, q); the chain between them shifts by -e_p."""
    V = P.vertices()
    e = P.edges[p].copy()
    chain_a = list(range(p + 1, q))                     # shifts by -e
    chain_b = [k % P.n for k in range(q + 1, p + P.n)]  # stays
    covered = chain_a if len(chain_a) <= len(chain_b) else chain_b
    shift = -e if covered is chain_a else e
    quads = []
    for k in covered:
        a, b = V[k], V[(k + 1) % P.n]
        quads.append(np.array([a, b, b + shift, a + shift]))
    edit = {"kind": "row", "p": p, "q": q, "edge": e, "anchor_before": P.anchor.copy()}
    # anchor at the vertex after q so the untouched chain keeps its position
    old_edges, n = P.edges, P.n
    P.anchor = V[(q + 1) % n]
    P.edges = [old_edges[k % n] for k in range(q + 1, p + n)] + \
              [old_edges[k] for k in range(p + 1, q)]
    P.oplog.append(edit)
    return DecompositionStep("subtract", "parallelogram-row", quads, edit)


def _undo_row(P: _EdgePoly, edit):
    """Inverse of the row subtraction on the edge list."""
    p, q, e = edit["p"], edit["q"], edit["edge"]
    n_before = P.n + 2
    chain_b_len = n_before - q - 1 + p      # edges q+1..p-1 cyclic
    chain_b = P.edges[:chain_b_len]
    chain_a = P.edges[chain_b_len:]
    edges = [None] * n_before
    for i, k in enumerate(range(q + 1, p + n_before)):
        edges[k % n_before] = chain_b[i]
    edges[p] = e
    edges[q] = -e
    for i, k in enumerate(range(p + 1, q)):
        edges[k] = chain_a[i]
    P.edges = edges
    P.anchor = edit["anchor_before"]


def _mirror_pairs(P: _EdgePoly, eps):
    """Equal-length mirror pairs (splitting on demand), each edge used once."""
    pairs = []
    used = set()
    changed = True
    while changed:
        changed = False
        n = P.n
        for p in range(n):
            if p in used:
                continue
            ep = P.edges[p]
            lp = np.linalg.norm(ep)
            for q in range(n):
                if q == p or q in used:
                    continue
                eq = P.edges[q]
                lq = np.linalg.norm(eq)
                m = np.array([eq[0], -eq[1]])
                cross = ep[0] * m[1] - ep[1] * m[0]
                if abs(cross) > eps * max(lp, lq) or np.dot(ep, m) <= 0:
                    continue
                if abs(lp - lq) <= eps:
                    pairs.append((min(p, q), max(p, q)))
                    used.update((p, q))
                    break
                # split the longer member and retry from scratch
                if lp > lq:
                    P.split_edge(p, lq)
                else:
                    P.split_edge(q, lp)
                return _mirror_pairs(P, eps)
            else:
                continue
            changed = True
    return pairs


def _reflect_edge_step(P: _EdgePoly, q):
    """Flip the X-run of edge q; records the swept vertical-symmetric deltoid."""
    V = P.vertices()
    e_old = P.edges[q].copy()
    e_new = np.array([-e_old[0], e_old[1]])
    apex = V[q]
    quad = np.array([apex, apex + e_old, apex + e_old + e_new, apex + e_new])
    P.edges[q] = e_new
    edit = {"kind": "reflect", "q": q}
    P.oplog.append(edit)
    return DecompositionStep("subtract", "deltoid", [quad], edit)


def _deltoid_exchange(P: _EdgePoly, tol: Tolerance):
    """Reflect one member of each of two mirror pairs with opposite X-runs.

    The two X-run flips cancel, so the polygon stays closed; both pairs become
    identical pairs (up to split leftovers) removable by parallelogram rows.
    """
    eps = tol.eps_len * P.scale() * 100
    pairs = _mirror_pairs(P, eps)
    pos = [pr for pr in pairs if P.edges[pr[0]][0] > eps]
    neg = [pr for pr in pairs if P.edges[pr[0]][0] < -eps]
    if not pos or not neg:
        raise GeometryError("reduction stalled: no compensating mirror pairs")
    (p1, q1), (p2, q2) = pos[0], neg[0]
    dx1, dx2 = abs(P.edges[p1][0]), abs(P.edges[p2][0])
    if abs(dx1 - dx2) > eps:
        # split the larger-X-run pair so the reflected X-runs cancel exactly
        big = (p1, q1) if dx1 > dx2 else (p2, q2)
        small_dx = min(dx1, dx2)
        for k in sorted(big, reverse=True):
            e = P.edges[k]
            frac = small_dx / abs(e[0])
            P.split_edge(k, float(np.linalg.norm(e)) * frac)
        return _deltoid_exchange(P, tol)
    # reflect the descending member of each pair (becomes the partner's negative)
    steps = []
    for (p, q) in ((p1, q1), (p2, q2)):
        k = q if P.edges[q][1] < 0 else p
        steps.append(_reflect_edge_step(P, k))
    return steps


_TERMINAL_KINDS = ("parallelogram", "deltoid", "anti-parallelogram")


def classify_quad(edges, tol: Tolerance = DEFAULT_TOL):
    """Which of the three flexible quads a 4-edge cycle is (or raise)."""
    e = [np.asarray(x, dtype=float) for x in edges]
    if len(e) != 4:
        raise GeometryError("classify_quad expects 4 edges")
    scale = max(float(np.linalg.norm(x)) for x in e)
    eps = 1e-7 * max(1.0, scale)
    if _is_identical_pair(e[0], e[2], eps) and _is_identical_pair(e[1], e[3], eps):
        return "parallelogram"
    if _is_mirror_pair(e[0], e[3], eps) and _is_mirror_pair(e[1], e[2], eps):
        return "deltoid"
    if _is_mirror_pair(e[0], e[1], eps) and _is_mirror_pair(e[2], e[3], eps):
        return "deltoid"
    if _is_mirror_pair(e[0], e[2], eps) and _is_mirror_pair(e[1], e[3], eps):
        return "anti-parallelogram"
    raise GeometryError("terminal quad is not parallelogram, deltoid, or anti-parallelogram")


def decompose(cs: DiscreteCrossSection, tol: Tolerance = DEFAULT_TOL) -> Decomposition:
    """Reduce a valid section to a terminal flexible quad, recording each step."""
    report = validate_discrete(cs, tol)
    if not report.valid:
        raise GeometryError("cross-section fails the slope-class validation")
    P = _EdgePoly.from_section(cs)
    steps = []
    guard = 0
    while P.n > 4:
        guard += 1
        if guard > 10 * len(cs) + 100:
            raise GeometryError("reduction did not terminate")
        eps = tol.eps_len * P.scale() * 100
        pair = _find_identical_pair(P, eps)
        if pair is not None:
            steps.append(_subtract_parallelogram_row(P, *pair, tol=tol))
            continue
        steps.extend(_deltoid_exchange(P, tol))
    kind = classify_quad(P.edges, tol)
    return Decomposition(steps, P.vertices(), kind, P.oplog)


def recompose(dec: Decomposition):
    """Replay the edit log in reverse from the terminal quad; returns vertices."""
    V = dec.terminal
    P = _EdgePoly(V[0], list(np.diff(np.vstack([V, V[:1]]), axis=0)))
    for edit in reversed(dec.oplog):
        if edit["kind"] == "row":
            _undo_row(P, edit)
        elif edit["kind"] == "reflect":
            q = edit["q"]
            e = P.edges[q]
            P.edges[q] = np.array([-e[0], e[1]])
        elif edit["kind"] == "split":
            k = edit["k"]
            merged = P.edges[k] + P.edges[k + 1]
            P.edges[k:k + 2] = [merged]
        else:
            raise GeometryError(f"unknown edit kind {edit['kind']}")
    return P.vertices()


# ---------------------------------------------------------------------------
# Composed generator: inverse operations from a seed quad


def _add_parallelogram_row(edges, k, v):
    return edges[:k] + [v] + [edges[k]] + [-v] + edges[k + 1:]


def _add_deltoid(edges, k, c):
    a, b = edges[k]
    if abs(a) < 1e-12:
        raise GeometryError("deltoid add needs a non-vertical edge")
    return edges[:k] + [np.array([-a, b]), np.array([a, c]), np.array([a, -c])] + edges[k + 1:]


def generate_composed(seed, steps, tol: Tolerance = DEFAULT_TOL,
                      slope_range=(40.0, 85.0), start_kind=None):
    """Random valid cross-section built by adding parallelogram rows and deltoids.

    Every output passes validate_discrete; the edge count is 4 + 2*steps.
    """
    rng = np.random.default_rng(seed)
    lo, hi = slope_range

    def rand_slant(updown=None):
        ang = math.radians(rng.uniform(lo, hi))
        L = rng.uniform(0.5, 1.5)
        sz = updown if updown is not None else (1 if rng.random() < 0.5 else -1)
        sx = 1 if rng.random() < 0.5 else -1
        return np.array([sx * L * math.cos(ang), sz * L * math.sin(ang)])

    kind = start_kind or rng.choice(["parallelogram", "deltoid", "anti_parallelogram"])
    if kind == "parallelogram":
        a = rng.uniform(lo, hi)
        base = generate_parallelogram_edges(rng.uniform(0.6, 1.4), a, rng.uniform(0.6, 1.4))
    elif kind == "deltoid":
        a1, a2 = rng.uniform(lo, hi), rng.uniform(lo, hi)
        while abs(a1 - a2) < 2.0:
            a2 = rng.uniform(lo, hi)
        base = generate_deltoid_edges(rng.uniform(0.6, 1.4), a1, a2)
    else:
        z1 = rng.uniform(0.4, 0.9)
        dz = rng.uniform(0.3, 0.8)
        # pick the x-run from a slope inside the safe range so no edge is shallow
        x_run = dz / math.tan(math.radians(rng.uniform(lo, hi)))
        base = generate_anti_parallelogram_edges(x_run, z1, z1 + dz)
    edges = [np.asarray(e, dtype=float) for e in base]
    for _ in range(int(steps)):
        if rng.random() < 0.6:
            k = int(rng.integers(len(edges)))
            edges = _add_parallelogram_row(edges, k, rand_slant())
        else:
            cands = [k for k, e in enumerate(edges) if abs(e[0]) > 1e-9]
            k = int(rng.choice(cands))
            a = abs(edges[k][0])
            c = a * math.tan(math.radians(rng.uniform(lo, hi))) * (1 if rng.random() < 0.5 else -1)
            edges = _add_deltoid(edges, k, c)
    pts = np.vstack([[0.0, 0.0], np.cumsum(edges[:-1], axis=0)])
    return DiscreteCrossSection.from_points(pts, tol, enforce_ccw=False)


def generate_parallelogram_edges(side, slope_deg, width):
    a = math.radians(slope_deg)
    u = np.array([side * math.cos(a), -side * math.sin(a)])
    v = np.array([width * math.cos(a), width * math.sin(a)])
    return [u, v, -u, -v]


def generate_deltoid_edges(half_width, lower_slope_deg, upper_slope_deg):
    lo, up = math.radians(lower_slope_deg), math.radians(upper_slope_deg)
    a = half_width
    zl, zu = a * math.tan(lo), a * math.tan(up)
    pts = np.array([[0.0, 0.0], [a, zl], [0.0, zl + zu], [-a, zl]])
    return list(np.diff(np.vstack([pts, pts[:1]]), axis=0))


def generate_anti_parallelogram_edges(x_run, z_low, z_high):
    pts = np.array([[0.0, z_low], [x_run, z_high], [0.0, -z_low], [x_run, -z_high]])
    return list(np.diff(np.vstack([pts, pts[:1]]), axis=0))
