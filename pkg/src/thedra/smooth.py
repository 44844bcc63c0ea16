"""Piecewise-smooth cross-sections and their isometric deformation.

Segments are arc-length parametrized planar curves c(s) = (f(s), g(s)).  Under
the fold parameter t a segment deforms to

    ( t f(s),  sign(g') * integral_0^s sqrt((1 - t^2) f'^2 + g'^2) ds ),

which preserves arc length.  A closed section is compatible with the
deformation when its segments partition into classes under the four relations
(identical / X-mirror / Z-mirror / half-turn, up to translation and
reparametrization) with vanishing per-class monotonicity sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .geom import DEFAULT_TOL, FoldRangeError, GeometryError, Tolerance

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)

RELATION_LABELS = {
    "identity": "identical",
    "mirror_x": "X-axis mirror",
    "mirror_z": "Z-axis mirror",
    "rot_180": "half-turn",
}


@dataclass
class SmoothProfileSegment:
    """Arc-length parametrized planar curve segment in the profile plane."""

    length: float
    fx: object               # callables s -> coordinate
    fz: object
    dfx: object
    dfz: object
    tag: str = "spline"      # "line" | "arc" | "spline"
    samples: np.ndarray | None = None
    n_samples: int = 256

    def __post_init__(self):
        if self.length <= 0:
            raise GeometryError("smooth segment needs positive length")
        if self.samples is None:
            s = np.linspace(0.0, self.length, self.n_samples)
            self.samples = np.stack([self.fx(s), self.fz(s)], axis=1)
        self._check_unit_speed()
        self.mono_sign = self._monotone_sign()

    def _check_unit_speed(self, tol=1e-8):
        s = np.linspace(0.0, self.length, 64)
        speed = np.hypot(self.dfx(s), self.dfz(s))
        if np.max(np.abs(speed - 1.0)) > tol:
            raise GeometryError("segment is not arc-length parametrized")

    def _monotone_sign(self):
        s = np.linspace(0.0, self.length, 129)[1:-1]
        dz = self.dfz(s)
        if np.all(dz > 1e-12):
            return 1
        if np.all(dz < -1e-12):
            return -1
        if self.tag == "line" and np.max(np.abs(dz)) <= 1e-12:
            return 0        # horizontal line: only admissible at a flexion limit
        raise GeometryError("interior horizontal tangent: no admissible state")

    def is_vertical_line(self, tol=1e-10):
        s = np.linspace(0.0, self.length, 33)
        return self.tag == "line" and np.max(np.abs(self.dfx(s))) <= tol

    def interior_vertical_tangent(self, tol=1e-9):
        """Vertical tangents are only allowed at the segment endpoints."""
        if self.is_vertical_line():
            return False
        s = np.linspace(0.0, self.length, 257)[1:-1]
        return bool(np.min(np.abs(self.dfx(s))) <= tol)

    def start(self):
        return np.array([float(self.fx(0.0)), float(self.fz(0.0))])

    def end(self):
        L = self.length
        return np.array([float(self.fx(L)), float(self.fz(L))])

    def point(self, s):
        return np.stack([self.fx(s), self.fz(s)], axis=-1)

    def t_max(self):
        """Largest t with t|f'| <= 1 everywhere (row-horizontal limit)."""
        s = np.linspace(0.0, self.length, 2049)
        m = float(np.max(np.abs(self.dfx(s))))
        return math.inf if m == 0.0 else 1.0 / m

    # -- construction helpers ------------------------------------------------

    @classmethod
    def line(cls, p0, p1, n_samples=256):
        p0 = np.asarray(p0, float)
        p1 = np.asarray(p1, float)
        L = float(np.linalg.norm(p1 - p0))
        if L == 0.0:
            raise GeometryError("zero-length line segment")
        u = (p1 - p0) / L
        return cls(L,
                   fx=lambda s: p0[0] + u[0] * np.asarray(s, float),
                   fz=lambda s: p0[1] + u[1] * np.asarray(s, float),
                   dfx=lambda s: np.full_like(np.asarray(s, float), u[0]),
                   dfz=lambda s: np.full_like(np.asarray(s, float), u[1]),
                   tag="line", n_samples=n_samples)

    @classmethod
    def arc(cls, center, radius, ang0, ang1, n_samples=256):
        """Circular arc from angle ang0 to ang1 (radians, signed sweep)."""
        c = np.asarray(center, float)
        if radius <= 0:
            raise GeometryError("arc needs positive radius")
        sweep = ang1 - ang0
        if sweep == 0:
            raise GeometryError("zero-sweep arc")
        L = abs(sweep) * radius
        sgn = 1.0 if sweep > 0 else -1.0

        def ang(s):
            return ang0 + sgn * np.asarray(s, float) / radius

        return cls(L,
                   fx=lambda s: c[0] + radius * np.cos(ang(s)),
                   fz=lambda s: c[1] + radius * np.sin(ang(s)),
                   dfx=lambda s: -sgn * np.sin(ang(s)),
                   dfz=lambda s: sgn * np.cos(ang(s)),
                   tag="arc", n_samples=n_samples)

    @classmethod
    def from_samples(cls, pts, n_samples=256):
        """Spline through a dense sample table, reparametrized by arc length."""
        P = np.asarray(pts, float)
        if len(P) < 4:
            raise GeometryError("need at least 4 samples for a spline segment")
        seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
        u = np.concatenate([[0.0], np.cumsum(seg)])
        spl = CubicSpline(u, P, axis=0)
        # refine to arc-length parametrization of the spline itself
        uu = np.linspace(0, u[-1], 4096)
        dd = spl(uu, 1)
        speed = np.hypot(dd[:, 0], dd[:, 1])
        s_of_u = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(uu))])
        L = float(s_of_u[-1])
        u_of_s = CubicSpline(s_of_u, uu)

        def fx(s):
            return spl(u_of_s(np.asarray(s, float)))[..., 0]

        def fz(s):
            return spl(u_of_s(np.asarray(s, float)))[..., 1]

        def dfx(s):
            uu_ = u_of_s(np.asarray(s, float))
            d = spl(uu_, 1)
            sp = np.hypot(d[..., 0], d[..., 1])
            return d[..., 0] / sp

        def dfz(s):
            uu_ = u_of_s(np.asarray(s, float))
            d = spl(uu_, 1)
            sp = np.hypot(d[..., 0], d[..., 1])
            return d[..., 1] / sp

        return cls(L, fx, fz, dfx, dfz, tag="spline", n_samples=n_samples)


@dataclass
class DeformedSegment:
    t: float
    samples: np.ndarray       # (n, 2) deformed sample table
    z_run: float              # total signed Z-extent
    source: SmoothProfileSegment

    def arclength(self):
        """Quadrature of the deformed speed, independent of the sample table."""
        seg, t = self.source, self.t

        def speed(s):
            dx = t * seg.dfx(s)
            dz2 = (1 - t * t) * seg.dfx(s) ** 2 + seg.dfz(s) ** 2
            return math.sqrt(dx * dx + max(dz2, 0.0))

        total = 0.0
        s_knots = np.linspace(0.0, seg.length, 9)
        for a, b in zip(s_knots[:-1], s_knots[1:]):
            total += quad(speed, a, b, **_QUAD_OPTS)[0]
        return total


def deform_smooth_profile(seg: SmoothProfileSegment, t, n=None,
                          tol: Tolerance = DEFAULT_TOL) -> DeformedSegment:
    """Deform one smooth segment; arc length is preserved by construction."""
    if t < 0:
        raise FoldRangeError("fold parameter must be non-negative", t=t)
    tmax = seg.t_max()
    if t > tmax * (1 + 1e-12):
        raise FoldRangeError("beyond flexion limit", t=t, feature="row-horizontal")
    n = n or seg.n_samples
    s = np.linspace(0.0, seg.length, n)
    sgn = seg.mono_sign if seg.mono_sign != 0 else 1

    def integrand(u):
        v = (1 - t * t) * seg.dfx(u) ** 2 + seg.dfz(u) ** 2
        return math.sqrt(max(v, 0.0))

    z = np.zeros(n)
    for k in range(1, n):
        z[k] = z[k - 1] + quad(integrand, s[k - 1], s[k], **_QUAD_OPTS)[0]
    x = t * (np.asarray(seg.fx(s), float) - float(seg.fx(0.0)))
    table = np.stack([x, sgn * z], axis=1)
    return DeformedSegment(t, table, sgn * z[-1], seg)


# ---------------------------------------------------------------------------
# Closed smooth cross-sections


@dataclass
class SmoothCrossSection:
    """Cyclic list of smooth segments; break points are the segment ends."""

    segments: list

    def __post_init__(self):
        if len(self.segments) < 2:
            raise GeometryError("smooth cross-section needs at least 2 segments")
        scale = max(s.length for s in self.segments)
        for a, b in zip(self.segments, self.segments[1:] + self.segments[:1]):
            if np.linalg.norm(a.end() - b.start()) > 1e-7 * scale:
                raise GeometryError("segments do not close up in order")
        for s in self.segments:
            if s.interior_vertical_tangent():
                raise GeometryError(
                    "interior vertical tangent: split the segment at that point")

    def perimeter(self):
        return float(sum(s.length for s in self.segments))

    def sample_polyline(self, density=64):
        """Closed polyline with `density` vertices per segment."""
        pts = []
        for seg in self.segments:
            s = np.linspace(0.0, seg.length, density + 1)[:-1]
            pts.append(seg.point(s))
        return np.vstack(pts)

    def t_max(self):
        return min(s.t_max() for s in self.segments)


def _resample(seg: SmoothProfileSegment, m=257):
    s = np.linspace(0.0, seg.length, m)
    return seg.point(s)


_TRANSFORMS = {
    "identity": lambda p: p,
    "mirror_x": lambda p: p * np.array([1.0, -1.0]),
    "mirror_z": lambda p: p * np.array([-1.0, 1.0]),
    "rot_180": lambda p: -p,
}


def segment_relations(a: SmoothProfileSegment, b: SmoothProfileSegment,
                      tol: Tolerance = DEFAULT_TOL):
    """All (transform, reversed) matches of b against a, up to translation."""
    if abs(a.length - b.length) > 1e-7 * max(a.length, b.length):
        return []
    pa = _resample(a)
    pb = _resample(b)
    out = []
    for name, T in _TRANSFORMS.items():
        for rev in (False, True):
            q = T(pa[::-1] if rev else pa)
            gap = np.max(np.linalg.norm((q - q[0]) - (pb - pb[0]), axis=1))
            if gap <= 1e-6 * max(1.0, a.length):
                out.append((name, rev))
    return out


@dataclass
class SmoothClassReport:
    classes: list              # each: {"members": [...], "signum_sum": int}
    valid: bool
    offending: tuple
    relations: dict            # (i, j) -> [(transform, reversed)]
    ambiguous: list            # pairs matched by several transforms
    diagnostics: list


def validate_smooth(cs: SmoothCrossSection, tol: Tolerance = DEFAULT_TOL) -> SmoothClassReport:
    """Relation-class check: per class the monotonicity signs must cancel."""
    segs = cs.segments
    n = len(segs)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    relations = {}
    ambiguous = []
    for i in range(n):
        for j in range(i + 1, n):
            rel = segment_relations(segs[i], segs[j], tol)
            if rel:
                relations[(i, j)] = rel
                parent[find(i)] = find(j)
                if len(rel) > 1:
                    ambiguous.append({"pair": (i, j),
                                      "transforms": [RELATION_LABELS[r[0]] for r in rel]})
    groups = {}
    for k in range(n):
        groups.setdefault(find(k), []).append(k)
    classes = []
    offending = []
    diagnostics = []
    for members in groups.values():
        ssum = int(sum(segs[k].mono_sign for k in members))
        classes.append({"members": members, "signum_sum": ssum})
        if ssum != 0:
            offending.append(len(classes) - 1)
            if len(members) == 1:
                diagnostics.append(f"segment {members[0]} has no classmate")
            else:
                diagnostics.append(f"class {members} has signum sum {ssum}")
    return SmoothClassReport(classes, not offending, tuple(offending),
                             relations, ambiguous, diagnostics)


def classmate_deform_gap(a: SmoothProfileSegment, b: SmoothProfileSegment, t):
    """Difference of the deformed Z-extents of two segments (matching oracle)."""
    za = abs(deform_smooth_profile(a, t, n=2).z_run)
    zb = abs(deform_smooth_profile(b, t, n=2).z_run)
    return abs(za - zb)


@dataclass
class SmoothTrajectory:
    """Smooth planar trajectory curve for semi-discrete horizontal sampling."""

    segment: SmoothProfileSegment

    @classmethod
    def from_function(cls, fx, fy, dfx, dfy, length):
        return cls(SmoothProfileSegment(length, fx, fy, dfx, dfy, tag="spline"))

    @classmethod
    def from_samples(cls, pts):
        return cls(SmoothProfileSegment.from_samples(pts))

    def sample(self, density=64):
        s = np.linspace(0.0, self.segment.length, density)
        return self.segment.point(s)


# -- ready-made sections -----------------------------------------------------


def lens_section(radius=1.0, ang0=math.radians(20), ang1=math.radians(70)):
    """Two congruent arcs related by a half-turn, stitched at two corners.

    The angular range must avoid the vertical and horizontal tangents of the
    circle, so both corners are genuine break points.
    """
    if not (0 < ang0 < ang1 < math.pi / 2):
        raise GeometryError("lens arcs need 0 < ang0 < ang1 < pi/2")
    C = -radius * np.array([math.cos(ang0), math.sin(ang0)])   # K1 at the origin
    c1 = SmoothProfileSegment.arc(C, radius, ang0, ang1)
    K2 = c1.end()
    c2 = SmoothProfileSegment.arc(K2 - C, radius, ang0 + math.pi, ang1 + math.pi)
    return SmoothCrossSection([c1, c2])


def arc_kite_section(radius=1.0, ang0=math.radians(20), ang1=math.radians(70)):
    """Four congruent arcs closed through Z-mirror and translate relations.

    Shape: (0,0) -> B -> (2Bx,0) -> (Bx,-Bz) -> (0,0), each side one arc; the
    left/right flanks are Z-axis mirrors, the top/bottom translated copies.
    """
    if not (0 < ang0 < ang1 < math.pi / 2):
        raise GeometryError("arc kite needs 0 < ang0 < ang1 < pi/2")
    R = radius
    C = -R * np.array([math.cos(ang0), math.sin(ang0)])
    c1 = SmoothProfileSegment.arc(C, R, ang0, ang1)
    B = c1.end()
    c2 = SmoothProfileSegment.arc([2 * B[0] - C[0], C[1]], R,
                                  math.pi - ang1, math.pi - ang0)
    c3 = SmoothProfileSegment.arc(C + np.array([B[0], -B[1]]), R, ang1, ang0)
    c4 = SmoothProfileSegment.arc([B[0] - C[0], C[1] - B[1]], R,
                                  math.pi - ang0, math.pi - ang1)
    return SmoothCrossSection([c1, c2, c3, c4])


def asymmetric_two_arc_section(radius=1.0, ang0=math.radians(20),
                               ang1=math.radians(70), warp=0.18):
    """Invalid section: the return segment is a warped spline, not a classmate."""
    C = -radius * np.array([math.cos(ang0), math.sin(ang0)])
    c1 = SmoothProfileSegment.arc(C, radius, ang0, ang1)
    K2 = c1.end()
    s = np.linspace(0.0, 1.0, 33)
    base = K2[None, :] * (1 - s)[:, None]
    bulge = np.stack([np.sin(np.pi * s), np.zeros_like(s)], axis=1) * warp
    c2 = SmoothProfileSegment.from_samples(base - bulge)
    return SmoothCrossSection([c1, c2])
