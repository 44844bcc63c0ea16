"""Closed planar cross-sections in the XZ profile plane.

A discrete cross-section is a closed polyline whose segments are grouped into
classes of equal absolute slope.  A section is compatible with the
one-parameter isometric tube deformation exactly when each class's oriented
lengths (counter-clockwise traversal, ascending segments positive) cancel;
the validator here checks that and reports the class structure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import DEFAULT_TOL, GeometryError, Tolerance, polygon_is_simple, signed_area


@dataclass(frozen=True)
class ProfileSegment:
    """One directed edge of a profile polyline.

    length   -- segment length, > 0
    slope    -- angle of the undirected carrier line to the X-axis, radians in
                (-pi/2, pi/2]; vertical segments carry pi/2
    z_sign   -- sign of the Z-run along the traversal (0 only when horizontal)
    x_sign   -- sign of the X-run along the traversal (0 only when vertical)
    """

    length: float
    slope: float
    z_sign: int
    x_sign: int

    @classmethod
    def from_edge(cls, dx, dz, tol: Tolerance = DEFAULT_TOL):
        s = math.hypot(dx, dz)
        if s == 0.0:
            raise GeometryError("zero-length segment")
        horizontal = abs(dz) <= tol.eps_len * s
        vertical = abs(dx) <= tol.eps_len * s
        if vertical:
            return cls(s, math.pi / 2, int(np.sign(dz)), 0)
        xs = 1 if dx > 0 else -1
        slope = math.atan2(dz * xs, abs(dx))
        return cls(s, 0.0 if horizontal else slope, 0 if horizontal else int(np.sign(dz)), xs)

    @classmethod
    def from_params(cls, length, slope, z_sign):
        """Canonical right-half-plane segment (x_sign = +1, or 0 if vertical)."""
        if length <= 0:
            raise GeometryError("segment length must be positive")
        if not (-math.pi / 2 < slope <= math.pi / 2):
            raise GeometryError("slope must lie in (-pi/2, pi/2]")
        if abs(slope) == math.pi / 2:
            if z_sign == 0:
                raise GeometryError("vertical segment needs a z_sign")
            return cls(length, math.pi / 2, int(z_sign), 0)
        expected = int(np.sign(math.sin(slope)))
        if z_sign != expected:
            raise GeometryError("z_sign must equal sign(sin(slope)) for non-horizontal segments")
        return cls(length, slope, int(z_sign), 1)

    @property
    def abs_slope(self):
        return abs(self.slope)

    @property
    def horizontal(self):
        return self.z_sign == 0

    @property
    def vertical(self):
        return self.x_sign == 0

    def displacement(self):
        """The source edge vector (X-run, Z-run)."""
        if self.vertical:
            return np.array([0.0, self.z_sign * self.length])
        dx = self.x_sign * self.length * math.cos(self.slope)
        dz = self.z_sign * self.length * abs(math.sin(self.slope))
        return np.array([dx, dz])

    @property
    def x_run(self):
        return float(self.displacement()[0])


@dataclass(frozen=True)
class DiscreteCrossSection:
    """Closed profile polyline in the XZ-plane, stored without the repeated endpoint."""

    vertices: np.ndarray
    simple: bool
    reoriented: bool

    @classmethod
    def from_closed_polyline(cls, points, tol: Tolerance = DEFAULT_TOL, enforce_ccw=True):
        """Construct from an explicitly closed list (endpoint repeats the start)."""
        P = np.asarray(points, dtype=float)
        if len(P) < 4:
            raise GeometryError("closed polyline needs at least 3 segments")
        scale = max(1.0, float(np.max(np.abs(P))))
        if np.linalg.norm(P[-1] - P[0]) > tol.eps_len * scale * 10:
            raise GeometryError("open polyline: endpoint does not return to the start")
        return cls.from_points(P, tol, enforce_ccw)

    @classmethod
    def from_points(cls, points, tol: Tolerance = DEFAULT_TOL, enforce_ccw=True):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 3:
            raise GeometryError("cross-section needs at least 3 planar vertices")
        scale = max(1.0, float(np.max(np.abs(P))))
        if np.linalg.norm(P[-1] - P[0]) <= tol.eps_len * scale * 10:
            P = P[:-1]
        if len(P) < 3:
            raise GeometryError("cross-section needs at least 3 segments")
        edges = np.diff(np.vstack([P, P[:1]]), axis=0)
        lens = np.linalg.norm(edges, axis=1)
        if np.any(lens <= tol.eps_len * scale):
            raise GeometryError("zero-length segment in cross-section")
        area = signed_area(P)
        reoriented = False
        if enforce_ccw and area < -tol.eps_len * scale * scale:
            P = P[::-1].copy()
            reoriented = True
        return cls(np.ascontiguousarray(P), polygon_is_simple(P, tol), reoriented)

    def __len__(self):
        return len(self.vertices)

    def edge_vectors(self):
        V = self.vertices
        return np.diff(np.vstack([V, V[:1]]), axis=0)

    def segments(self, tol: Tolerance = DEFAULT_TOL):
        return [ProfileSegment.from_edge(dx, dz, tol) for dx, dz in self.edge_vectors()]

    def perimeter(self):
        return float(np.sum(np.linalg.norm(self.edge_vectors(), axis=1)))


@dataclass
class SlopeClass:
    angle_deg: float
    members: tuple
    oriented_sum: float
    horizontal_members: tuple = ()


@dataclass
class SlopeClassReport:
    classes: list
    valid: bool
    offending: tuple
    at_flexion_limit: bool = False
    lift_signs: dict | None = None
    notes: list = field(default_factory=list)

    def class_of(self, member):
        for k, c in enumerate(self.classes):
            if member in c.members:
                return k
        raise KeyError(member)


def _signed_subset(lengths, target, tol_abs):
    """Signs s_k in {+1,-1} with sum(s_k * lengths_k) ~ target, or None."""
    k = len(lengths)
    if k == 0:
        return [] if abs(target) <= tol_abs else None
    if k <= 18:
        L = np.asarray(lengths)
        masks = np.arange(2 ** k)[:, None]
        bits = (masks >> np.arange(k)) & 1
        sums = ((2 * bits - 1) * L).sum(axis=1)
        hit = np.flatnonzero(np.abs(sums - target) <= tol_abs)
        if len(hit) == 0:
            return None
        return [int(2 * b - 1) for b in ((hit[0] >> np.arange(k)) & 1)]
    # quantized DP for large counts
    q = max(tol_abs / (k + 1), 1e-15)
    reach = {0: []}
    for x in lengths:
        xi = int(round(x / q))
        nxt = {}
        for s, signs in reach.items():
            for sg in (1, -1):
                key = s + sg * xi
                if key not in nxt:
                    nxt[key] = signs + [sg]
        reach = nxt
    ti = int(round(target / q))
    for key, signs in reach.items():
        if abs(key - ti) * q <= tol_abs:
            return signs
    return None


def slope_classes(segments, tol: Tolerance = DEFAULT_TOL):
    """Group segment indices by absolute slope, merging within eps_angle."""
    order = sorted(range(len(segments)), key=lambda k: segments[k].abs_slope)
    groups = []
    for k in order:
        a = segments[k].abs_slope
        if groups and a - segments[groups[-1][-1]].abs_slope <= tol.eps_angle:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def validate_discrete(cs: DiscreteCrossSection, tol: Tolerance = DEFAULT_TOL) -> SlopeClassReport:
    """Slope-class check for closed cross-sections.

    Valid when each class's oriented lengths cancel.  Horizontal segments put
    the section at a flexion limit; validity is then decided on a lifted copy,
    choosing Z-signs for the horizontal members so the class sums still cancel.
    """
    segs = cs.segments(tol)
    if len(segs) < 3:
        raise GeometryError("need at least 3 segments")
    perim = cs.perimeter()
    tol_sum = tol.eps_len * perim * 10
    groups = slope_classes(segs, tol)
    classes = []
    offending = []
    lift_signs = {}
    at_limit = False
    notes = []
    valid = True
    for g in groups:
        horiz = tuple(k for k in g if segs[k].horizontal)
        nonh = [k for k in g if not segs[k].horizontal]
        base = sum(segs[k].z_sign * segs[k].length for k in nonh)
        reported = base + sum(segs[k].x_sign * segs[k].length for k in horiz)
        rep_angle = math.degrees(np.median([segs[k].abs_slope for k in g]))
        classes.append(SlopeClass(rep_angle, tuple(g), reported, horiz))
        if horiz:
            at_limit = True
            signs = _signed_subset([segs[k].length for k in horiz], -base, tol_sum)
            if signs is None:
                valid = False
                offending.append(len(classes) - 1)
            else:
                lift_signs.update(dict(zip(horiz, signs)))
        elif abs(base) > tol_sum:
            valid = False
            offending.append(len(classes) - 1)
    if at_limit:
        notes.append("section sits at a flexion limit (horizontal segments present); "
                     "validated on a lifted copy")
    return SlopeClassReport(classes, valid, tuple(offending), at_limit,
                            lift_signs if at_limit and valid else None, notes)


# ---------------------------------------------------------------------------
# Generators for the three flexible quads


def generate_parallelogram(side, slope_deg, width, tol: Tolerance = DEFAULT_TOL):
    """Parallelogram spanned by a descending and an ascending slant of |slope|."""
    a = math.radians(slope_deg)
    if side <= 0 or width <= 0 or not (0 < slope_deg < 90):
        raise GeometryError("parallelogram needs positive sides and slope in (0, 90)")
    u = np.array([side * math.cos(a), -side * math.sin(a)])
    v = np.array([width * math.cos(a), width * math.sin(a)])
    pts = np.array([[0.0, 0.0], u, u + v, v])
    return DiscreteCrossSection.from_points(pts, tol)


def generate_deltoid(half_width, lower_slope_deg, upper_slope_deg, tol: Tolerance = DEFAULT_TOL):
    """Kite symmetric about the Z-axis; lower and upper sides have distinct slopes."""
    if half_width <= 0:
        raise GeometryError("deltoid needs positive width")
    lo, up = math.radians(lower_slope_deg), math.radians(upper_slope_deg)
    if not (0 < lower_slope_deg < 90 and 0 < upper_slope_deg < 90):
        raise GeometryError("deltoid slopes must lie in (0, 90)")
    if abs(lower_slope_deg - upper_slope_deg) < 1e-12:
        raise GeometryError("degenerate deltoid: equal apex slopes give a flat vertex")
    a = half_width
    zl, zu = a * math.tan(lo), a * math.tan(up)
    pts = np.array([[0.0, 0.0], [a, zl], [0.0, zl + zu], [-a, zl]])
    return DiscreteCrossSection.from_points(pts, tol)


def generate_anti_parallelogram(x_run, z_low, z_high, tol: Tolerance = DEFAULT_TOL):
    """Crossed quad in its X-axis-symmetric position (opposite vertices mirrored)."""
    if x_run <= 0 or z_low <= 0 or z_high <= 0 or abs(z_low - z_high) < 1e-12:
        raise GeometryError("anti-parallelogram needs positive runs and distinct heights")
    pts = np.array([[0.0, z_low], [x_run, z_high], [0.0, -z_low], [x_run, -z_high]])
    return DiscreteCrossSection.from_points(pts, tol, enforce_ccw=False)


def generate(kind, tol: Tolerance = DEFAULT_TOL, **params):
    """Dispatch for the cross-section generators (incl. the composed generator)."""
    if kind == "parallelogram":
        return generate_parallelogram(tol=tol, **params)
    if kind == "deltoid":
        return generate_deltoid(tol=tol, **params)
    if kind == "anti_parallelogram":
        return generate_anti_parallelogram(tol=tol, **params)
    if kind == "composed":
        from .reduce import generate_composed

        return generate_composed(tol=tol, **params)
    raise GeometryError(f"unknown cross-section kind: {kind}")
