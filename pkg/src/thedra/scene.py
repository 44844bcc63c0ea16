"""Scene files: named cross-sections, trajectories, tubes, and assemblies.

JSON is the single interchange format.  Angles in scene files are degrees;
everything internal is radians.  The schema is published by the HTTP service
and used to validate every scene before any geometry runs.
"""
from __future__ import annotations

import json
import math

import jsonschema
import numpy as np

from .geom import DEFAULT_TOL, GeometryError, Tolerance
from .section import DiscreteCrossSection, generate
from .smooth import SmoothCrossSection, SmoothProfileSegment, SmoothTrajectory
from .trajectory import AxisTrajectory, PolylineTrajectory, PrismTrajectory
from .tube import build, build_closed_trajectory_tube, sample_semi_discrete
from .zipper import build_translational_zipper

_POINTS = {"type": "array", "minItems": 2,
           "items": {"type": "array", "minItems": 2, "maxItems": 2,
                     "items": {"type": "number"}}}

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "thedra scene",
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "cross_sections": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["discrete", "generated", "smooth"]},
                    "vertices": _POINTS,
                    "shape": {"enum": ["parallelogram", "deltoid",
                                       "anti_parallelogram", "composed"]},
                    "params": {"type": "object"},
                    "segments": {"type": "array"},
                },
                "required": ["kind"],
            },
        },
        "trajectories": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "type": {"enum": ["I", "II", "III"]},
                    "points": _POINTS,
                    "smooth_points": _POINTS,
                    "closed": {"type": "boolean"},
                    "axis_x": {"type": "number"},
                    "angles_deg": {"type": "array", "items": {"type": "number"}},
                    "factors": {"type": "array", "items": {"type": "number"}},
                    "prism": _POINTS,
                },
                "required": ["type"],
            },
        },
        "tubes": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "profile": {"type": "string"},
                    "trajectory": {"type": "string"},
                    "type": {"enum": ["I", "II", "III"]},
                    "profile_density": {"type": "integer", "minimum": 2},
                    "trajectory_density": {"type": "integer", "minimum": 2},
                    "closed_trajectory": {"type": "boolean"},
                },
                "required": ["profile", "trajectory"],
            },
        },
        "assemblies": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["translational_zipper"]},
                    "profile": {"type": "string"},
                    "edge": {"type": "integer"},
                    "trajectory": {"type": "string"},
                    "partners": {"type": "array", "items": {
                        "type": "object",
                        "properties": {
                            "profile": {"type": ["string", "null"]},
                            "edge": {"type": "integer"},
                            "wing": {"type": "array"},
                            "angle_deg": {"type": "number"},
                        },
                        "required": ["angle_deg"],
                    }},
                },
                "required": ["kind"],
            },
        },
        "sweeps": {"type": "array", "items": {
            "type": "object",
            "properties": {
                "target": {"type": "string"},
                "frames": {"type": "integer", "minimum": 2},
                "output": {"type": "string"},
                "plot": {"type": "boolean"},
            },
            "required": ["target", "frames"],
        }},
    },
    "required": ["version"],
}


class SceneError(GeometryError):
    """Scene file fails schema validation or reference resolution."""


def validate_scene_dict(doc):
    try:
        jsonschema.validate(doc, SCENE_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SceneError(f"scene schema violation at {path}: {e.message}") from e


def load_scene(path):
    with open(path) as f:
        doc = json.load(f)
    validate_scene_dict(doc)
    return doc


def _build_smooth_segment(spec):
    tag = spec.get("tag")
    if tag == "line":
        return SmoothProfileSegment.line(spec["p0"], spec["p1"])
    if tag == "arc":
        return SmoothProfileSegment.arc(spec["center"], spec["radius"],
                                        math.radians(spec["ang0_deg"]),
                                        math.radians(spec["ang1_deg"]))
    if tag == "spline":
        return SmoothProfileSegment.from_samples(np.asarray(spec["points"], float))
    raise SceneError(f"unknown smooth segment tag {tag!r}")


def build_cross_section(spec, tol: Tolerance = DEFAULT_TOL):
    kind = spec["kind"]
    if kind == "discrete":
        return DiscreteCrossSection.from_points(np.asarray(spec["vertices"], float), tol)
    if kind == "generated":
        return generate(spec["shape"], tol=tol, **spec.get("params", {}))
    if kind == "smooth":
        return SmoothCrossSection([_build_smooth_segment(s) for s in spec["segments"]])
    raise SceneError(f"unknown cross-section kind {kind!r}")


def build_trajectory(spec):
    ttype = spec["type"]
    if ttype == "I":
        if "smooth_points" in spec:
            return SmoothTrajectory.from_samples(np.asarray(spec["smooth_points"], float))
        return PolylineTrajectory(np.asarray(spec["points"], float),
                                  closed=spec.get("closed", False))
    angles = tuple(math.radians(a) for a in spec["angles_deg"])
    factors = tuple(spec["factors"])
    if ttype == "II":
        return AxisTrajectory(spec["axis_x"], angles, factors)
    return PrismTrajectory(np.asarray(spec["prism"], float), angles, factors)


class Scene:
    """Resolved scene: named geometry builders with memoized construction."""

    def __init__(self, doc, tol: Tolerance = DEFAULT_TOL):
        validate_scene_dict(doc)
        self.doc = doc
        self.tol = tol
        self._cache = {}

    @classmethod
    def from_file(cls, path, tol: Tolerance = DEFAULT_TOL):
        return cls(load_scene(path), tol)

    def _named(self, section, name):
        table = self.doc.get(section, {})
        if name not in table:
            raise SceneError(f"unresolved reference {name!r} in {section}")
        return table[name]

    def cross_section(self, name):
        key = ("cs", name)
        if key not in self._cache:
            self._cache[key] = build_cross_section(self._named("cross_sections", name),
                                                   self.tol)
        return self._cache[key]

    def trajectory(self, name):
        key = ("traj", name)
        if key not in self._cache:
            self._cache[key] = build_trajectory(self._named("trajectories", name))
        return self._cache[key]

    def tube(self, name):
        key = ("tube", name)
        if key in self._cache:
            return self._cache[key]
        spec = self._named("tubes", name)
        prof = self.cross_section(spec["profile"])
        traj = self.trajectory(spec["trajectory"])
        ttype = spec.get("type", "I")
        if spec.get("closed_trajectory"):
            tube = build_closed_trajectory_tube(prof, traj, self.tol)
        elif isinstance(prof, SmoothCrossSection) or isinstance(traj, SmoothTrajectory):
            tube = sample_semi_discrete(
                prof, traj, ttype,
                profile_density=spec.get("profile_density", 64),
                trajectory_density=spec.get("trajectory_density", 64), tol=self.tol)
        else:
            tube = build(prof, traj, ttype, self.tol)
        self._cache[key] = tube
        return tube

    def assembly(self, name):
        key = ("asm", name)
        if key in self._cache:
            return self._cache[key]
        spec = self._named("assemblies", name)
        if spec["kind"] != "translational_zipper":
            raise SceneError(f"unknown assembly kind {spec['kind']!r}")
        partners = []
        for p in spec.get("partners", []):
            prof = self.cross_section(p["profile"]) if p.get("profile") else None
            edge = p.get("edge", 0) if prof is not None else tuple(p.get("wing", (0.5, 1.0)))
            partners.append((prof, edge, p["angle_deg"]))
        asm = build_translational_zipper(self.cross_section(spec["profile"]),
                                         spec.get("edge", 0),
                                         self.trajectory(spec["trajectory"]),
                                         partners, self.tol)
        self._cache[key] = asm
        return asm

    def targets(self):
        return {"tubes": sorted(self.doc.get("tubes", {})),
                "assemblies": sorted(self.doc.get("assemblies", {})),
                "cross_sections": sorted(self.doc.get("cross_sections", {}))}
