"""Local HTTP service backing the interactive designer.

All endpoints are stateless: each request carries the scene it needs (or a
bare cross-section), and every geometry response includes the residual summary
so a client can surface validity live.  Schema violations are 400s; geometry
violations are 422s carrying the library error verbatim.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .geom import DEFAULT_TOL, FoldRangeError, GeometryError
from .fold import fold, fold_range
from .objio import frame_record
from .scene import (SCENE_SCHEMA, Scene, SceneError, build_cross_section,
                    validate_scene_dict)
from .section import validate_discrete
from .smooth import SmoothCrossSection, validate_smooth
from .cli import _report_to_dict, _residuals


def _scene_from(payload):
    doc = payload.get("scene")
    if doc is None:
        raise SceneError("payload needs a 'scene' object")
    return Scene(doc)


def _mesh_dict(tube):
    return {
        "type": tube.ttype,
        "shape": list(tube.shape),
        "closed_profile": tube.closed_j,
        "closed_trajectory": tube.closed_i,
        "vertices": np.asarray(tube.grid, float).reshape(-1).tolist(),
        "faces": [list(q) for q in tube.face_indices()],
    }


def create_app(default_scene=None):
    app = FastAPI(title="thedra", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    def scene_of(payload):
        if "scene" in payload and payload["scene"] is not None:
            return Scene(payload["scene"])
        if default_scene is not None:
            return Scene(default_scene)
        raise SceneError("payload needs a 'scene' object")

    @app.exception_handler(SceneError)
    async def _scene_err(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(GeometryError)
    async def _geom_err(request, exc):
        detail = {"detail": str(exc)}
        if isinstance(exc, FoldRangeError):
            detail["feature"] = exc.feature
            detail["index"] = exc.index
        return JSONResponse(status_code=422, content=detail)

    @app.get("/schema")
    def schema():
        return SCENE_SCHEMA

    @app.post("/validate")
    def validate(payload: dict):
        if "cross_section" in payload and isinstance(payload["cross_section"], dict):
            cs = build_cross_section(payload["cross_section"])
        else:
            scene = scene_of(payload)
            cs = scene.cross_section(payload.get("target", ""))
        rep = validate_smooth(cs) if isinstance(cs, SmoothCrossSection) \
            else validate_discrete(cs)
        return _report_to_dict(rep)

    @app.post("/tube")
    def tube(payload: dict):
        scene = scene_of(payload)
        name = payload.get("tube")
        if not name:
            raise SceneError("payload needs a 'tube' name")
        tb = scene.tube(name)
        fr = fold_range(tb)
        out = _mesh_dict(tb)
        out["fold_range"] = {"t_min": fr.t_min, "t_max": fr.t_max,
                             "notes": list(fr.notes)}
        return out

    @app.post("/fold")
    def fold_ep(payload: dict):
        scene = scene_of(payload)
        tb = scene.tube(payload.get("tube", ""))
        t = payload.get("t")
        if not isinstance(t, (int, float)):
            raise SceneError("payload needs a numeric 't'")
        st = fold(tb, float(t))
        return frame_record(st.t, st.grid, _residuals(st))

    @app.post("/sweep")
    def sweep_ep(payload: dict):
        scene = scene_of(payload)
        tb = scene.tube(payload.get("tube", ""))
        n = int(payload.get("frames", 0))
        if n < 2:
            raise SceneError("sweep needs at least 2 frames")
        fr = fold_range(tb)
        frames = []
        for t in np.linspace(fr.t_min, fr.t_max, n):
            st = fold(tb, float(t))
            frames.append(frame_record(st.t, st.grid, _residuals(st)))
        return {"frames": frames, "faces": [list(q) for q in tb.face_indices()],
                "t_min": fr.t_min, "t_max": fr.t_max}

    @app.post("/limits")
    def limits_ep(payload: dict):
        scene = scene_of(payload)
        tb = scene.tube(payload.get("tube", ""))
        fr = fold_range(tb)
        from .fold import switching_states
        branches = {}
        for end in ("min", "max"):
            try:
                branches[end] = [
                    {"kind": s.kind, "label": s.label,
                     "flipped_classes": list(s.flipped_classes),
                     "theoretical": s.theoretical}
                    for s in switching_states(tb, end)]
            except GeometryError:
                branches[end] = []
        return {"t_min": fr.t_min, "t_max": fr.t_max,
                "limit_min": fr.feature_min, "limit_max": fr.feature_max,
                "notes": list(fr.notes), "switching": branches}

    @app.post("/assembly")
    def assembly_ep(payload: dict):
        scene = scene_of(payload)
        asm = scene.assembly(payload.get("assembly", ""))
        lo, hi = asm.common_range()
        t = float(payload.get("t", 1.0))
        st = asm.joint_fold(t)
        tubes = [asm.tube_a] + [p.tube for p in asm.partners]
        return {
            "t_range": [lo, hi],
            "t": st.t_a,
            "t_partners": st.t_partners,
            "residuals": {"max_edge_dev": st.max_edge_dev,
                          "max_planarity": st.max_planarity,
                          "zip_gap": st.max_zip_gap},
            "base_dihedrals_deg": [float(np.degrees(d)) for d in st.base_dihedrals],
            "meshes": [{"vertices": g.reshape(-1).tolist(),
                        "faces": [list(q) for q in tb.face_indices()],
                        "shape": list(g.shape[:2])}
                       for g, tb in zip(st.grids, tubes)],
        }

    return app


app = create_app()
