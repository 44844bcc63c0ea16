"""Command line interface: validate, build, fold, sweep, limits, export, serve."""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .geom import DEFAULT_TOL, FoldRangeError, GeometryError
from .fold import fold, fold_range
from .objio import frame_record, frames_json_bytes, write_obj
from .scene import Scene, SceneError
from .section import DiscreteCrossSection, validate_discrete
from .smooth import SmoothCrossSection, validate_smooth
from .zipper import TranslationalZipper

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2


def _load(path):
    return Scene.from_file(path)


def _report_to_dict(rep):
    if hasattr(rep, "classes") and rep.classes and hasattr(rep.classes[0], "angle_deg"):
        return {
            "valid": rep.valid,
            "at_flexion_limit": rep.at_flexion_limit,
            "classes": [{"angle_deg": c.angle_deg, "members": list(c.members),
                         "oriented_sum": c.oriented_sum} for c in rep.classes],
            "offending_classes": list(rep.offending),
            "notes": rep.notes,
        }
    return {
        "valid": rep.valid,
        "classes": rep.classes,
        "offending_classes": list(rep.offending),
        "diagnostics": rep.diagnostics,
        "ambiguous_relations": rep.ambiguous,
    }


def cmd_validate(args):
    scene = _load(args.scene)
    cs = scene.cross_section(args.target)
    if isinstance(cs, SmoothCrossSection):
        rep = validate_smooth(cs)
    else:
        rep = validate_discrete(cs)
    doc = _report_to_dict(rep)
    print(json.dumps(doc, indent=2, sort_keys=True))
    if not rep.valid:
        bad = ", ".join(str(k) for k in rep.offending)
        print(f"INVALID: offending classes [{bad}]", file=sys.stderr)
        return EXIT_INVALID
    print("VALID", file=sys.stderr)
    return EXIT_OK


def _target(scene, name):
    if name in scene.doc.get("tubes", {}):
        return scene.tube(name)
    if name in scene.doc.get("assemblies", {}):
        return scene.assembly(name)
    raise SceneError(f"no tube or assembly named {name!r}")


def cmd_build(args):
    scene = _load(args.scene)
    tube = scene.tube(args.target)
    I, J = tube.shape
    print(json.dumps({"target": args.target, "type": tube.ttype,
                      "grid": [I, J], "closed_profile": tube.closed_j,
                      "closed_trajectory": tube.closed_i,
                      "faces": len(tube.face_indices())}, indent=2))
    if args.out:
        write_obj(args.out, tube.grid, tube.face_indices(), comment=args.target)
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_limits(args):
    scene = _load(args.scene)
    tube = scene.tube(args.target)
    fr = fold_range(tube)
    print(json.dumps({
        "t_min": fr.t_min, "t_max": fr.t_max,
        "limit_min": None if fr.feature_min is None else list(fr.feature_min),
        "limit_max": None if fr.feature_max is None else list(fr.feature_max),
        "notes": list(fr.notes)}, indent=2))
    return EXIT_OK


def cmd_fold(args):
    scene = _load(args.scene)
    tube = scene.tube(args.target)
    st = fold(tube, args.t)
    rec = frame_record(st.t, st.grid, _residuals(st))
    if args.out:
        write_obj(args.out, st.grid, tube.face_indices(),
                  comment=f"{args.target} t={args.t}")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def _residuals(st):
    return {"max_edge_dev": st.max_edge_dev, "max_planarity": st.max_planarity,
            "closure_gap": st.closure_gap,
            "closure_gap_trajectory": st.closure_gap_trajectory}


def _sweep_frames(tube, n):
    fr = fold_range(tube)
    ts = np.linspace(fr.t_min, fr.t_max, n)
    out = []
    for t in ts:
        st = fold(tube, float(t))
        at_limit = bool(abs(t - fr.t_min) < 1e-12 or abs(t - fr.t_max) < 1e-12)
        out.append((st, {"at_limit": at_limit}))
    return out


def cmd_sweep(args):
    if args.frames < 2:
        print("sweep needs at least 2 frames", file=sys.stderr)
        return EXIT_ERROR
    scene = _load(args.scene)
    target = _target(scene, args.target)
    os.makedirs(args.out, exist_ok=True)
    records = []
    wrote = []
    if isinstance(target, TranslationalZipper):
        lo, hi = target.common_range()
        for k, t in enumerate(np.linspace(lo, hi, args.frames)):
            st = target.joint_fold(float(t))
            for m, grid in enumerate(st.grids):
                tube = target.tube_a if m == 0 else target.partners[m - 1].tube
                path = os.path.join(args.out, f"{args.target}_{k:04d}_tube{m}.obj")
                wrote.append(write_obj(path, grid, tube.face_indices()))
            records.append(frame_record(st.t_a, st.grids[0], {
                "max_edge_dev": st.max_edge_dev, "max_planarity": st.max_planarity,
                "zip_gap": st.max_zip_gap}))
        face_idx = target.tube_a.face_indices()
    else:
        tube = target
        for k, (st, flags) in enumerate(_sweep_frames(tube, args.frames)):
            path = os.path.join(args.out, f"{args.target}_{k:04d}.obj")
            wrote.append(write_obj(path, st.grid, tube.face_indices()))
            records.append(frame_record(st.t, st.grid, _residuals(st), flags))
        face_idx = tube.face_indices()
    frames_path = os.path.join(args.out, f"{args.target}_frames.json")
    with open(frames_path, "wb") as f:
        f.write(frames_json_bytes(records))
    if args.plot or args.report:
        from .report import render_sweep
        render_sweep(args.out, args.target, records, face_idx, plot=args.plot)
    print(json.dumps({"frames": len(records), "out": args.out}, indent=2))
    return EXIT_OK


def cmd_export(args):
    scene = _load(args.scene)
    tube = scene.tube(args.target)
    if args.obj:
        write_obj(args.obj, tube.grid, tube.face_indices(), comment=args.target)
        print(f"wrote {args.obj}", file=sys.stderr)
    if args.json:
        rec = frame_record(1.0, tube.grid,
                           {"max_edge_dev": 0.0, "max_planarity": 0.0})
        with open(args.json, "wb") as f:
            f.write(frames_json_bytes([rec]))
        print(f"wrote {args.json}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    scene_doc = None
    if args.scene:
        from .scene import load_scene

        scene_doc = load_scene(args.scene)
    uvicorn.run(create_app(scene_doc), host=args.host, port=args.port)
    return EXIT_OK


def make_parser():
    p = argparse.ArgumentParser(
        prog="thedra",
        description="Rigid-foldable tubular structures: build, fold, couple, export.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="slope-class validation of a cross-section")
    v.add_argument("scene")
    v.add_argument("target")
    v.set_defaults(fn=cmd_validate)

    b = sub.add_parser("build", help="build a tube and optionally export OBJ")
    b.add_argument("scene")
    b.add_argument("target")
    b.add_argument("--out")
    b.set_defaults(fn=cmd_build)

    li = sub.add_parser("limits", help="admissible fold range of a tube")
    li.add_argument("scene")
    li.add_argument("target")
    li.set_defaults(fn=cmd_limits)

    f = sub.add_parser("fold", help="fold a tube to a given parameter")
    f.add_argument("scene")
    f.add_argument("target")
    f.add_argument("--t", type=float, required=True)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_fold)

    s = sub.add_parser("sweep", help="uniform fold sweep with OBJ/JSON export")
    s.add_argument("scene")
    s.add_argument("target")
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--out", default="sweep_out")
    s.add_argument("--plot", action="store_true",
                   help="render a PNG per frame next to the residual table")
    s.add_argument("--report", action="store_true",
                   help="write the residual table without figures")
    s.set_defaults(fn=cmd_sweep)

    e = sub.add_parser("export", help="export a built tube")
    e.add_argument("scene")
    e.add_argument("target")
    e.add_argument("--obj")
    e.add_argument("--json")
    e.set_defaults(fn=cmd_export)

    sv = sub.add_parser("serve", help="run the local HTTP service")
    sv.add_argument("--scene")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int,
                    default=int(os.environ.get("THEDRA_PORT", "8077")))
    sv.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SceneError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except FoldRangeError as e:
        print(f"fold range error: {e} (feature={e.feature}, index={e.index})",
              file=sys.stderr)
        return EXIT_ERROR
    except GeometryError as e:
        print(f"geometry error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
