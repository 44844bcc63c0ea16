import math

import numpy as np
import pytest

from thedra.fold import certify_isometry, fold, switching_states
from thedra.geom import GeometryError
from thedra.section import DiscreteCrossSection
from thedra.trajectory import PolylineTrajectory
from thedra.zipper import (BricardCap, build_bricard_cap, build_nontranslational_zipper,
                           build_translational_zipper, cap_flat_poses, cap_flex_range,
                           flex_bricard_cap, fold_nontranslational_zipper,
                           fold_translational_zipper, pencil_cut_planarity)
from tests.test_tube import RHOMBUS, zigzag

DELTOID = DiscreteCrossSection.from_points([(0, 0), (1, 2), (0, 3), (-1, 2)])


def classic_zipper(angle=90.0, partners=1):
    spec = [(RHOMBUS, 2, angle)]
    if partners == 2:
        spec.append((RHOMBUS, 2, 140.0))
    return build_translational_zipper(RHOMBUS, 0, zigzag(4), spec)


def test_classic_two_tube_zipper_reference():
    zp = classic_zipper()
    st = zp.joint_fold(1.0)
    assert st.max_zip_gap <= 1e-9
    assert st.t_partners[0] == pytest.approx(1.0, abs=1e-9)
    assert st.base_dihedrals[0] == pytest.approx(math.radians(90.0), abs=1e-9)


def test_classic_zipper_sweep_isometric():
    zp = classic_zipper()
    lo, hi = zp.common_range()
    for t in np.linspace(lo, hi, 11):
        st = zp.joint_fold(float(t))
        assert st.max_edge_dev <= 1e-8
        assert st.max_planarity <= 1e-8
        assert st.max_zip_gap <= 1e-8


def test_zipper_dihedral_varies_continuously():
    zp = classic_zipper()
    lo, hi = zp.common_range()
    ds = [zp.joint_fold(float(t)).base_dihedrals[0] for t in np.linspace(lo, hi, 9)]
    steps = np.abs(np.diff(ds))
    assert np.max(steps) < 1.2          # no jumps
    assert np.std(ds) > 1e-4            # and it genuinely moves


def test_three_tube_zip_row():
    zp = classic_zipper(partners=2)
    assert len(zp.partners) == 2
    lo, hi = zp.common_range()
    for t in np.linspace(lo, hi, 11):
        st = zp.joint_fold(float(t))
        assert st.max_zip_gap <= 1e-8
        assert st.max_edge_dev <= 1e-8


def test_auto_parallelogram_partner_zipper():
    zp = build_translational_zipper(RHOMBUS, 0, zigzag(4),
                                    [(None, (0.4, 1.1), 75.0)])
    lo, hi = zp.common_range()
    for t in np.linspace(lo, hi, 7):
        st = zp.joint_fold(float(t))
        assert st.max_zip_gap <= 1e-8


def test_rotated_general_profile_rejected():
    # a deltoid rotated into the partner frame loses its slope-class validity
    with pytest.raises(GeometryError, match="zip placement"):
        build_translational_zipper(RHOMBUS, 0, zigzag(4), [(DELTOID, 3, 75.0)])


def test_smooth_overlap_segment_rejected():
    from thedra.smooth import lens_section
    with pytest.raises(GeometryError, match="straight"):
        build_translational_zipper(RHOMBUS, 0, zigzag(4), [(lens_section(), 0, 90.0)])


def test_ruling_parallel_base_plane_rejected():
    # at 90 degrees the partner base plane contains the 45-degree ruling? no;
    # craft an angle where d lies in beta: slope 45 -> delta = 135 puts the
    # rotated normal orthogonal to d
    with pytest.raises(GeometryError, match="ruling"):
        build_translational_zipper(RHOMBUS, 0, zigzag(4), [(RHOMBUS, 2, 45.0)])


def make_cap(n=4):
    return build_bricard_cap(n)


def test_cap_reference_geometry():
    cap = make_cap(4)
    st = flex_bricard_cap(cap, cap.y1_ref)
    assert st.rim_planarity <= 1e-10
    assert st.apex_collinearity <= 1e-10
    assert np.max(np.abs(st.rim_a[:, 2])) <= 1e-9          # base rim in z = 0
    assert abs(st.plane_b[0][1]) <= 1e-9                   # beta orthogonal to omega


def test_cap_wrap_identity_n8():
    cap = make_cap(8)
    st = flex_bricard_cap(cap, cap.y1_ref)
    for j in range(1, 4):
        assert np.allclose(st.rim_a[j], st.rim_a[j + 4], atol=1e-12)
        assert np.allclose(st.rim_b[j], st.rim_b[j + 4], atol=1e-12)


def test_cap_flexion_keeps_structure():
    cap = make_cap(4)
    lo, hi = cap_flex_range(cap)
    for y in np.linspace(lo + 1e-6, hi - 1e-6, 9):
        st = flex_bricard_cap(cap, float(y))
        assert st.rim_planarity <= 1e-8
        assert st.apex_collinearity <= 1e-8
        assert abs(st.plane_a[0][1]) <= 1e-8               # rims stay orthogonal to omega
        assert abs(st.plane_b[0][1]) <= 1e-8
        # plane symmetry: the anti-parallelogram cycles map to themselves
        for pts in (st.equator_a, st.equator_b):
            refl = pts * np.array([1.0, -1.0, 1.0])
            d = np.linalg.norm(pts[:, None, :] - refl[None, :, :], axis=2)
            assert np.max(np.min(d, axis=1)) <= 1e-8


def test_cap_face_edges_rigid():
    cap = make_cap(5)
    ref = flex_bricard_cap(cap, cap.y1_ref)
    lo, hi = cap_flex_range(cap)
    for y in (0.55 * lo + 0.45 * hi, 0.3 * lo + 0.7 * hi):
        st = flex_bricard_cap(cap, float(y))
        for P, Q in ((ref.rim_a, st.rim_a), (ref.rim_b, st.rim_b)):
            lr = np.linalg.norm(np.diff(P, axis=0), axis=1)
            lc = np.linalg.norm(np.diff(Q, axis=0), axis=1)
            assert np.max(np.abs(lc - lr)) <= 1e-9
        lat_ref = np.linalg.norm(ref.rim_b - ref.rim_a, axis=1)
        lat = np.linalg.norm(st.rim_b - st.rim_a, axis=1)
        assert np.max(np.abs(lat - lat_ref)) <= 1e-9


def test_cap_two_flat_poses():
    cap = make_cap(4)
    flats = cap_flat_poses(cap)
    assert len(flats) == 2
    for y in flats:
        R = cap.rulings(float(y))
        s = np.linalg.svd(R, compute_uv=False)
        assert s[-1] <= 1e-5 * s[0]


def test_cap_pencil_cuts_stay_planar():
    cap = make_cap(4)
    lo, hi = cap_flex_range(cap)
    for y in np.linspace(lo + 1e-4, hi - 1e-4, 5):
        st = flex_bricard_cap(cap, float(y))
        assert pencil_cut_planarity(cap, st) <= 1e-8


def test_nontranslational_zipper_sweep():
    cap = make_cap(4)
    zp = build_nontranslational_zipper(cap)
    lo, hi = cap_flex_range(cap)
    ys = np.linspace(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo), 7)
    for y in ys:
        st = fold_nontranslational_zipper(zp, float(y))
        assert st.rim_gap <= 1e-8
        assert st.max_edge_dev <= 1e-8
        assert st.max_planarity <= 1e-8
        assert st.rim_planarity <= 1e-8
        assert st.apex_collinearity <= 1e-8
        assert st.pencil_planarity <= 1e-8


def test_nontranslational_zipper_prism_variant():
    cap = make_cap(4)
    ref = flex_bricard_cap(cap, cap.y1_ref)
    zp0 = build_nontranslational_zipper(cap)
    ang = zp0.tube_a.trajectory.angles
    # pencil-compatible prism: walk away from the axis along the pencil lines
    w = np.array([ref.rim_a[0, 0] * 0.35, 0.0])
    prism = [w]
    e = np.array([1.0, 0.0])
    for k in range(len(ang) - 1):
        c, s = math.cos(ang[k]), math.sin(ang[k])
        e = np.array([c * e[0] - s * e[1], s * e[0] + c * e[1]])
        prism.append(prism[-1] + 0.3 * e)
    zp = build_nontranslational_zipper(cap, prism=np.array(prism))
    assert zp.prism is not None
    lo, hi = cap_flex_range(cap)
    ys = np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 5)
    for y in ys:
        st = fold_nontranslational_zipper(zp, float(y))
        assert st.rim_gap <= 1e-8
        assert st.max_edge_dev <= 1e-8
        assert st.rim_planarity <= 1e-8
        assert st.apex_collinearity <= 1e-8


def test_cap_flat_pose_is_assembly_bifurcation():
    cap = make_cap(4)
    zp = build_nontranslational_zipper(cap)
    lo, hi = cap_flex_range(cap)
    # at a flat pose the shared segment turns horizontal: the side tube sits at
    # its row-horizontal limit and offers switching branches
    st = fold_nontranslational_zipper(zp, float(hi - 1e-9))
    from thedra.fold import fold_range
    fr = fold_range(zp.tube_a)
    assert st.t_a == pytest.approx(fr.t_max, abs=1e-5)
    branches = switching_states(zp.tube_a, "max")
    assert len(branches) >= 2
