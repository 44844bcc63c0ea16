import math

import numpy as np
import pytest

from thedra.fold import (FoldRangeError, certify_isometry, deform_segment, fold,
                         fold_range, reference_from_state, switching_states)
from thedra.geom import GeometryError, rigid_gap
from thedra.section import DiscreteCrossSection, ProfileSegment, generate
from thedra.trajectory import AxisTrajectory, PolylineTrajectory
from thedra.tube import build
from tests.test_tube import RHOMBUS, make_type_iii, zigzag

SQUARE45 = DiscreteCrossSection.from_points([(0, 0), (1, -1), (2, 0), (1, 1)])


def test_deform_segment_vertical_invariant():
    seg = ProfileSegment.from_params(1.0, math.pi / 2, 1)
    assert np.allclose(deform_segment(seg, 0.5), [0.0, 1.0], atol=1e-15)
    for t in (0.0, 0.3, 2.0, 10.0):
        assert np.allclose(deform_segment(seg, t), [0.0, 1.0], atol=1e-15)


def test_deform_segment_identity_at_reference():
    seg = ProfileSegment.from_params(1.0, math.radians(45), 1)
    assert np.allclose(deform_segment(seg, 1.0),
                       [math.sqrt(2) / 2, math.sqrt(2) / 2], atol=1e-15)


def test_deform_segment_flat_at_limit():
    seg = ProfileSegment.from_params(1.0, math.radians(45), 1)
    out = deform_segment(seg, math.sqrt(2))
    assert np.allclose(out, [1.0, 0.0], atol=1e-12)
    assert out[0] ** 2 + out[1] ** 2 == pytest.approx(1.0, abs=1e-12)


def test_deform_segment_is_isometric():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = rng.normal(size=2)
        seg = ProfileSegment.from_edge(*d)
        tmax = 1.0 / abs(math.cos(seg.slope)) if not seg.vertical else 5.0
        t = rng.uniform(0, tmax)
        out = deform_segment(seg, t)
        assert np.linalg.norm(out) == pytest.approx(seg.length, rel=1e-12)


def test_deform_segment_beyond_limit():
    seg = ProfileSegment.from_params(1.0, math.radians(45), 1)
    with pytest.raises(FoldRangeError):
        deform_segment(seg, 1.5)


def rhombic_tube(n=4):
    return build(SQUARE45, zigzag(n))


def test_fold_range_rhombic():
    fr = fold_range(rhombic_tube())
    assert fr.t_max == pytest.approx(math.sqrt(2), abs=1e-12)
    assert fr.t_min == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert fr.feature_max[0] == "row-horizontal"
    assert fr.feature_min[0] == "column-flat"


def test_fold_range_vertical_profile_unbounded():
    tube = build(np.array([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)]), zigzag(3))
    fr = fold_range(tube)
    assert fr.t_max >= 1e5
    assert fr.feature_max[0] == "unbounded"


def test_fold_range_reference_at_limit_flagged():
    tube = build(np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]),
                 zigzag(3), validate_profile=False)
    fr = fold_range(tube)
    assert fr.t_max == pytest.approx(1.0, abs=1e-12)
    assert "touches flexion limit at reference" in fr.notes


def test_fold_identity():
    tube = rhombic_tube()
    st = fold(tube, 1.0)
    assert np.max(np.abs(st.grid - tube.grid)) <= 1e-12
    assert st.max_edge_dev <= 1e-12 and st.max_planarity <= 1e-12


def test_fold_flat_at_tmax_and_tmin():
    tube = rhombic_tube()
    fr = fold_range(tube)
    flat = fold(tube, fr.t_max)
    assert np.max(np.abs(flat.grid[:, :, 2])) <= 1e-9      # coplanar with base plane
    assert flat.max_edge_dev <= 1e-9
    tall = fold(tube, fr.t_min)
    assert np.max(np.abs(tall.grid[:, :, 1])) <= 1e-9      # coplanar with profile plane
    assert tall.max_edge_dev <= 1e-9


def test_fold_interior_isometric_and_closed():
    tube = rhombic_tube()
    fr = fold_range(tube)
    for t in np.linspace(fr.t_min, fr.t_max, 11):
        st = fold(tube, float(t))
        assert st.max_edge_dev <= 1e-11
        assert st.max_planarity <= 1e-11
        assert st.closure_gap <= 1e-11


def test_fold_beyond_range_reports_feature():
    tube = rhombic_tube()
    with pytest.raises(FoldRangeError) as e:
        fold(tube, 2.0)
    assert e.value.feature == "row-horizontal"
    with pytest.raises(FoldRangeError):
        fold(tube, 0.1)


def test_fold_type_ii_valid_state():
    traj = AxisTrajectory(-1.5, angles=[math.radians(20)] * 5, factors=[1.0] * 5)
    tube = build(SQUARE45, traj)
    st = fold(tube, 1.2)
    assert st.max_edge_dev <= 1e-11
    assert st.max_planarity <= 1e-11
    assert st.closure_gap <= 1e-11


def test_fold_type_ii_with_dilatation():
    traj = AxisTrajectory(-2.0, angles=[0.35, 0.5, 0.3], factors=[1.1, 0.9, 1.2])
    tube = build(SQUARE45, traj)
    fr = fold_range(tube)
    for t in np.linspace(fr.t_min + 1e-3, min(fr.t_max, 1.4), 9):
        st = fold(tube, float(t))
        assert st.max_edge_dev <= 1e-10
        assert st.closure_gap <= 1e-10


def test_fold_type_iii():
    tube = make_type_iii(steps=5, seed=8)
    fr = fold_range(tube)
    assert fr.t_min < 1 < fr.t_max
    for t in np.linspace(fr.t_min + 1e-3, fr.t_max, 8):
        st = fold(tube, float(t))
        assert st.max_edge_dev <= 1e-10
        assert st.max_planarity <= 1e-10
    assert np.max(np.abs(fold(tube, 1.0).grid - tube.grid)) <= 1e-10


def test_fold_type_iii_matches_phi_image_edges():
    # folding a type III tube and its pencil image keeps corresponding edges parallel
    from thedra.tube import map_phi
    t3 = make_type_iii(steps=4, seed=11)
    t2 = map_phi(t3)
    fr3, fr2 = fold_range(t3), fold_range(t2)
    lo, hi = max(fr3.t_min, fr2.t_min) + 1e-3, min(fr3.t_max, fr2.t_max)
    for t in np.linspace(lo, hi, 5):
        g3 = fold(t3, float(t)).grid
        g2 = fold(t2, float(t)).grid
        I, J = t3.shape
        for i in range(I - 1):
            for j in range(J):
                u, v = g3[i + 1, j] - g3[i, j], g2[i + 1, j] - g2[i, j]
                assert np.linalg.norm(np.cross(u, v)) <= 1e-8 * np.linalg.norm(u) * np.linalg.norm(v)


def test_fold_composition_group_property():
    tube = rhombic_tube()
    t1, t2 = 1.2, 0.9
    st1 = fold(tube, t1)
    mid = reference_from_state(tube, st1)
    st12 = fold(mid, t2 / t1)
    st2 = fold(tube, t2)
    assert rigid_gap(st12.grid.reshape(-1, 3), st2.grid.reshape(-1, 3)) <= 1e-8


def test_fold_composition_type_ii():
    traj = AxisTrajectory(-2.0, angles=[0.4, 0.5], factors=[1.1, 0.95])
    tube = build(SQUARE45, traj)
    st1 = fold(tube, 1.15)
    mid = reference_from_state(tube, st1)
    st12 = fold(mid, 0.95 / 1.15)
    st2 = fold(tube, 0.95)
    assert rigid_gap(st12.grid.reshape(-1, 3), st2.grid.reshape(-1, 3)) <= 1e-8


def test_certify_flags_perturbed_vertex():
    tube = rhombic_tube()
    g = tube.grid.copy()
    g[2, 1] += np.array([1e-3, 0, 0])
    rep = certify_isometry(tube, g)
    assert rep.max_dev >= 1e-4


def test_certify_dimension_mismatch():
    tube = rhombic_tube()
    with pytest.raises(GeometryError):
        certify_isometry(tube, tube.grid[:-1])


def test_switching_rhombic_two_branches():
    tube = rhombic_tube()
    states = switching_states(tube, "max")
    horizontal = [s for s in states if s.kind == "horizontal"]
    assert len(horizontal) == 2
    labels = {s.label for s in horizontal}
    assert labels == {"fold back", "flip through"}
    flip = next(s for s in horizontal if s.label == "flip through")
    segs = SQUARE45.segments()
    assert all(flip.segment_signs[k] == -segs[k].z_sign for k in range(4))


def test_switching_deltoid_limited_to_binding_class():
    deltoid = DiscreteCrossSection.from_points([(0, 0), (1, 2), (0, 3), (-1, 2)])
    tube = build(deltoid, zigzag(4))
    states = switching_states(tube, "max")     # only the 45-degree class binds
    assert len(states) == 2
    flipped = next(s for s in states if s.label == "flip through")
    assert flipped.flipped_classes == (45.0,)
    # sign flips stay sum-zero inside the class by construction
    segs = deltoid.segments()
    tot = sum(flipped.segment_signs[k] * segs[k].length for k in range(4)
              if abs(math.degrees(segs[k].abs_slope) - 45) < 1e-6)
    assert tot == pytest.approx(0.0, abs=1e-12)


def test_switching_away_from_limit_errors():
    tube = build(np.array([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)]), zigzag(3))
    with pytest.raises(GeometryError):
        switching_states(tube, "max")


def test_switching_vertical_flagged_theoretical():
    tube = rhombic_tube()
    states = switching_states(tube, "min")
    assert all(s.theoretical for s in states)
    assert all("self-intersection" in s.warning for s in states)
