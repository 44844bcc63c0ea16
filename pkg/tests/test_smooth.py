import math

import numpy as np
import pytest

from thedra.geom import FoldRangeError, GeometryError
from thedra.smooth import (SmoothCrossSection, SmoothProfileSegment, SmoothTrajectory,
                           arc_kite_section, asymmetric_two_arc_section,
                           classmate_deform_gap, deform_smooth_profile, lens_section,
                           segment_relations, validate_smooth)


def quarter_circle():
    # from (1,0) up to (0,1) around the origin, avoiding tangent extremes inside
    return SmoothProfileSegment.arc([0.0, 0.0], 1.0, 0.0, math.pi / 2)


def test_unit_speed_enforced():
    with pytest.raises(GeometryError):
        SmoothProfileSegment(1.0,
                             fx=lambda s: 2 * np.asarray(s, float),
                             fz=lambda s: np.zeros_like(np.asarray(s, float)),
                             dfx=lambda s: np.full_like(np.asarray(s, float), 2.0),
                             dfz=lambda s: np.zeros_like(np.asarray(s, float)),
                             tag="line")


def test_vertical_line_segment_fixed_for_all_t():
    seg = SmoothProfileSegment.line([0.0, 0.0], [0.0, 1.0])
    for t in (0.0, 0.5, 1.0, 3.0):
        d = deform_smooth_profile(seg, t, n=17)
        assert np.allclose(d.samples[:, 0], 0.0, atol=1e-14)
        assert d.z_run == pytest.approx(1.0, abs=1e-12)


def test_quarter_circle_unrolls_at_t0():
    seg = quarter_circle()
    d = deform_smooth_profile(seg, 0.0, n=33)
    # the segment straightens onto the Z-axis with its full arc length
    assert np.allclose(d.samples[:, 0], 0.0, atol=1e-14)
    assert abs(d.z_run) == pytest.approx(math.pi / 2, abs=1e-11)
    gaps = np.diff(d.samples[:, 1])
    assert np.allclose(gaps, gaps[0], atol=1e-11)       # uniform speed along Z


def test_quarter_circle_arclength_preserved():
    seg = quarter_circle()
    for t in (0.0, 0.5, 0.9 * seg.t_max()):
        d = deform_smooth_profile(seg, t, n=65)
        assert d.arclength() == pytest.approx(math.pi / 2, rel=1e-10)


def test_deform_beyond_limit_rejected():
    seg = quarter_circle()
    with pytest.raises(FoldRangeError):
        deform_smooth_profile(seg, seg.t_max() * 1.01)


def test_non_unit_speed_spline_rejected_by_construction():
    # from_samples reparametrizes, so the result is unit speed by construction
    pts = np.stack([np.linspace(0, 1, 16), np.linspace(0, 2, 16) ** 1.2 + 0.01], axis=1)
    seg = SmoothProfileSegment.from_samples(pts)
    s = np.linspace(0, seg.length, 40)
    assert np.allclose(np.hypot(seg.dfx(s), seg.dfz(s)), 1.0, atol=1e-8)


def test_lens_section_valid_half_turn():
    cs = lens_section()
    rep = validate_smooth(cs)
    assert rep.valid
    assert len(rep.classes) == 1
    rel = rep.relations[(0, 1)]
    assert any(name == "rot_180" for name, _ in rel)


def test_arc_kite_section_valid_with_mirror_relation():
    cs = arc_kite_section()
    rep = validate_smooth(cs)
    assert rep.valid
    assert any(name == "mirror_z" for name, _ in rep.relations[(0, 1)])
    for c in rep.classes:
        assert c["signum_sum"] == 0


def test_asymmetric_oval_invalid_with_deform_gap():
    cs = asymmetric_two_arc_section()
    rep = validate_smooth(cs)
    assert not rep.valid
    assert rep.diagnostics
    # independent oracle: the deformed halves end at different heights
    gap = classmate_deform_gap(cs.segments[0], cs.segments[1], 0.5)
    assert gap > 1e-3


def test_classmate_pair_z_heights_match_under_deformation():
    cs = lens_section()
    a, b = cs.segments
    for t in (0.0, 0.5, 0.9 * cs.t_max()):
        assert classmate_deform_gap(a, b, t) <= 1e-9


def test_interior_horizontal_tangent_rejected():
    with pytest.raises(GeometryError):
        SmoothProfileSegment.arc([0.0, 0.0], 1.0, math.radians(45), math.radians(135))


def test_interior_vertical_tangent_needs_split():
    seg = SmoothProfileSegment.arc([0.0, 0.0], 1.0, -math.radians(45), math.radians(45))
    partner = SmoothProfileSegment.line(seg.end(), seg.start())
    with pytest.raises(GeometryError):
        SmoothCrossSection([seg, partner])


def test_relation_detection_is_symmetric_and_transitive():
    cs = arc_kite_section()
    segs = cs.segments
    rel01 = segment_relations(segs[0], segs[1])
    rel10 = segment_relations(segs[1], segs[0])
    assert bool(rel01) == bool(rel10)
    # transitivity through the union-find: everything lands in one class
    rep = validate_smooth(cs)
    assert len(rep.classes) == 1
    assert sorted(rep.classes[0]["members"]) == [0, 1, 2, 3]


def test_smooth_trajectory_sampling():
    s = np.linspace(0, 1, 64)
    pts = np.stack([3 * s, 0.6 * np.sin(2.2 * s) + 0.9 * s], axis=1)
    traj = SmoothTrajectory.from_samples(pts)
    out = traj.sample(16)
    assert out.shape == (16, 2)
    assert np.allclose(out[0], pts[0], atol=1e-9)
