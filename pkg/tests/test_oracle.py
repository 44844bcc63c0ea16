import math

import numpy as np
import pytest

from thedra.fold import fold, fold_range
from thedra.geom import rigid_gap
from thedra.oracle import continuation_fold
from thedra.section import DiscreteCrossSection
from thedra.trajectory import AxisTrajectory
from thedra.tube import build
from tests.test_tube import RHOMBUS, make_type_iii, zigzag


def check_match(tube, ts):
    for t in ts:
        direct = fold(tube, t).grid
        solved = continuation_fold(tube, t)
        gap = rigid_gap(direct.reshape(-1, 3), solved.reshape(-1, 3))
        assert gap <= 1e-7, f"t={t}: gap {gap:.2e}"


def test_oracle_type_i_rhombic():
    tube = build(RHOMBUS, zigzag(3))
    fr = fold_range(tube)
    check_match(tube, [0.85, 1.1, float(fr.t_max) - 0.05])


def test_oracle_type_ii():
    traj = AxisTrajectory(-1.5, angles=[0.4, 0.5, 0.35], factors=[1.05, 0.95, 1.1])
    tube = build(RHOMBUS, traj)
    check_match(tube, [0.95, 1.15])


def test_oracle_type_iii():
    tube = make_type_iii(steps=3, seed=2)
    check_match(tube, [0.92, 1.12])


def test_oracle_open_profile():
    prof = np.array([(0.0, 0.0), (0.8, 1.1), (1.2, 2.3), (0.6, 3.0)])
    tube = build(prof, zigzag(4, run=0.8, rise=1.2))
    check_match(tube, [0.9, 1.05])
