"""Rigid-foldable tubular structures: construction, folding, and coupling."""

from .geom import (DEFAULT_TOL, FoldRangeError, GeometryError, QuadFace, RigidMotion,
                   Tolerance, planarity_deviation, polyline_arclength)
from .section import (DiscreteCrossSection, ProfileSegment, SlopeClassReport, generate,
                      validate_discrete)
from .reduce import Decomposition, decompose, generate_composed, recompose
from .smooth import (SmoothCrossSection, SmoothProfileSegment, SmoothTrajectory,
                     deform_smooth_profile, validate_smooth)
from .trajectory import AxisTrajectory, PolylineTrajectory, PrismTrajectory
from .tube import (THedralTube, build, build_closed_trajectory_tube, map_phi,
                   map_phi_inverse, sample_semi_discrete)
from .fold import (FoldRange, FoldState, certify_isometry, deform_segment, fold,
                   fold_closure_gap, fold_range, fold_with_scalars,
                   reference_from_state, switching_states)
from .couple import (AlignedAssembly, EdgeShareSpec, couple_aligned, metamaterial_array,
                     translation_stack, validate_edge_share)
from .zipper import (BricardCap, TranslationalZipper, ZipRow, build_bricard_cap,
                     build_nontranslational_zipper, build_translational_zipper,
                     cap_flat_poses, cap_flex_range, flex_bricard_cap,
                     fold_nontranslational_zipper, fold_translational_zipper)
from .scene import SCENE_SCHEMA, Scene, build_cross_section, build_trajectory

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
