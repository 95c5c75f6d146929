"""Quantitative rectifiability experiments in the Heisenberg group H^k.

Core layers:

* :mod:`hkrect.hgroup`   group law, dilations, Koranyi gauge
* :mod:`hkrect.frames`   vertical/horizontal splittings and cone families
* :mod:`hkrect.graphs`   intrinsic Lipschitz graph synthesis and checks
* :mod:`hkrect.cubes`    Christ dyadic cube systems on point clouds
* :mod:`hkrect.beta`     bilateral beta-numbers over hyperplane families
* :mod:`hkrect.carleson` Carleson integrals, packing ratios, I-functional
* :mod:`hkrect.pipeline` synthetic big-piece sets and end-to-end reports
* :mod:`hkrect.cli`      command-line front end
"""

from .hgroup import (
    GroupDim,
    Point,
    compose,
    dilate,
    distance,
    horizontal_isometry,
    invert,
    koranyi_norm,
    symplectic,
)
from .frames import (
    ConeSpec,
    Frame,
    cone_gauge,
    cone_inclusion_search,
    cone_member,
    frame_isometry,
    proj_line,
    proj_vertical,
)
from .cloud import PointCloud, SampleWindow, load_cloud, save_cloud
from .graphs import (
    GraphSpec,
    ahlfors_ratio,
    cone_condition_check,
    condition_b_witness,
    graph_function_recover,
    graph_point,
    make_bump_graph,
    sample_graph,
    vertical_plane_cloud,
)
from .cubes import CubeTree, build_cube_tree, cube_mass_ratio, verify_cube_axioms
from .beta import (
    AffinePlane,
    BetaValue,
    SearchBudget,
    VerticalPlane,
    beta_for_cube,
    beta_profile,
    bilateral_beta,
    dist_point_to_plane,
)
from .carleson import (
    CarlesonQuery,
    bad_cube_set,
    carleson_integral_estimate,
    comparison_condition_check,
    i_functional,
    packing_ratio,
)
from .pipeline import (
    BPiLGSpec,
    PieceRecipe,
    bwgl_report,
    stopping_time_profile,
    synth_bpilg_set,
    transfer_inequality_check,
)

__version__ = "0.1.0"

__all__ = [
    "GroupDim", "Point", "compose", "invert", "dilate", "symplectic",
    "koranyi_norm", "distance", "horizontal_isometry",
    "Frame", "ConeSpec", "proj_vertical", "proj_line", "cone_gauge",
    "cone_member", "cone_inclusion_search", "frame_isometry",
    "PointCloud", "SampleWindow", "load_cloud", "save_cloud",
    "GraphSpec", "graph_point", "sample_graph", "cone_condition_check",
    "graph_function_recover", "condition_b_witness", "ahlfors_ratio",
    "make_bump_graph", "vertical_plane_cloud",
    "CubeTree", "build_cube_tree", "verify_cube_axioms", "cube_mass_ratio",
    "VerticalPlane", "AffinePlane", "SearchBudget", "BetaValue",
    "dist_point_to_plane", "bilateral_beta", "beta_for_cube", "beta_profile",
    "CarlesonQuery", "carleson_integral_estimate", "packing_ratio",
    "bad_cube_set", "i_functional", "comparison_condition_check",
    "BPiLGSpec", "PieceRecipe", "synth_bpilg_set", "transfer_inequality_check",
    "stopping_time_profile", "bwgl_report",
    "__version__",
]
