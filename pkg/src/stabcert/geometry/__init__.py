"""Exact polyhedral geometry: rational linear algebra and the cone kernel."""
from .cone import Cone, double_description
from .linalg import RMatrix, RVector, fmt, fmt_mat, fmt_vec, frac, matrix, vector
from .ops import (
    conv_pos,
    contains,
    dd_h_to_v,
    dd_v_to_h,
    face_from_rays,
    face_ray_sets,
    faces_of_cone,
    intersect,
    intersect_all,
    is_trivial,
    linear_image,
    linear_preimage,
    minkowski_diff,
    minkowski_sum,
    polar,
    project_onto_cone,
)
from .polyhedron import PolyhedronH, PolyhedronV, normal_cone_poly, tangent_cone_poly, vrep

__all__ = [
    "Cone", "PolyhedronH", "PolyhedronV", "RMatrix", "RVector",
    "conv_pos", "contains", "dd_h_to_v", "dd_v_to_h", "double_description",
    "face_from_rays", "face_ray_sets", "faces_of_cone", "fmt", "fmt_mat", "fmt_vec",
    "frac", "intersect", "intersect_all", "is_trivial", "linear_image",
    "linear_preimage", "matrix", "minkowski_diff", "minkowski_sum",
    "normal_cone_poly", "polar", "project_onto_cone", "tangent_cone_poly",
    "vector", "vrep",
]
