"""Grasp retargeting, distance-matrix coding and grasp evaluation."""

from ._graspforge import (
    GraspforgeError,
    Hand,
    InvariantError,
    TriMesh,
    d2_histogram,
    force_closure_epsilon,
    icp,
    load_mesh,
    make_box,
    make_icosphere,
    multilaterate,
    sample_surface,
    save_obj,
    signed_distance,
    wasserstein_1d,
)

__all__ = [
    "GraspforgeError",
    "Hand",
    "InvariantError",
    "TriMesh",
    "d2_histogram",
    "force_closure_epsilon",
    "icp",
    "load_mesh",
    "make_box",
    "make_icosphere",
    "multilaterate",
    "sample_surface",
    "save_obj",
    "signed_distance",
    "wasserstein_1d",
]
