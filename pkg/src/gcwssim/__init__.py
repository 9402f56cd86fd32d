"""Geometric CW-SSIM distances and k-medoids clustering for visual objects.

Pipeline: complex wavelet decomposition -> windowed structural similarity
-> t-nn neighbor graph -> all-pairs geodesics -> k-medoids with restarts
-> pair-counting evaluation. See the README for the CLI walkthrough.
"""

from ._kernels import active_backend as kernel_backend
from .cluster import ClusteringResult, assign, kmedoids, kmedoids_restarts, update_medoids
from .cwssim import CwSsimConfig, cwssim_distance, global_cwssim, local_cwssim
from .data import (
    DataError,
    GrayImage,
    LabeledDataset,
    load_dataset,
    load_image,
    save_dataset,
    save_image,
    subset_by_labels,
    synth_rotated_set,
)
from .manifold import (
    DisconnectedGraphError,
    DistanceMatrix,
    MatrixKind,
    NeighborGraph,
    all_pairs_geodesic,
    bridge_components,
    gcwssim_matrix,
    geodesic_l2_matrix,
    geodesic_matrix,
    knn_graph,
    pairwise_cwssim,
    pairwise_l2,
)
from .matrixio import read_gdm, write_csv, write_gdm
from .metrics import EvalReport, error_rate, evaluate, false_association_rate, true_association_rate
from .wavelet import ComplexPyramid, PyramidConfig, build_pyramid

__version__ = "0.1.0"

__all__ = [
    "ClusteringResult",
    "ComplexPyramid",
    "CwSsimConfig",
    "DataError",
    "DisconnectedGraphError",
    "DistanceMatrix",
    "EvalReport",
    "GrayImage",
    "LabeledDataset",
    "MatrixKind",
    "NeighborGraph",
    "PyramidConfig",
    "all_pairs_geodesic",
    "assign",
    "bridge_components",
    "build_pyramid",
    "cwssim_distance",
    "error_rate",
    "evaluate",
    "false_association_rate",
    "gcwssim_matrix",
    "geodesic_l2_matrix",
    "geodesic_matrix",
    "global_cwssim",
    "kernel_backend",
    "kmedoids",
    "kmedoids_restarts",
    "knn_graph",
    "load_dataset",
    "load_image",
    "local_cwssim",
    "pairwise_cwssim",
    "pairwise_l2",
    "read_gdm",
    "save_dataset",
    "save_image",
    "subset_by_labels",
    "synth_rotated_set",
    "true_association_rate",
    "update_medoids",
    "write_csv",
    "write_gdm",
]
