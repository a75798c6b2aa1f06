"""Point cloud sequence toolkit: pseudo-labeling, synthesis, sampling,
loss kernels and 4D association metrics."""

try:
    # installed layout: the extension lives inside this package
    from . import _seq4d as _ext
except ImportError:
    # build-tree layout: the extension sits directly on PYTHONPATH
    import _seq4d as _ext

__all__ = [
    "LossWeights",
    "aabb_overlap",
    "bce_loss",
    "bev_aabb",
    "build_validmap",
    "centroid",
    "config_defaults",
    "confidence_weight",
    "consistency_loss",
    "cost_matrix",
    "dbscan",
    "dice_coefficient",
    "evaluate_labels",
    "hungarian",
    "motion_weights",
    "sample_pairs",
    "scaled_bce",
    "scaled_dice",
    "segment_ground",
    "softmax_query_distribution",
    "total_loss",
    "transform_points",
    "voxel_downsample",
]

for _name in __all__:
    globals()[_name] = getattr(_ext, _name)
del _name
