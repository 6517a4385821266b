"""Histogram gradient boosting for multiclass classification."""
from .binning import MAX_BINS_LIMIT, BinnedMatrix, apply_bins, bin_features
from .booster import (
    BoostedModel,
    TrainParams,
    detect_hard_classes,
    predict_label,
    predict_proba,
    predict_raw,
    train,
)
from .io import (
    FORMAT_VERSION,
    ModelFormatError,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .objective import (
    HESS_FLOOR,
    LossSpec,
    compute_class_weights,
    grad_hess,
    softmax,
    weighted_cross_entropy,
)
from .sampling import goss_sample
from .tree import Tree, grow_tree

__all__ = [
    "MAX_BINS_LIMIT",
    "BinnedMatrix",
    "apply_bins",
    "bin_features",
    "BoostedModel",
    "TrainParams",
    "detect_hard_classes",
    "predict_label",
    "predict_proba",
    "predict_raw",
    "train",
    "FORMAT_VERSION",
    "ModelFormatError",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "HESS_FLOOR",
    "LossSpec",
    "compute_class_weights",
    "grad_hess",
    "softmax",
    "weighted_cross_entropy",
    "goss_sample",
    "Tree",
    "grow_tree",
]
