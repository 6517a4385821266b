"""Versioned JSON persistence for boosted models.

The on-disk form is a single JSON document. Floats are written with
repr-level precision so a save/load round trip reproduces predictions bit
for bit. format_version gates loading; unknown versions are rejected.
"""
from __future__ import annotations

import json
import os
from typing import Union

import numpy as np

from .booster import BoostedModel, TrainParams
from .objective import LossSpec
from .tree import Tree

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file is malformed or from an unknown version."""


def _tree_to_dict(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "default_left": tree.default_left.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_dict(obj: dict) -> Tree:
    return Tree(
        feature=np.asarray(obj["feature"], dtype=np.int32),
        threshold=np.asarray(obj["threshold"], dtype=np.int32),
        left=np.asarray(obj["left"], dtype=np.int32),
        right=np.asarray(obj["right"], dtype=np.int32),
        default_left=np.asarray(obj["default_left"], dtype=bool),
        value=np.asarray(obj["value"], dtype=np.float64),
    )


def model_to_dict(model: BoostedModel) -> dict:
    """JSON-ready dict for one model; shared by file and ensemble IO."""
    params = model.params
    return {
        "format_version": FORMAT_VERSION,
        "model_type": "boosted_trees_multiclass",
        "classes": [int(c) for c in model.classes],
        "init_score": model.init_score.tolist(),
        "round_scales": [float(s) for s in model.round_scales],
        "bin_edges": [e.tolist() for e in model.bin_edges],
        "class_weights": model.class_weights.tolist(),
        "best_iteration": int(model.best_iteration),
        "params": {
            "learning_rate": params.learning_rate,
            "num_leaves": params.num_leaves,
            "max_rounds": params.max_rounds,
            "min_data_in_leaf": params.min_data_in_leaf,
            "l2_regularization": params.l2_regularization,
            "feature_fraction": params.feature_fraction,
            "bagging_fraction": params.bagging_fraction,
            "top_rate": params.top_rate,
            "other_rate": params.other_rate,
            "max_bins": params.max_bins,
            "early_stop_rounds": params.early_stop_rounds,
            "seed": params.seed,
        },
        "history": {k: list(v) for k, v in model.history.items()},
        "trees": [[_tree_to_dict(t) for t in rnd] for rnd in model.trees],
    }


def model_from_dict(obj: dict) -> BoostedModel:
    if not isinstance(obj, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format_version {version!r}; expected {FORMAT_VERSION}"
        )
    try:
        params = TrainParams(**obj["params"])
        model = BoostedModel(
            classes=np.asarray(obj["classes"], dtype=np.int64),
            init_score=np.asarray(obj["init_score"], dtype=np.float64),
            trees=[[_tree_from_dict(t) for t in rnd] for rnd in obj["trees"]],
            round_scales=[float(s) for s in obj["round_scales"]],
            bin_edges=tuple(
                np.asarray(e, dtype=np.float64) for e in obj["bin_edges"]
            ),
            class_weights=np.asarray(obj["class_weights"], dtype=np.float64),
            best_iteration=int(obj["best_iteration"]),
            params=params,
            history={k: list(v) for k, v in obj.get("history", {}).items()},
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    if model.best_iteration < 0 or model.best_iteration > model.n_rounds:
        raise ModelFormatError("best_iteration outside the stored rounds")
    if len(model.round_scales) != model.n_rounds:
        raise ModelFormatError("round_scales length must match the round count")
    return model


def save_model(model: BoostedModel, path: Union[str, os.PathLike]) -> None:
    """Write the model as JSON; identical models produce identical bytes."""
    doc = model_to_dict(model)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_model(path: Union[str, os.PathLike]) -> BoostedModel:
    """Read a model written by save_model."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from exc
    return model_from_dict(doc)
