"""Multiclass gradient boosting with histogram trees.

Each round fits one tree per class on the one-vs-all gradient of the
class-weighted softmax cross-entropy. Raw scores start at the log class
priors and accumulate learning_rate * tree output per round. Validation
accuracy drives early stopping; prediction replays rounds up to the best
validation round.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .binning import BinnedMatrix, apply_bins, bin_features
from .objective import LossSpec, grad_hess, softmax, weighted_cross_entropy
from .sampling import goss_sample
from .tree import Tree, grow_tree


@dataclass(frozen=True)
class TrainParams:
    """Boosting hyperparameters; defaults suit mid-sized tabular data."""

    learning_rate: float = 0.1
    num_leaves: int = 31
    max_rounds: int = 100
    min_data_in_leaf: int = 20
    l2_regularization: float = 0.0
    feature_fraction: float = 1.0
    bagging_fraction: float = 1.0
    top_rate: float = 1.0
    other_rate: float = 0.0
    max_bins: int = 255
    early_stop_rounds: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.learning_rate:
            raise ValueError("learning_rate must be positive")
        if self.num_leaves < 2:
            raise ValueError("num_leaves must be at least 2")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.min_data_in_leaf < 1:
            raise ValueError("min_data_in_leaf must be at least 1")
        if self.l2_regularization < 0.0:
            raise ValueError("l2_regularization must be non-negative")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError("feature_fraction must be in (0, 1]")
        if not 0.0 < self.bagging_fraction <= 1.0:
            raise ValueError("bagging_fraction must be in (0, 1]")
        if not 0.0 <= self.top_rate <= 1.0:
            raise ValueError("top_rate must be in [0, 1]")
        if self.other_rate < 0.0 or self.top_rate + self.other_rate > 1.0 + 1e-12:
            raise ValueError("top_rate + other_rate must not exceed 1")
        if self.max_bins < 2 or self.max_bins > 255:
            raise ValueError("max_bins must be in [2, 255]")
        if self.early_stop_rounds < 0:
            raise ValueError("early_stop_rounds must be non-negative")

    @property
    def goss_enabled(self) -> bool:
        return self.top_rate < 1.0 or self.other_rate > 0.0


@dataclass
class BoostedModel:
    """Trained boosting model plus everything needed to reapply it."""

    classes: np.ndarray
    init_score: np.ndarray
    trees: List[List[Tree]]
    round_scales: List[float]
    bin_edges: Tuple[np.ndarray, ...]
    class_weights: np.ndarray
    best_iteration: int
    params: TrainParams
    history: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return int(self.classes.shape[0])

    @property
    def n_rounds(self) -> int:
        return len(self.trees)

    def predict_raw(
        self, features: np.ndarray, n_rounds: Optional[int] = None
    ) -> np.ndarray:
        return predict_raw(self, features, n_rounds)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return predict_proba(self, features)

    def predict_label(self, features: np.ndarray) -> np.ndarray:
        return predict_label(self, features)


def _encode_labels(
    labels: np.ndarray, classes: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Map labels onto 0..M-1 against sorted distinct classes."""
    labels = np.asarray(labels)
    if classes is None:
        classes = np.unique(labels)
    encoded = np.searchsorted(classes, labels)
    bad = (encoded >= classes.shape[0]) | (classes[np.minimum(encoded, classes.shape[0] - 1)] != labels)
    if bad.any():
        raise ValueError(f"labels outside the model classes: {np.unique(labels[bad]).tolist()}")
    return classes, encoded.astype(np.int64)


def _class_priors(encoded: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.bincount(encoded, minlength=n_classes).astype(np.float64)
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"training labels missing classes at positions {missing}")
    return np.log(counts / counts.sum())


def train(
    train_features: np.ndarray,
    train_labels: np.ndarray,
    valid_features: Optional[np.ndarray] = None,
    valid_labels: Optional[np.ndarray] = None,
    params: TrainParams = TrainParams(),
    loss: Optional[LossSpec] = None,
) -> BoostedModel:
    """Fit a boosted model; early stop on validation accuracy if given.

    Returns the model with all grown rounds retained and best_iteration
    pointing at the round (0 = priors only) with the highest validation
    accuracy, earliest round winning ties. Without a validation set,
    best_iteration is the final round.
    """
    features = np.ascontiguousarray(train_features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ValueError("train_features must be a 2-D array with rows")
    labels = np.asarray(train_labels)
    if labels.shape != (features.shape[0],):
        raise ValueError("train_labels must be 1-D with one entry per row")
    if (valid_features is None) != (valid_labels is None):
        raise ValueError("valid_features and valid_labels must come together")

    classes, encoded = _encode_labels(labels)
    n, n_classes = features.shape[0], classes.shape[0]
    if n_classes < 2:
        raise ValueError("training needs at least two classes")
    if loss is None:
        loss = LossSpec()
    class_weights = loss.weights_for(labels, classes)

    binned = bin_features(features, params.max_bins)
    rng = np.random.default_rng(params.seed)

    init_score = _class_priors(encoded, n_classes)
    raw = np.broadcast_to(init_score, (n, n_classes)).copy()

    has_valid = valid_features is not None
    if has_valid:
        vfeat = np.ascontiguousarray(valid_features, dtype=np.float64)
        vlabels = np.asarray(valid_labels)
        if vfeat.ndim != 2 or vfeat.shape[1] != features.shape[1]:
            raise ValueError("valid_features must match the training width")
        if vlabels.shape != (vfeat.shape[0],):
            raise ValueError("valid_labels must be 1-D with one entry per row")
        vcodes = apply_bins(vfeat, binned.edges)
        vraw = np.broadcast_to(init_score, (vfeat.shape[0], n_classes)).copy()

    def valid_accuracy() -> float:
        pred = classes[np.argmax(vraw, axis=1)]
        return float(np.mean(pred == vlabels))

    history: Dict[str, List[float]] = {
        "train_loss": [float(weighted_cross_entropy(raw, encoded, class_weights))],
    }
    trees: List[List[Tree]] = []
    round_scales: List[float] = []
    best_iteration = 0
    if has_valid:
        best_acc = valid_accuracy()
        history["valid_accuracy"] = [best_acc]
        rounds_since_best = 0

    for _ in range(params.max_rounds):
        grad, hess = grad_hess(raw, encoded, class_weights)

        if params.goss_enabled:
            idx, mult = goss_sample(grad, params.top_rate, params.other_rate, rng)
            sub_binned = BinnedMatrix(binned.codes[idx], binned.edges)
            sub_grad = grad[idx] * mult[:, None]
            sub_hess = hess[idx] * mult[:, None]
        elif params.bagging_fraction < 1.0:
            n_keep = max(1, int(round(params.bagging_fraction * n)))
            idx = np.sort(rng.choice(n, size=n_keep, replace=False))
            sub_binned = BinnedMatrix(binned.codes[idx], binned.edges)
            sub_grad = grad[idx]
            sub_hess = hess[idx]
        else:
            sub_binned, sub_grad, sub_hess = binned, grad, hess

        round_trees: List[Tree] = []
        for c in range(n_classes):
            tree = grow_tree(sub_binned, sub_grad[:, c], sub_hess[:, c], params, rng)
            round_trees.append(tree)
            raw[:, c] += params.learning_rate * tree.predict_binned(binned.codes)
            if has_valid:
                vraw[:, c] += params.learning_rate * tree.predict_binned(vcodes)
        trees.append(round_trees)
        round_scales.append(params.learning_rate)
        history["train_loss"].append(
            float(weighted_cross_entropy(raw, encoded, class_weights))
        )

        if has_valid:
            acc = valid_accuracy()
            history["valid_accuracy"].append(acc)
            if acc > best_acc:
                best_acc = acc
                best_iteration = len(trees)
                rounds_since_best = 0
            else:
                rounds_since_best += 1
                if params.early_stop_rounds and rounds_since_best >= params.early_stop_rounds:
                    break

    if not has_valid:
        best_iteration = len(trees)

    return BoostedModel(
        classes=classes,
        init_score=init_score,
        trees=trees,
        round_scales=round_scales,
        bin_edges=binned.edges,
        class_weights=class_weights,
        best_iteration=best_iteration,
        params=params,
        history=history,
    )


def predict_raw(
    model: BoostedModel, features: np.ndarray, n_rounds: Optional[int] = None
) -> np.ndarray:
    """Raw scores after n_rounds rounds (default: best_iteration).

    Scores accumulate sequentially in one buffer, so extending a model by
    more rounds reproduces its prefix scores bit for bit.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D array")
    if n_rounds is None:
        n_rounds = model.best_iteration
    if n_rounds < 0 or n_rounds > model.n_rounds:
        raise ValueError(f"n_rounds must be in [0, {model.n_rounds}]")
    codes = apply_bins(features, model.bin_edges)
    raw = np.broadcast_to(model.init_score, (features.shape[0], model.n_classes)).copy()
    for r in range(n_rounds):
        scale = model.round_scales[r]
        for c, tree in enumerate(model.trees[r]):
            raw[:, c] += scale * tree.predict_binned(codes)
    return raw


def predict_proba(model: BoostedModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities at the best iteration, columns in class order."""
    return softmax(predict_raw(model, features))


def predict_label(model: BoostedModel, features: np.ndarray) -> np.ndarray:
    """Most probable class per row; ties pick the lowest class."""
    raw = predict_raw(model, features)
    return model.classes[np.argmax(raw, axis=1)]


def detect_hard_classes(
    train_features: np.ndarray,
    train_labels: np.ndarray,
    valid_features: np.ndarray,
    valid_labels: np.ndarray,
    params: TrainParams = TrainParams(),
    warmup_rounds: int = 50,
    margin: float = 0.5,
) -> frozenset:
    """Classes whose warm-up recall falls below mean - margin * std.

    Runs a short unweighted training pass, measures per-class recall on
    the validation set, and flags the stragglers. Classes absent from the
    validation set are skipped.
    """
    warm_params = replace(params, max_rounds=warmup_rounds)
    model = train(
        train_features, train_labels, valid_features, valid_labels,
        params=warm_params, loss=LossSpec(),
    )
    pred = predict_label(model, valid_features)
    vlabels = np.asarray(valid_labels)
    recalls = np.full(model.n_classes, np.nan)
    for i, cls in enumerate(model.classes):
        mask = vlabels == cls
        if mask.any():
            recalls[i] = float(np.mean(pred[mask] == cls))
    if np.isnan(recalls).all():
        warnings.warn("no classes measurable on the validation set", RuntimeWarning)
        return frozenset()
    cutoff = np.nanmean(recalls) - margin * np.nanstd(recalls)
    flagged = [
        int(model.classes[i])
        for i in range(model.n_classes)
        if not np.isnan(recalls[i]) and recalls[i] < cutoff
    ]
    return frozenset(flagged)
