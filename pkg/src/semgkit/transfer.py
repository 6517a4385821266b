"""Warm-start transfer of a boosted model onto a small target dataset.

The source model's trees are frozen; target raw scores start from the
source model's outputs and new rounds of trees fit the target gradients
at a reduced learning rate. Class weights are recomputed on the target
label balance. The result is one model holding base trees plus new trees,
so its predictions decompose exactly into base score + new-tree score.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .gbdt.binning import BinnedMatrix, apply_bins
from .gbdt.booster import (
    BoostedModel,
    TrainParams,
    _encode_labels,
    predict_raw,
    train,
)
from .gbdt.objective import LossSpec, grad_hess, weighted_cross_entropy
from .gbdt.sampling import goss_sample
from .gbdt.tree import Tree, grow_tree


@dataclass(frozen=True)
class TransferConfig:
    """Settings for the target-phase rounds."""

    learning_rate: float = 0.05
    max_rounds: int = 50
    early_stop_rounds: int = 30
    keep_base_trees: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.early_stop_rounds < 0:
            raise ValueError("early_stop_rounds must be non-negative")


def _phase_params(base: BoostedModel, cfg: TransferConfig, seed: Optional[int]) -> TrainParams:
    return replace(
        base.params,
        learning_rate=cfg.learning_rate,
        max_rounds=cfg.max_rounds,
        early_stop_rounds=cfg.early_stop_rounds,
        seed=base.params.seed if seed is None else int(seed),
    )


def warm_start(
    base: BoostedModel,
    target_train_features: np.ndarray,
    target_train_labels: np.ndarray,
    target_valid_features: Optional[np.ndarray] = None,
    target_valid_labels: Optional[np.ndarray] = None,
    cfg: TransferConfig = TransferConfig(),
    loss: Optional[LossSpec] = None,
    seed: Optional[int] = None,
) -> BoostedModel:
    """Continue boosting from the base model on target data.

    The base contributes its rounds up to best_iteration, bit for bit; new
    rounds use the base bin edges, cfg.learning_rate, and class weights
    recomputed from the target labels. Early stopping follows target
    validation accuracy; best_iteration of the result counts base rounds
    plus the best number of new rounds. Target labels outside the base
    class set are a domain error.

    With keep_base_trees False the base only fixes the class set: a fresh
    model is trained on the target data alone (the scratch arm of paired
    comparisons), with its own bin edges.
    """
    features = np.ascontiguousarray(target_train_features, dtype=np.float64)
    labels = np.asarray(target_train_labels)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise ValueError("target features must be 2-D with one label per row")
    if features.shape[1] != len(base.bin_edges):
        raise ValueError(
            f"target feature width {features.shape[1]} does not match the "
            f"base model width {len(base.bin_edges)}"
        )
    _encode_labels(labels, base.classes)  # raises on labels outside base classes
    if (target_valid_features is None) != (target_valid_labels is None):
        raise ValueError("valid features and labels must come together")
    if loss is None:
        loss = LossSpec()
    params = _phase_params(base, cfg, seed)

    if not cfg.keep_base_trees:
        return train(
            features,
            labels,
            target_valid_features,
            target_valid_labels,
            params=params,
            loss=loss,
        )

    classes = base.classes
    n, n_classes = features.shape[0], base.n_classes
    _, encoded = _encode_labels(labels, classes)
    class_weights = loss.weights_for(labels, classes)
    rng = np.random.default_rng(params.seed)

    binned = BinnedMatrix(apply_bins(features, base.bin_edges), base.bin_edges)
    base_len = base.best_iteration
    raw = predict_raw(base, features, n_rounds=base_len)

    has_valid = target_valid_features is not None
    if has_valid:
        vfeat = np.ascontiguousarray(target_valid_features, dtype=np.float64)
        vlabels = np.asarray(target_valid_labels)
        if vfeat.ndim != 2 or vfeat.shape[1] != features.shape[1]:
            raise ValueError("valid features must match the training width")
        if vlabels.shape != (vfeat.shape[0],):
            raise ValueError("valid labels must be 1-D with one entry per row")
        vcodes = apply_bins(vfeat, base.bin_edges)
        vraw = predict_raw(base, vfeat, n_rounds=base_len)

    def valid_accuracy() -> float:
        pred = classes[np.argmax(vraw, axis=1)]
        return float(np.mean(pred == vlabels))

    history: Dict[str, List[float]] = {
        "train_loss": [float(weighted_cross_entropy(raw, encoded, class_weights))],
    }
    new_trees: List[List[Tree]] = []
    best_new = 0
    if has_valid:
        best_acc = valid_accuracy()
        history["valid_accuracy"] = [best_acc]
        rounds_since_best = 0

    for _ in range(cfg.max_rounds):
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
            raw[:, c] += cfg.learning_rate * tree.predict_binned(binned.codes)
            if has_valid:
                vraw[:, c] += cfg.learning_rate * tree.predict_binned(vcodes)
        new_trees.append(round_trees)
        history["train_loss"].append(
            float(weighted_cross_entropy(raw, encoded, class_weights))
        )

        if has_valid:
            acc = valid_accuracy()
            history["valid_accuracy"].append(acc)
            if acc > best_acc:
                best_acc = acc
                best_new = len(new_trees)
                rounds_since_best = 0
            else:
                rounds_since_best += 1
                if cfg.early_stop_rounds and rounds_since_best >= cfg.early_stop_rounds:
                    break

    if not has_valid:
        best_new = len(new_trees)

    return BoostedModel(
        classes=classes,
        init_score=base.init_score,
        trees=list(base.trees[:base_len]) + new_trees,
        round_scales=list(base.round_scales[:base_len])
        + [cfg.learning_rate] * len(new_trees),
        bin_edges=base.bin_edges,
        class_weights=class_weights,
        best_iteration=base_len + best_new,
        params=params,
        history=history,
    )


@dataclass
class TransferReport:
    """Paired before/after results across seeds.

    before = scratch training on the target split only; after = warm
    start from the base model. Rows of the per-class arrays are seeds,
    columns follow classes; entries are per-class recall on the shared
    test split, NaN when a class is absent from it.
    """

    classes: np.ndarray
    seeds: Tuple[int, ...]
    before_per_class: np.ndarray
    after_per_class: np.ndarray
    before_accuracy: np.ndarray
    after_accuracy: np.ndarray

    def per_class_rows(self) -> List[Tuple[int, float, float]]:
        """(class, mean before, mean after) per class, seed-averaged."""
        with np.errstate(invalid="ignore"):
            before = np.nanmean(self.before_per_class, axis=0)
            after = np.nanmean(self.after_per_class, axis=0)
        return [
            (int(c), float(b), float(a))
            for c, b, a in zip(self.classes, before, after)
        ]

    def mean_row(self) -> Tuple[float, float]:
        rows = self.per_class_rows()
        before = [b for _, b, _ in rows if not np.isnan(b)]
        after = [a for _, _, a in rows if not np.isnan(a)]
        return float(np.mean(before)), float(np.mean(after))


def _paired_split(
    labels: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-class deal into train (1/2), valid (1/4) and test (1/4)."""
    quarter = np.empty(labels.shape[0], dtype=np.int64)
    for cls in np.unique(labels):
        positions = np.flatnonzero(labels == cls)
        order = rng.permutation(positions.size)
        quarter[positions[order]] = np.arange(positions.size) % 4
    return quarter <= 1, quarter == 2, quarter == 3


def transfer_report(
    target_features: np.ndarray,
    target_labels: np.ndarray,
    base: BoostedModel,
    cfg: TransferConfig = TransferConfig(),
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4),
    loss: Optional[LossSpec] = None,
) -> TransferReport:
    """Paired scratch-versus-warm-start comparison on target data.

    Each seed deals the target data into train/valid/test splits shared
    by both arms, trains both, and scores per-class recall and overall
    accuracy on the held-out test quarter.
    """
    features = np.asarray(target_features, dtype=np.float64)
    labels = np.asarray(target_labels)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise ValueError("target features must be 2-D with one label per row")
    classes = base.classes
    n_classes = base.n_classes
    n_seeds = len(seeds)
    before_pc = np.full((n_seeds, n_classes), np.nan)
    after_pc = np.full((n_seeds, n_classes), np.nan)
    before_acc = np.zeros(n_seeds)
    after_acc = np.zeros(n_seeds)

    for s, seed in enumerate(seeds):
        rng = np.random.default_rng([int(seed), 404])
        train_mask, valid_mask, test_mask = _paired_split(labels, rng)
        args = (
            features[train_mask],
            labels[train_mask],
            features[valid_mask],
            labels[valid_mask],
        )
        scratch = warm_start(
            base, *args, cfg=replace(cfg, keep_base_trees=False),
            loss=loss, seed=int(seed),
        )
        warmed = warm_start(base, *args, cfg=cfg, loss=loss, seed=int(seed))
        test_labels = labels[test_mask]
        for arm, model in ((0, scratch), (1, warmed)):
            pred = model.predict_label(features[test_mask])
            acc = float(np.mean(pred == test_labels))
            per_class = np.full(n_classes, np.nan)
            for i, cls in enumerate(classes):
                mask = test_labels == cls
                if mask.any():
                    per_class[i] = float(np.mean(pred[mask] == cls))
            if arm == 0:
                before_pc[s], before_acc[s] = per_class, acc
            else:
                after_pc[s], after_acc[s] = per_class, acc

    return TransferReport(
        classes=classes,
        seeds=tuple(int(s) for s in seeds),
        before_per_class=before_pc,
        after_per_class=after_pc,
        before_accuracy=before_acc,
        after_accuracy=after_acc,
    )
