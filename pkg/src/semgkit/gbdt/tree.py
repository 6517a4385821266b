"""Leaf-wise decision tree growth over histogram-binned features.

Trees split on bin codes: a sample goes left when code <= threshold. Growth
is best-first: the leaf whose best split has the largest gain is split
next, until num_leaves is reached or no split has positive gain. Gains and
leaf values use the second-order formulas

    gain = G_L^2/(H_L + l2) + G_R^2/(H_R + l2) - G^2/(H + l2)
    leaf value = -G/(H + l2)

with per-bin histogram sums of the gradient and Hessian. Sibling
histograms are derived by subtracting the smaller child's histogram from
the parent's. Histograms are stacked (gradient, Hessian, count) in one
array sized to the widest feature, and the split scan reuses
preallocated buffers; both matter for training speed.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .binning import BinnedMatrix


def _ceil_frac(fraction: float, n: int) -> int:
    return int(math.ceil(round(fraction * n, 9)))


@dataclass
class Tree:
    """Array-of-nodes tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    default_left: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def predict_binned(self, codes: np.ndarray) -> np.ndarray:
        """Leaf values for every row of a bin-code matrix."""
        n = codes.shape[0]
        out = np.empty(n, dtype=np.float64)
        stack: List[Tuple[int, np.ndarray]] = [(0, np.arange(n))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            feat = self.feature[node]
            if feat < 0:
                out[rows] = self.value[node]
                continue
            go_left = codes[rows, feat] <= self.threshold[node]
            stack.append((int(self.left[node]), rows[go_left]))
            stack.append((int(self.right[node]), rows[~go_left]))
        return out


def _histograms(
    flat: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    n_features: int,
    width: int,
) -> np.ndarray:
    """Stacked (gradient, Hessian, count) histogram, shape (3, F, width).

    flat holds precomputed cell indices code + width * feature, row-major.
    """
    size = n_features * width
    hist = np.empty((3, n_features, width))
    flat = flat.ravel()
    hist[0] = np.bincount(
        flat, weights=np.repeat(grad, n_features), minlength=size
    ).reshape(n_features, width)
    hist[1] = np.bincount(
        flat, weights=np.repeat(hess, n_features), minlength=size
    ).reshape(n_features, width)
    hist[2] = np.bincount(flat, minlength=size).reshape(n_features, width)
    return hist


class _SplitScratch:
    """Reusable buffers for the split scans of one tree."""

    def __init__(self, n_features: int, width: int) -> None:
        shape = (n_features, width)
        self.cum = np.empty((3,) + shape)
        self.gains = np.empty(shape)
        self.t1 = np.empty(shape)
        self.t2 = np.empty(shape)
        self.valid = np.empty(shape, dtype=bool)
        self.mask = np.empty(shape, dtype=bool)


def _best_split(
    hist: np.ndarray,
    totals: Tuple[float, float, int],
    min_data: int,
    l2: float,
    scratch: _SplitScratch,
) -> Optional[Tuple[float, int, int]]:
    """(gain, local feature, cut bin) of the best positive-gain split.

    Ties resolve to the lowest feature index, then the lowest bin, via the
    first-occurrence argmax over the feature-major gain matrix. Cutting at
    the last bin leaves the right side empty, which the count constraint
    rejects on its own.
    """
    g_total, h_total, c_total = totals
    if c_total < 2 * min_data:
        return None
    width = hist.shape[2]
    cum = scratch.cum
    np.cumsum(hist, axis=2, out=cum)
    gl, hl, cl = cum[0], cum[1], cum[2]
    gains, t1, t2 = scratch.gains, scratch.t1, scratch.t2

    with np.errstate(divide="ignore", invalid="ignore"):
        parent = g_total * g_total / (h_total + l2) if h_total + l2 > 0 else 0.0
        # left term: GL^2 / (HL + l2)
        np.multiply(gl, gl, out=gains)
        np.add(hl, l2, out=t1)
        np.divide(gains, t1, out=gains)
        # right term: (G - GL)^2 / ((H + l2) - HL)
        np.subtract(g_total, gl, out=t2)
        np.multiply(t2, t2, out=t2)
        np.subtract(h_total + l2, hl, out=t1)
        np.divide(t2, t1, out=t2)
        np.add(gains, t2, out=gains)
        gains -= parent

    valid, mask = scratch.valid, scratch.mask
    np.greater_equal(cl, min_data, out=valid)
    np.less_equal(cl, c_total - min_data, out=mask)
    valid &= mask
    np.isfinite(gains, out=mask)
    valid &= mask
    if not valid.any():
        return None
    np.copyto(gains, -np.inf, where=~valid)
    flat_idx = int(np.argmax(gains))
    feat, cut = divmod(flat_idx, width)
    gain = float(gains[feat, cut])
    if gain <= 0.0:
        return None
    return gain, feat, cut


def grow_tree(
    binned: BinnedMatrix,
    grad: np.ndarray,
    hess: np.ndarray,
    params,
    rng: np.random.Generator,
) -> Tree:
    """Grow one tree on binned rows with per-row gradient and Hessian.

    params supplies num_leaves, min_data_in_leaf, l2_regularization and
    feature_fraction; the rng drives the per-tree feature subsample.
    """
    g = np.asarray(grad, dtype=np.float64)
    h = np.asarray(hess, dtype=np.float64)
    n = binned.n_samples
    if g.shape != (n,) or h.shape != (n,):
        raise ValueError("grad and hess must be 1-D with one entry per row")
    n_features = binned.n_features
    l2 = params.l2_regularization
    min_data = params.min_data_in_leaf
    width = binned.max_width

    if params.feature_fraction < 1.0:
        n_sel = max(1, _ceil_frac(params.feature_fraction, n_features))
        feat_sel = np.sort(rng.choice(n_features, size=n_sel, replace=False))
        codes = binned.codes[:, feat_sel]
    else:
        feat_sel = np.arange(n_features)
        codes = binned.codes
    f_sel = codes.shape[1]
    # cell index of every (row, feature): bin code + width * feature
    flat_full = codes.astype(np.int64)
    flat_full += np.arange(f_sel) * width
    scratch = _SplitScratch(f_sel, width)

    feature: List[int] = []
    threshold: List[int] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []

    def add_leaf(totals: Tuple[float, float, int]) -> int:
        g_total, h_total, _ = totals
        denom = h_total + l2
        feature.append(-1)
        threshold.append(-1)
        left.append(-1)
        right.append(-1)
        value.append(0.0 if denom <= 0.0 else float(-g_total / denom))
        return len(feature) - 1

    root_rows = np.arange(n)
    root_hist = _histograms(flat_full, g, h, f_sel, width)
    root_totals = (float(g.sum()), float(h.sum()), n)
    root = add_leaf(root_totals)

    # per live leaf: (rows, histogram, totals)
    state = {root: (root_rows, root_hist, root_totals)}
    heap: List[Tuple[float, int, int, int]] = []
    cand = _best_split(root_hist, root_totals, min_data, l2, scratch)
    if cand is not None:
        heapq.heappush(heap, (-cand[0], root, cand[1], cand[2]))

    n_leaves = 1
    while heap and n_leaves < params.num_leaves:
        _neg_gain, node, feat_local, cut = heapq.heappop(heap)
        rows, hist, totals = state.pop(node)

        go_left = codes[rows, feat_local] <= cut
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        left_totals = (
            float(hist[0, feat_local, :cut + 1].sum()),
            float(hist[1, feat_local, :cut + 1].sum()),
            int(hist[2, feat_local, :cut + 1].sum()),
        )
        right_totals = (
            totals[0] - left_totals[0],
            totals[1] - left_totals[1],
            totals[2] - left_totals[2],
        )
        if left_rows.size <= right_rows.size:
            small_rows, small_is_left = left_rows, True
        else:
            small_rows, small_is_left = right_rows, False
        small_hist = _histograms(
            flat_full[small_rows], g[small_rows], h[small_rows], f_sel, width
        )
        hist -= small_hist  # parent buffer becomes the larger child
        left_hist, right_hist = (
            (small_hist, hist) if small_is_left else (hist, small_hist)
        )

        left_id = add_leaf(left_totals)
        right_id = add_leaf(right_totals)
        feature[node] = int(feat_sel[feat_local])
        threshold[node] = int(cut)
        left[node] = left_id
        right[node] = right_id
        value[node] = 0.0
        n_leaves += 1

        for child, child_rows, child_hist, child_totals in (
            (left_id, left_rows, left_hist, left_totals),
            (right_id, right_rows, right_hist, right_totals),
        ):
            state[child] = (child_rows, child_hist, child_totals)
            child_cand = _best_split(child_hist, child_totals, min_data, l2, scratch)
            if child_cand is not None:
                heapq.heappush(
                    heap, (-child_cand[0], child, child_cand[1], child_cand[2])
                )

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.int32),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        default_left=np.ones(len(feature), dtype=bool),
        value=np.asarray(value, dtype=np.float64),
    )
