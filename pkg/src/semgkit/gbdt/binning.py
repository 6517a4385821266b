"""Quantile binning of feature matrices for histogram-based split search."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

MAX_BINS_LIMIT = 255


@dataclass(frozen=True)
class BinnedMatrix:
    """Per-sample bin codes plus the per-feature edges that produced them.

    Feature j has len(edges[j]) + 1 bins; code b covers the half-open
    interval (edges[b-1], edges[b]] with the outer bins unbounded. Codes
    are uint8, which caps max_bins at 255.
    """

    codes: np.ndarray
    edges: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes)
        if codes.ndim != 2 or codes.dtype != np.uint8:
            raise ValueError("codes must be a 2-D uint8 array")
        if codes.shape[1] != len(self.edges):
            raise ValueError("one edge array per feature is required")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def n_samples(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]

    def n_bins(self, feature: int) -> int:
        return len(self.edges[feature]) + 1

    @property
    def max_width(self) -> int:
        """Largest bin count over all features; sizes tree histograms."""
        return max((len(e) + 1 for e in self.edges), default=2)


def _feature_edges(column: np.ndarray, max_bins: int) -> np.ndarray:
    unique = np.unique(column)
    if unique.size <= max_bins:
        return (unique[:-1] + unique[1:]) / 2.0
    quantiles = np.quantile(column, np.arange(1, max_bins) / max_bins)
    return np.unique(quantiles)


def bin_features(features: np.ndarray, max_bins: int = 255) -> BinnedMatrix:
    """Quantile-bin every feature into at most max_bins bins.

    Distinct values fewer than max_bins each get their own bin (edges at
    midpoints); otherwise edges are taken at evenly spaced quantiles, with
    duplicate quantiles collapsed. Codes are monotone in the raw value and
    reproducible from the stored edges.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("features must be a 2-D array with >= 1 sample")
    if not 2 <= max_bins <= MAX_BINS_LIMIT:
        raise ValueError(f"max_bins must lie in 2..{MAX_BINS_LIMIT}")
    edges = tuple(_feature_edges(x[:, j], max_bins) for j in range(x.shape[1]))
    return BinnedMatrix(apply_bins(x, edges), edges)


def apply_bins(features: np.ndarray, edges: Sequence[np.ndarray]) -> np.ndarray:
    """Map raw features to bin codes using stored edges."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(edges):
        raise ValueError(
            f"feature dimension {x.shape[1] if x.ndim == 2 else None} "
            f"does not match {len(edges)} edge arrays"
        )
    codes = np.empty(x.shape, dtype=np.uint8)
    for j, e in enumerate(edges):
        codes[:, j] = np.searchsorted(e, x[:, j], side="left").astype(np.uint8)
    return codes
