"""Gradient-based one-side sampling (GOSS).

Samples with large gradients carry most of the information gain, so all of
the top a*N by gradient magnitude are kept as they are, while only a random
b*N of the remainder are kept, up-weighted by (1 - a)/b so that the
expected weighted gradient sum matches the full data.
"""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np


def _ceil_frac(fraction: float, n: int) -> int:
    # round() first so 0.2 * 100 style float fuzz cannot tip the ceiling
    return int(math.ceil(round(fraction * n, 9)))


def goss_sample(
    grad: np.ndarray,
    top_rate: float,
    other_rate: float,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Pick the retained sample indices and their histogram multipliers.

    Samples are ranked by the L1 norm of their gradient row. The top
    ceil(a*N) keep multiplier 1; ceil(b*N) of the rest are drawn uniformly
    without replacement and weighted by (1 - a)/b. Returns (indices,
    multipliers) with indices in ascending order.
    """
    g = np.asarray(grad, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    if g.ndim != 2 or g.shape[0] == 0:
        raise ValueError("grad must be a non-empty (N,) or (N, M) array")
    a, b = float(top_rate), float(other_rate)
    if a < 0.0 or b < 0.0 or a + b > 1.0 + 1e-12:
        raise ValueError("rates must satisfy a >= 0, b >= 0, a + b <= 1")
    n = g.shape[0]
    norms = np.abs(g).sum(axis=1)
    order = np.argsort(-norms, kind="stable")
    n_top = min(_ceil_frac(a, n), n)
    top = order[:n_top]
    rest = order[n_top:]
    n_other = min(_ceil_frac(b, n), rest.size)
    if n_other > 0:
        chosen = rng.choice(rest, size=n_other, replace=False)
        multiplier = (1.0 - a) / b
    else:
        chosen = np.empty(0, dtype=np.int64)
        multiplier = 1.0
    kept = np.concatenate([top, chosen]).astype(np.int64)
    mults = np.concatenate([
        np.ones(n_top),
        np.full(n_other, multiplier),
    ])
    ascending = np.argsort(kept, kind="stable")
    return kept[ascending], mults[ascending]
