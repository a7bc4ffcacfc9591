"""Per-point dictionary-size selection.

Instead of giving every point the same sparsity budget K, each point gets a
budget derived from how tightly its nearest neighbors surround it: points in
a dense same-cluster core may spend more atoms on self-expression, points in
fuzzy boundary regions get fewer. The neighborhood structure comes from the
Gram matrix of the unit-normalized data, where inner products are cosines of
inter-point angles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix
from .util import round_half_away_from_zero

__all__ = [
    "NeighborhoodScore",
    "KArray",
    "gram_matrix",
    "neighborhood_scores",
    "compute_k_array",
]


@dataclass(frozen=True)
class NeighborhoodScore:
    """Neighborhood density summary per point.

    ``raw_mean[i]`` is the mean cosine similarity between point i and its
    k-1 nearest neighbors (self excluded). ``normalized`` rescales those
    means to [0, base_k] via

        normalized = base_k * (raw_mean - min_d) / (max_d - min_d)

    so the densest point scores base_k and the most isolated scores 0.
    """

    raw_mean: np.ndarray
    max_d: float
    min_d: float
    normalized: np.ndarray
    base_k: int

    def __post_init__(self):
        raw = np.array(self.raw_mean, dtype=np.float64)
        norm = np.array(self.normalized, dtype=np.float64)
        if raw.ndim != 1 or norm.shape != raw.shape:
            raise ValueError("raw_mean and normalized must be 1-d vectors of equal length")
        if self.min_d > self.max_d:
            raise ValueError("min_d must not exceed max_d")
        if raw.min() < self.min_d or raw.max() > self.max_d:
            raise ValueError("raw_mean entries must lie in [min_d, max_d]")
        if norm.min() < 0.0 or norm.max() > self.base_k:
            raise ValueError(f"normalized entries must lie in [0, {self.base_k}]")
        raw.flags.writeable = False
        norm.flags.writeable = False
        object.__setattr__(self, "raw_mean", raw)
        object.__setattr__(self, "normalized", norm)


@dataclass(frozen=True)
class KArray:
    """Per-point integer sparsity budgets with the shared base budget."""

    sizes: np.ndarray
    base_k: int

    def __post_init__(self):
        sizes = np.array(self.sizes, dtype=np.int64)
        if sizes.ndim != 1 or sizes.size < 3:
            raise ValueError("sizes must be a 1-d vector covering at least 3 points")
        if self.base_k < 1:
            raise ValueError("base_k must be a positive integer")
        # budget must stay meaningful: >= 1 atom, and strictly below the
        # N-1 atoms available once the point itself is excluded
        if sizes.min() < 1:
            raise ValueError("every budget must be at least 1")
        if sizes.max() > sizes.size - 2:
            raise ValueError(
                f"budgets must not exceed N-2 = {sizes.size - 2}, got {sizes.max()}"
            )
        sizes.flags.writeable = False
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self) -> int:
        return self.sizes.size

    @classmethod
    def uniform(cls, k: int, n: int) -> "KArray":
        return cls(np.full(n, k, dtype=np.int64), k)


def gram_matrix(x: DataMatrix) -> np.ndarray:
    """X^T X of unit-norm columns: entry (i, j) is the cosine of the angle
    between points i and j. Computed once and shared read-only, both for
    budget selection and as the first-iteration correlations of the greedy
    solver."""
    if not x.unit_normalized:
        raise ValueError("gram_matrix requires unit-normalized columns")
    g = x.values.T @ x.values
    g.flags.writeable = False
    return g


def neighborhood_scores(
    x: DataMatrix, k: int, gram: np.ndarray | None = None
) -> NeighborhoodScore:
    """Score each point by the mean similarity to its k-1 nearest neighbors.

    Each Gram row is sorted descending; the first entry is the point's
    self-similarity (exactly 1 for unit columns) and is dropped, the next
    k-1 entries are averaged. Scores are then min-max rescaled to
    [0, k]. When every point has the same raw score the rescaling is
    undefined and all scores are pinned at the neutral midpoint k/2, which
    downstream yields uniform budgets.
    """
    if not x.unit_normalized:
        raise ValueError("neighborhood_scores requires unit-normalized columns")
    if k < 2:
        raise ValueError(f"k must be at least 2 (k-1 neighbors are averaged), got {k}")
    if k > x.n - 1:
        raise ValueError(f"k must be at most N-1 = {x.n - 1}, got {k}")
    g = gram if gram is not None else gram_matrix(x)
    # only the k largest similarities per row matter; partitioning first
    # keeps this O(N^2) instead of a full N^2 log N sort, and sorting the
    # k-value slice yields bit-identical means to sorting whole rows
    top = np.partition(g, x.n - k, axis=1)[:, x.n - k:]
    ranked = -np.sort(-top, axis=1)
    raw = ranked[:, 1:k].mean(axis=1)
    max_d = float(raw.max())
    min_d = float(raw.min())
    if max_d == min_d:
        normalized = np.full(x.n, k / 2.0)
    else:
        # form the ratio first: it is <= 1 exactly, so scaling by k cannot
        # overshoot the [0, k] bound the way k*(raw-min)/(max-min) can
        normalized = k * ((raw - min_d) / (max_d - min_d))
    return NeighborhoodScore(raw, max_d, min_d, normalized, k)


def compute_k_array(
    x: DataMatrix, k: int, gram: np.ndarray | None = None
) -> KArray:
    """Turn neighborhood scores into integer budgets centered on k.

    budgets = k - round(mean(normalized)) + round(normalized)

    The constant offset keeps the budget mean within 1 of k while the
    per-point term spreads budgets with density: dense-core points land
    above k, boundary points below. Rounding is half-away-from-zero and
    results are clamped to [1, N-2] so every budget is usable by the
    solver.
    """
    scores = neighborhood_scores(x, k, gram=gram)
    per_point = round_half_away_from_zero(scores.normalized)
    offset = k - round_half_away_from_zero(float(scores.normalized.mean()))
    sizes = np.clip(offset + per_point, 1, x.n - 2)
    return KArray(sizes, k)
