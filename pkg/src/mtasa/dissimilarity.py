"""Per-variable distances and the weighted, normalized dissimilarity matrix.

Distances are computed per variable over the analysis period, between the
query and each (already rotated) valid instance.  Raw distances are then
min-max normalized per variable across the valid instances and scaled by
the variable's weight, so every column lands in [0, weights[m]] and the
column sums land in [0, 1].
"""

from __future__ import annotations

import numpy as np

from .model import AssessmentConfig, DissimilarityMatrix


def euclidean_distance(query_column, instance_column) -> float:
    """Plain Euclidean distance between two equal-length sample vectors."""
    q = np.asarray(query_column, dtype=np.float64)
    t = np.asarray(instance_column, dtype=np.float64)
    if q.shape != t.shape or q.ndim != 1:
        raise ValueError(f"incompatible shapes {q.shape} and {t.shape}")
    if q.size == 0:
        raise ValueError("distance needs at least one sample")
    return float(np.sqrt(np.sum((q - t) ** 2)))


def dtw_distance(query_column, instance_column) -> float:
    """Dynamic time warping distance with absolute-difference local cost.

    DTW(i, j) = |q[i] - t[j]| + min(DTW(i+1, j), DTW(i, j+1), DTW(i+1, j+1))
    with an empty-vs-empty pair costing 0 and a single empty side costing
    infinity.  Evaluated iteratively over suffixes in O(len(q) * len(t))
    time and O(len(t)) memory; the arithmetic follows the recursive
    definition operation for operation, so results agree with a memoized
    recursion exactly, not just to rounding.
    """
    q = np.asarray(query_column, dtype=np.float64)
    t = np.asarray(instance_column, dtype=np.float64)
    if q.ndim != 1 or t.ndim != 1:
        raise ValueError("dtw operands must be one-dimensional")
    if q.size == 0 or t.size == 0:
        raise ValueError("dtw needs non-empty sequences")
    a = q.tolist()
    b = t.tolist()
    n, m = len(a), len(b)
    inf = float("inf")
    # below[j] = DTW over suffixes (i+1, j); seeded with the i == n row:
    # empty query vs empty instance is 0, vs non-empty is unreachable.
    below = [inf] * m + [0.0]
    for i in range(n - 1, -1, -1):
        row = [inf] * (m + 1)
        ai = a[i]
        for j in range(m - 1, -1, -1):
            cost = abs(ai - b[j])
            row[j] = cost + min(below[j], row[j + 1], below[j + 1])
        below = row
    return below[0]


def normalize_and_weight(raw_distances, weights) -> np.ndarray:
    """Min-max normalize each distance column and scale by its weight.

    ``raw_distances`` is (K, M) with NaN rows for excluded instances; the
    min and max are taken over the finite entries of each column.  A
    degenerate column (max == min, e.g. a single valid instance) maps to
    zeros — no spread means no evidence to rank on.  NaN entries stay NaN.
    """
    raw = np.asarray(raw_distances, dtype=np.float64)
    if raw.ndim != 2:
        raise ValueError("raw distances must be two-dimensional")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (raw.shape[1],):
        raise ValueError(f"{w.size} weights for {raw.shape[1]} columns")
    out = np.full_like(raw, np.nan)
    for m in range(raw.shape[1]):
        column = raw[:, m]
        finite = ~np.isnan(column)
        if not finite.any():
            continue
        low = column[finite].min()
        high = column[finite].max()
        if high == low:
            out[finite, m] = 0.0
        else:
            out[finite, m] = (column[finite] - low) / (high - low) * w[m]
    return out


def raw_distance_matrix(
    rotated_values: np.ndarray,
    query_values: np.ndarray,
    period_indices,
    distance_kind: str,
) -> np.ndarray:
    """Unnormalized per-variable distances over the analysis period.

    ``rotated_values`` is the (K, N, M) tensor after rotation; instances
    containing NaN produce NaN rows.  Returns a (K, M) array.
    """
    values = np.asarray(rotated_values, dtype=np.float64)
    query = np.asarray(query_values, dtype=np.float64)
    period = np.asarray(period_indices, dtype=np.intp)
    k, _, m = values.shape
    query_period = query[period]
    raw = np.full((k, m), np.nan)
    for i in range(k):
        instance = values[i]
        if np.isnan(instance).any():
            continue
        raw[i] = instance_distances(query_period, instance[period], distance_kind)
    return raw


def instance_distances(
    query_period: np.ndarray, instance_period: np.ndarray, distance_kind: str
) -> np.ndarray:
    """Distance of one instance to the query, per variable column."""
    if distance_kind == "euclidean":
        diff = instance_period - query_period
        return np.sqrt(np.sum(diff * diff, axis=0))
    if distance_kind == "dtw":
        m = query_period.shape[1]
        return np.array([
            dtw_distance(query_period[:, j], instance_period[:, j])
            for j in range(m)
        ])
    raise ValueError(f"unknown distance kind {distance_kind!r}")


def build_dissimilarity_matrix(
    rotated_values: np.ndarray,
    query_values: np.ndarray,
    config: AssessmentConfig,
) -> DissimilarityMatrix:
    """Weighted normalized dissimilarity of every instance, shape (K, M).

    Expects rotation to have been applied already.  Instances with missing
    cells keep NaN rows through normalization, so downstream stages can
    tell exclusion apart from a genuine zero distance.
    """
    raw = raw_distance_matrix(
        rotated_values,
        query_values,
        config.analysis_period.as_array(),
        config.distance_kind,
    )
    normalized = normalize_and_weight(raw, config.weights.as_array())
    return DissimilarityMatrix(values=normalized, weights=config.weights)
