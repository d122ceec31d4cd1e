"""Similarity-index computation and result filtering.

The weighted normalized distance columns of an instance sum to a combined
dissimilarity in [0, 1]; the similarity index is its complement,
``1 - combined``.  Filtering then marks instances as kept or filtered
without discarding rows, so output length always equals dataset length
and excluded-for-missing-data instances remain distinguishable from
filtered ones.
"""

from __future__ import annotations

import warnings

import numpy as np

from .model import (
    NO_ROTATION,
    STATUS_FILTERED,
    STATUS_MISSING,
    STATUS_OK,
    DissimilarityMatrix,
    Filtering,
    SimilarityIndexMatrix,
)


def combine_distances(dissimilarity) -> np.ndarray:
    """Sum the weighted normalized distance columns per instance.

    Accepts a ``DissimilarityMatrix`` or a bare (K, M) array and returns a
    length-K vector in [0, 1]; NaN rows (excluded instances) stay NaN.
    """
    if isinstance(dissimilarity, DissimilarityMatrix):
        values = dissimilarity.values
    else:
        values = np.asarray(dissimilarity, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("dissimilarity must be two-dimensional")
    return values.sum(axis=1)


def to_similarity(combined) -> np.ndarray:
    """Similarity index 1 - combined, clipped into [0, 1].

    The clip guards against the one-ulp overshoot a weight vector summing
    to 1 within tolerance (rather than exactly) can produce; NaN entries
    propagate.
    """
    arr = np.asarray(combined, dtype=np.float64)
    return np.clip(1.0 - arr, 0.0, 1.0)


def apply_filtering(
    similarity_array, filtering: Filtering
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Blank out filtered instances and report a status per instance.

    Returns ``(filtered_similarity, status)``.  NaN inputs are excluded
    instances and keep status ``missing_data``.  Absolute filtering keeps
    similarities at or above the threshold; relative filtering keeps the
    k most similar instances, breaking boundary ties toward the smaller
    instance index (ranking uses a stable sort).  A k larger than the
    number of comparable instances keeps them all and warns.
    """
    similarity = np.asarray(similarity_array, dtype=np.float64)
    if similarity.ndim != 1:
        raise ValueError("similarity array must be one-dimensional")
    comparable = np.flatnonzero(~np.isnan(similarity))
    keep = np.zeros(similarity.size, dtype=bool)
    if filtering.kind == "none":
        keep[comparable] = True
    elif filtering.kind == "absolute":
        keep[comparable] = similarity[comparable] >= filtering.threshold
    else:  # relative
        k = filtering.k
        if k > comparable.size:
            warnings.warn(
                f"relative filtering asked for top {k} of {comparable.size} "
                "comparable instances; keeping all of them",
                stacklevel=2,
            )
            k = comparable.size
        order = np.argsort(-similarity[comparable], kind="stable")
        keep[comparable[order[:k]]] = True
    out = similarity.copy()
    status = []
    for i in range(similarity.size):
        if np.isnan(similarity[i]):
            status.append(STATUS_MISSING)
        elif keep[i]:
            status.append(STATUS_OK)
        else:
            status.append(STATUS_FILTERED)
            out[i] = np.nan
    return out, tuple(status)


def assemble(
    rotation_array,
    similarity_array,
    instance_ids,
    *,
    raw_combined,
    status,
) -> SimilarityIndexMatrix:
    """Bundle the per-instance columns into the final result object."""
    rotation = np.asarray(rotation_array, dtype=np.int64)
    return SimilarityIndexMatrix(
        rotation_array=rotation,
        similarity_array=np.asarray(similarity_array, dtype=np.float64),
        raw_combined=np.asarray(raw_combined, dtype=np.float64),
        status=tuple(status),
        instance_ids=tuple(str(i) for i in instance_ids),
    )


def all_missing_result(instance_ids) -> SimilarityIndexMatrix:
    """Result for a dataset with no fully observed instance."""
    ids = tuple(str(i) for i in instance_ids)
    k = len(ids)
    return SimilarityIndexMatrix(
        rotation_array=np.full(k, NO_ROTATION, dtype=np.int64),
        similarity_array=np.full(k, np.nan),
        raw_combined=np.full(k, np.nan),
        status=tuple([STATUS_MISSING] * k),
        instance_ids=ids,
    )
