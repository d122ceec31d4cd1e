"""Parallel assessment pipeline.

``run_pipeline`` drives the full assessment: validate, drop instances with
missing cells, estimate a rotation per instance, rotate, measure
per-variable distances over the analysis period, normalize/weight/combine,
filter, and assemble the result.

Parallel execution model
------------------------
The valid instances are split into one contiguous chunk per worker and
processed by a fork-based process pool.  The dataset, query spectrum, and
configuration are published in a module-level context *before* the fork,
so every worker reads them through copy-on-write memory — nothing is
serialized per task and no instance data is copied to the workers.
Workers return small per-chunk arrays (rotation coefficient and raw
per-variable distances per instance); the parent concatenates them in
chunk order and performs the global normalization, combination, and
filtering.

Every per-instance computation is independent and is executed by the same
code whether the pool has one worker or many, and normalization happens
once, centrally — so results are bit-for-bit identical for every
``worker_count``.  ``worker_count=1`` bypasses the pool entirely.
"""

from __future__ import annotations

import multiprocessing
import os
import warnings
from dataclasses import dataclass

import numpy as np

from . import alignment, dissimilarity, simindex
from .model import (
    NO_ROTATION,
    AssessmentConfig,
    QuerySequence,
    SimilarityIndexMatrix,
    TimeSeriesDataset,
    get_valid_instances,
    validate_inputs,
)


@dataclass(frozen=True)
class PipelineStagePlan:
    """A stage's work split into per-worker chunks of instance indices."""

    stage: str
    chunks: tuple[np.ndarray, ...]

    @property
    def n_tasks(self) -> int:
        return int(sum(chunk.size for chunk in self.chunks))


def partition_tasks(indices, worker_count: int) -> PipelineStagePlan:
    """Split task indices into near-equal contiguous chunks.

    Chunk sizes differ by at most one (10 tasks over 3 workers gives
    4/3/3); empty chunks are dropped, so fewer tasks than workers yields
    one singleton chunk per task.  Concatenating the chunks reproduces the
    input order exactly.
    """
    if worker_count < 1:
        raise ValueError(f"worker_count must be >= 1, got {worker_count}")
    arr = np.asarray(indices, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("task indices must be one-dimensional")
    chunks = tuple(c for c in np.array_split(arr, worker_count) if c.size > 0)
    return PipelineStagePlan(stage="per_instance", chunks=chunks)


def resolve_worker_count(worker_count: int | str) -> int:
    """Turn a configured worker count into a concrete positive integer."""
    if worker_count == "auto":
        return os.cpu_count() or 1
    count = int(worker_count)
    if count < 1:
        raise ValueError(f"worker_count must be >= 1, got {count}")
    return count


# Shared context published to forked workers.  Set immediately before the
# pool is created and cleared afterwards; forked children inherit the
# parent's copy at fork time via copy-on-write.
_WORKER_CTX: dict | None = None


def _compute_chunk(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Rotation coefficient and raw distances for one chunk of instances.

    ``bounds`` indexes into the shared valid-instance index array.  Each
    instance is processed independently: estimate rotation (when rotation
    mode is on), rotate, then measure per-variable distances over the
    analysis period.  Returns ``(coefficients, raw_distances)`` for the
    chunk.
    """
    ctx = _WORKER_CTX
    if ctx is None:
        raise RuntimeError("worker context is not initialized")
    lo, hi = bounds
    indices = ctx["valid_indices"][lo:hi]
    values = ctx["values"]
    period = ctx["period"]
    query_period = ctx["query_period"]
    n_vars = query_period.shape[1]
    coefficients = np.zeros(indices.size, dtype=np.int64)
    raw = np.empty((indices.size, n_vars), dtype=np.float64)
    for pos, k in enumerate(indices):
        instance = values[k]
        if ctx["rotation_mode"]:
            instance_spectrum = alignment.aggregate_rotation_spectrum(
                instance, ctx["rotation_variables"], None, ctx["transform"]
            )
            coef = alignment.resolve_rotation(
                ctx["query_spectrum"],
                instance_spectrum,
                use_shift_theorem=ctx["use_shift_theorem"],
            ).value
            coefficients[pos] = coef
            rotated = np.roll(instance, -coef, axis=0) if coef else instance
        else:
            rotated = instance
        raw[pos] = dissimilarity.instance_distances(
            query_period, rotated[period], ctx["distance_kind"]
        )
    return coefficients, raw


def run_pipeline(
    dataset: TimeSeriesDataset,
    query: QuerySequence,
    config: AssessmentConfig,
) -> SimilarityIndexMatrix:
    """Assess every dataset instance against the query.

    Validates the inputs (propagating ``ValidationError``), excludes
    instances with missing cells, and returns a result with one row per
    dataset instance in the original order.  With ``rotation_mode`` off
    the alignment stage is skipped and all rotations are reported as 0
    for assessed instances.
    """
    validate_inputs(dataset, query, config)
    k, n, _ = dataset.values.shape
    _, valid_indices = get_valid_instances(dataset)
    if valid_indices.size == 0:
        warnings.warn(
            "no instance is fully observed; every row is marked missing_data",
            stacklevel=2,
        )
        return simindex.all_missing_result(dataset.instance_ids)

    full = config.analysis_period.is_full(n)
    period = config.analysis_period.as_array()
    query_spectrum = None
    if config.rotation_mode:
        query_spectrum = alignment.aggregate_rotation_spectrum(
            query.values,
            config.rotation_variables.indices,
            None if full else config.analysis_period.indices,
            config.feature_transform,
        )

    context = {
        "values": dataset.values,
        "valid_indices": valid_indices,
        "period": period,
        "query_period": query.values[period],
        "rotation_mode": config.rotation_mode,
        "rotation_variables": config.rotation_variables.indices,
        "transform": config.feature_transform,
        "query_spectrum": query_spectrum,
        "use_shift_theorem": full and config.feature_transform == "dft",
        "distance_kind": config.distance_kind,
    }

    worker_count = resolve_worker_count(config.worker_count)
    plan = partition_tasks(valid_indices, worker_count)
    sizes = [chunk.size for chunk in plan.chunks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    bounds = [(int(offsets[i]), int(offsets[i + 1])) for i in range(len(sizes))]

    global _WORKER_CTX
    _WORKER_CTX = context
    try:
        parts = _execute(bounds, worker_count)
    finally:
        _WORKER_CTX = None

    coefficients = np.concatenate([p[0] for p in parts])
    raw_valid = np.vstack([p[1] for p in parts])

    rotation_array = np.full(k, NO_ROTATION, dtype=np.int64)
    rotation_array[valid_indices] = coefficients
    raw_distances = np.full((k, query.n_variables), np.nan)
    raw_distances[valid_indices] = raw_valid

    normalized = dissimilarity.normalize_and_weight(
        raw_distances, config.weights.as_array()
    )
    combined = simindex.combine_distances(normalized)
    similarity = simindex.to_similarity(combined)
    filtered, status = simindex.apply_filtering(similarity, config.filtering)
    return simindex.assemble(
        rotation_array,
        filtered,
        dataset.instance_ids,
        raw_combined=combined,
        status=status,
    )


def _execute(bounds, worker_count: int):
    """Run the chunk computations inline or on a fork pool."""
    if worker_count == 1 or len(bounds) <= 1:
        return [_compute_chunk(b) for b in bounds]
    try:
        mp_context = multiprocessing.get_context("fork")
    except ValueError:
        warnings.warn(
            "fork start method unavailable; running on a single worker",
            stacklevel=2,
        )
        return [_compute_chunk(b) for b in bounds]
    processes = min(worker_count, len(bounds))
    with mp_context.Pool(processes=processes) as pool:
        return pool.map(_compute_chunk, bounds)
