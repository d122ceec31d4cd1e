"""Core data types and input validation for similarity assessment.

The central objects are a reference dataset of candidate instances (a
``K x N x M`` tensor: instances x time steps x variables), a single query
sequence measured on the same grid, and an assessment configuration that
fixes weights, the analysed sub-period, the variables driving rotation,
and the distance/feature options.  All containers are frozen: arrays are
copied on construction and marked read-only, so a validated bundle cannot
drift under the pipeline.

Missing values are encoded as NaN.  An instance with any missing cell is
excluded from assessment and marked ``missing_data`` in the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: |sum(weights) - 1| must not exceed this.
WEIGHT_SUM_TOLERANCE = 1e-9

#: Rotation-array marker for instances excluded from assessment.
NO_ROTATION = -1

# Per-instance status markers in assessment results.
STATUS_OK = "ok"
STATUS_FILTERED = "filtered"
STATUS_MISSING = "missing_data"

_STATUSES = frozenset({STATUS_OK, STATUS_FILTERED, STATUS_MISSING})

DISTANCE_KINDS = ("euclidean", "dtw")
FEATURE_TRANSFORMS = ("dft", "dwt")


class ValidationError(ValueError):
    """An input object or bundle violates a structural invariant."""


def _frozen_array(values, *, dtype=np.float64, ndim: int, name: str) -> np.ndarray:
    """Copy ``values`` to a read-only array of the expected rank."""
    arr = np.array(values, dtype=dtype)
    if arr.ndim != ndim:
        raise ValidationError(
            f"{name} must be {ndim}-dimensional, got {arr.ndim} dimension(s)"
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    """Reference dataset: ``values`` with shape (K instances, N steps, M vars).

    Invariants: K >= 1, N >= 2, M >= 1; ``instance_ids`` are unique and
    align with axis 0; ``variable_names`` align with axis 2.  NaN marks a
    missing cell.
    """

    values: np.ndarray
    instance_ids: tuple[str, ...]
    variable_names: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, ndim=3, name="dataset values")
        k, n, m = arr.shape
        if k < 1:
            raise ValidationError("dataset needs at least one instance")
        if n < 2:
            raise ValidationError(f"dataset needs at least two time steps, got {n}")
        if m < 1:
            raise ValidationError("dataset needs at least one variable")
        ids = tuple(str(i) for i in self.instance_ids)
        if len(ids) != k:
            raise ValidationError(
                f"got {len(ids)} instance ids for {k} instances"
            )
        if len(set(ids)) != len(ids):
            raise ValidationError("instance ids must be unique")
        names = tuple(str(v) for v in self.variable_names)
        if len(names) != m:
            raise ValidationError(
                f"got {len(names)} variable names for {m} variables"
            )
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "variable_names", names)

    @property
    def n_instances(self) -> int:
        return self.values.shape[0]

    @property
    def n_timesteps(self) -> int:
        return self.values.shape[1]

    @property
    def n_variables(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True, eq=False)
class QuerySequence:
    """The sequence to assess against, shape (N, M), fully observed.

    A query with missing cells is rejected outright: there is nothing
    sensible to align against a hole in the reference pattern.
    """

    values: np.ndarray
    variable_names: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, ndim=2, name="query values")
        n, m = arr.shape
        if n < 2:
            raise ValidationError(f"query needs at least two time steps, got {n}")
        names = tuple(str(v) for v in self.variable_names)
        if len(names) != m:
            raise ValidationError(
                f"got {len(names)} variable names for {m} variables"
            )
        if np.isnan(arr).any():
            raise ValidationError("query contains missing cells")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "variable_names", names)

    @property
    def n_timesteps(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WeightVector:
    """Per-variable importance weights, each in [0, 1], summing to 1.

    The sum is checked to within ``WEIGHT_SUM_TOLERANCE`` so that weights
    entered as decimals (0.35, 0.25, 0.2, 0.2) pass exactly as written.
    """

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.weights)
        if len(w) == 0:
            raise ValidationError("weights must be non-empty")
        for v in w:
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"weight {v} outside [0, 1]")
        total = float(np.sum(np.asarray(w)))
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValidationError(
                f"weights must sum to 1 within {WEIGHT_SUM_TOLERANCE}, got {total!r}"
            )
        object.__setattr__(self, "weights", w)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class AnalysisPeriod:
    """Zero-based time indices over which distances are computed.

    Indices are strictly increasing.  A period covering every index is
    full-sequence mode; anything shorter puts the alignment stage into
    subsequence mode.
    """

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValidationError("analysis period must be non-empty")
        if idx[0] < 0:
            raise ValidationError(f"analysis period index {idx[0]} is negative")
        for a, b in zip(idx, idx[1:]):
            if b <= a:
                raise ValidationError(
                    "analysis period indices must be strictly increasing"
                )
        object.__setattr__(self, "indices", idx)

    @classmethod
    def full(cls, n_timesteps: int) -> "AnalysisPeriod":
        return cls(tuple(range(int(n_timesteps))))

    def is_full(self, n_timesteps: int) -> bool:
        return len(self.indices) == int(n_timesteps)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class RotationVariableSet:
    """Indices of the variables whose spectra drive rotation estimation."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValidationError("rotation variable set must be non-empty")
        if len(set(idx)) != len(idx):
            raise ValidationError("rotation variable indices must be distinct")
        for i in idx:
            if i < 0:
                raise ValidationError(f"rotation variable index {i} is negative")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Filtering:
    """Result filtering: keep everything, a similarity floor, or a top-k cut.

    ``absolute`` keeps instances whose similarity is >= ``threshold``
    (strictly-below entries are filtered).  ``relative`` keeps the ``k``
    most similar instances, ties broken toward the smaller instance index.
    """

    kind: str = "none"
    threshold: float | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "absolute", "relative"):
            raise ValidationError(f"unknown filtering kind {self.kind!r}")
        if self.kind == "absolute":
            if self.threshold is None:
                raise ValidationError("absolute filtering needs a threshold")
            t = float(self.threshold)
            if not (0.0 <= t <= 1.0):
                raise ValidationError(f"similarity threshold {t} outside [0, 1]")
            object.__setattr__(self, "threshold", t)
        elif self.threshold is not None:
            raise ValidationError("threshold only applies to absolute filtering")
        if self.kind == "relative":
            if self.k is None:
                raise ValidationError("relative filtering needs k")
            k = int(self.k)
            if k < 1:
                raise ValidationError(f"relative filtering needs k >= 1, got {k}")
            object.__setattr__(self, "k", k)
        elif self.k is not None:
            raise ValidationError("k only applies to relative filtering")

    @classmethod
    def none(cls) -> "Filtering":
        return cls(kind="none")

    @classmethod
    def absolute(cls, threshold: float) -> "Filtering":
        return cls(kind="absolute", threshold=threshold)

    @classmethod
    def relative(cls, k: int) -> "Filtering":
        return cls(kind="relative", k=k)


@dataclass(frozen=True)
class AssessmentConfig:
    """Everything the pipeline needs besides the data itself."""

    measurement_vars: tuple[str, ...]
    weights: WeightVector
    analysis_period: AnalysisPeriod
    rotation_variables: RotationVariableSet
    rotation_mode: bool = True
    distance_kind: str = "euclidean"
    feature_transform: str = "dft"
    filtering: Filtering = field(default_factory=Filtering.none)
    worker_count: int | str = 1

    def __post_init__(self) -> None:
        names = tuple(str(v) for v in self.measurement_vars)
        if len(names) == 0:
            raise ValidationError("measurement_vars must be non-empty")
        object.__setattr__(self, "measurement_vars", names)
        if len(self.weights) != len(names):
            raise ValidationError(
                f"{len(self.weights)} weights for {len(names)} measurement variables"
            )
        if self.distance_kind not in DISTANCE_KINDS:
            raise ValidationError(f"unknown distance kind {self.distance_kind!r}")
        if self.feature_transform not in FEATURE_TRANSFORMS:
            raise ValidationError(
                f"unknown feature transform {self.feature_transform!r}"
            )
        wc = self.worker_count
        if wc != "auto":
            wc = int(wc)
            if wc < 1:
                raise ValidationError(f"worker_count must be >= 1, got {wc}")
            object.__setattr__(self, "worker_count", wc)


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Weighted, normalized per-variable distances, shape (K, M).

    Each finite entry lies in [0, weights[m]]; rows of excluded instances
    are NaN.
    """

    values: np.ndarray
    weights: WeightVector

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, ndim=2, name="dissimilarity values")
        w = self.weights.as_array()
        if arr.shape[1] != len(w):
            raise ValidationError(
                f"{arr.shape[1]} distance columns for {len(w)} weights"
            )
        finite = ~np.isnan(arr)
        if np.any(arr[finite] < 0.0):
            raise ValidationError("dissimilarity entries must be non-negative")
        bound = np.broadcast_to(w, arr.shape)
        if np.any(arr[finite] > bound[finite] + 1e-12):
            raise ValidationError("dissimilarity entry exceeds its variable weight")
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class SimilarityIndexMatrix:
    """Assessment result: per-instance rotation and similarity index.

    ``rotation_array`` holds the applied rotation (``NO_ROTATION`` for
    excluded instances).  ``similarity_array`` holds the similarity index
    in [0, 1], NaN for filtered or excluded instances.  ``raw_combined``
    keeps the combined weighted distance before conversion to similarity
    (NaN for excluded instances), and ``status`` distinguishes kept,
    filtered, and missing-data rows.
    """

    rotation_array: np.ndarray
    similarity_array: np.ndarray
    raw_combined: np.ndarray
    status: tuple[str, ...]
    instance_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        rot = _frozen_array(self.rotation_array, dtype=np.int64, ndim=1,
                            name="rotation array")
        sim = _frozen_array(self.similarity_array, ndim=1, name="similarity array")
        raw = _frozen_array(self.raw_combined, ndim=1, name="raw combined index")
        status = tuple(str(s) for s in self.status)
        ids = tuple(str(i) for i in self.instance_ids)
        k = len(ids)
        if not (len(rot) == len(sim) == len(raw) == len(status) == k):
            raise ValidationError("result columns disagree on instance count")
        if np.any(rot < NO_ROTATION):
            raise ValidationError("rotation entries must be >= -1")
        finite = ~np.isnan(sim)
        if np.any((sim[finite] < 0.0) | (sim[finite] > 1.0)):
            raise ValidationError("similarity index outside [0, 1]")
        for s in status:
            if s not in _STATUSES:
                raise ValidationError(f"unknown status marker {s!r}")
        object.__setattr__(self, "rotation_array", rot)
        object.__setattr__(self, "similarity_array", sim)
        object.__setattr__(self, "raw_combined", raw)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "instance_ids", ids)

    @property
    def n_instances(self) -> int:
        return len(self.instance_ids)

    def to_array(self) -> np.ndarray:
        """The 2 x K view: rotation row over similarity row (floats)."""
        return np.vstack([
            self.rotation_array.astype(np.float64),
            self.similarity_array,
        ])


@dataclass(frozen=True, eq=False)
class ValidatedInputs:
    """A dataset/query/config triple that passed ``validate_inputs``."""

    dataset: TimeSeriesDataset
    query: QuerySequence
    config: AssessmentConfig


def validate_inputs(
    dataset: TimeSeriesDataset,
    query: QuerySequence,
    config: AssessmentConfig,
) -> ValidatedInputs:
    """Check every cross-object invariant and return the bundle unchanged.

    Raises ``ValidationError`` naming the first violated invariant.
    Validation is idempotent: a bundle that passed once passes again.
    """
    k, n, m = dataset.values.shape
    if len(config.weights) != m:
        raise ValidationError(
            f"{len(config.weights)} weights for {m} dataset variables"
        )
    if query.values.shape != (n, m):
        raise ValidationError(
            f"query shape {query.values.shape} does not match dataset ({n}, {m})"
        )
    if query.variable_names != dataset.variable_names:
        raise ValidationError("query and dataset variable names disagree")
    if config.measurement_vars != dataset.variable_names:
        raise ValidationError(
            "configured measurement variables do not match the dataset"
        )
    period = config.analysis_period.indices
    if period[-1] >= n:
        raise ValidationError(
            f"analysis period index {period[-1]} out of range for N={n}"
        )
    for i in config.rotation_variables.indices:
        if i >= m:
            raise ValidationError(
                f"rotation variable index {i} out of range for M={m}"
            )
    if np.isnan(query.values).any():  # unreachable via QuerySequence, re-checked
        raise ValidationError("query contains missing cells")
    if config.filtering.kind == "relative" and config.filtering.k > k:
        # allowed: the filter keeps everything, the engine warns at run time
        pass
    return ValidatedInputs(dataset=dataset, query=query, config=config)


def get_valid_instances(
    dataset: TimeSeriesDataset,
) -> tuple[np.ndarray, np.ndarray]:
    """Split off the fully observed instances.

    Returns ``(valid_values, valid_indices)`` where ``valid_values`` is the
    (V, N, M) restriction of the dataset to instances without missing cells
    and ``valid_indices`` are their positions in the original instance axis,
    in ascending order.
    """
    has_missing = np.isnan(dataset.values).any(axis=(1, 2))
    valid_indices = np.flatnonzero(~has_missing)
    return dataset.values[valid_indices], valid_indices
