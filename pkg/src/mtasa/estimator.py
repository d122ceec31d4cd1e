"""Scikit-learn-style facade over the assessment pipeline.

``TimeSeriesSimilarity`` follows the fit/query pattern of the
``sklearn.neighbors`` family: ``fit`` indexes a reference dataset of
instances, ``assess`` scores a query against every indexed instance.
Parameters are stored verbatim at construction (so ``get_params``,
``set_params``, and ``clone`` behave normally) and are resolved and
validated when the data is seen.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import engine
from .model import (
    AnalysisPeriod,
    AssessmentConfig,
    Filtering,
    QuerySequence,
    RotationVariableSet,
    SimilarityIndexMatrix,
    TimeSeriesDataset,
    ValidationError,
    WeightVector,
    get_valid_instances,
)


class TimeSeriesSimilarity(BaseEstimator):
    """Assess how similar stored time-series instances are to a query.

    Parameters
    ----------
    weights : sequence of float, optional
        Per-variable importance weights summing to 1.  Default: uniform.
    analysis_period : sequence of int, optional
        Zero-based time indices distances are computed over.  Default:
        the full sequence.
    rotation_variables : sequence of int or str, optional
        Variables whose spectra drive rotation estimation, by index or by
        name.  Default: all variables.
    rotation_mode : bool, default True
        Estimate and apply the optimal circular rotation per instance
        before measuring distances.
    distance_kind : {'euclidean', 'dtw'}, default 'euclidean'
        Per-variable distance.  'dtw' is the usual choice when
        ``rotation_mode`` is off.
    feature_transform : {'dft', 'dwt'}, default 'dft'
        Feature transform behind rotation estimation.
    absolute_threshold : float, optional
        Keep only instances with similarity at or above this value.
        Mutually exclusive with ``top_k``.
    top_k : int, optional
        Keep only the k most similar instances.  Mutually exclusive with
        ``absolute_threshold``.
    worker_count : int or 'auto', default 1
        Worker processes for the assessment; 'auto' uses all cores.

    Attributes
    ----------
    dataset_ : TimeSeriesDataset
        The indexed reference dataset.
    n_timesteps_ : int
        Time-axis length N shared by dataset and queries.
    n_variables_ : int
        Number of measurement variables M.
    valid_instance_indices_ : ndarray
        Positions of the fully observed instances.

    Examples
    --------
    >>> import numpy as np
    >>> from mtasa import TimeSeriesSimilarity
    >>> rng = np.random.default_rng(0)
    >>> query = rng.normal(size=(12, 2))
    >>> dataset = np.stack([np.roll(query, d, axis=0) for d in range(5)])
    >>> result = TimeSeriesSimilarity().fit(dataset).assess(query)
    >>> list(result.rotation_array)
    [0, 1, 2, 3, 4]
    """

    def __init__(
        self,
        weights: Sequence[float] | None = None,
        analysis_period: Sequence[int] | None = None,
        rotation_variables: Sequence[int | str] | None = None,
        rotation_mode: bool = True,
        distance_kind: str = "euclidean",
        feature_transform: str = "dft",
        absolute_threshold: float | None = None,
        top_k: int | None = None,
        worker_count: int | str = 1,
    ):
        self.weights = weights
        self.analysis_period = analysis_period
        self.rotation_variables = rotation_variables
        self.rotation_mode = rotation_mode
        self.distance_kind = distance_kind
        self.feature_transform = feature_transform
        self.absolute_threshold = absolute_threshold
        self.top_k = top_k
        self.worker_count = worker_count

    def fit(self, X, y=None, instance_ids=None, variable_names=None):
        """Index the reference dataset.

        Parameters
        ----------
        X : TimeSeriesDataset or array-like of shape (K, N, M)
            Reference instances; NaN marks missing cells.
        y : ignored
            Present for scikit-learn API compatibility.
        instance_ids, variable_names : sequences, optional
            Labels for array input; defaults are generated.  Ignored when
            ``X`` is already a ``TimeSeriesDataset``.

        Returns
        -------
        self
        """
        if isinstance(X, TimeSeriesDataset):
            dataset = X
        else:
            arr = np.asarray(X, dtype=np.float64)
            if arr.ndim != 3:
                raise ValidationError(
                    f"expected a (K, N, M) array, got {arr.ndim} dimension(s)"
                )
            k, _, m = arr.shape
            if instance_ids is None:
                instance_ids = tuple(f"i{j}" for j in range(k))
            if variable_names is None:
                variable_names = tuple(f"v{j}" for j in range(m))
            dataset = TimeSeriesDataset(
                values=arr,
                instance_ids=tuple(instance_ids),
                variable_names=tuple(variable_names),
            )
        self.dataset_ = dataset
        self.n_timesteps_ = dataset.n_timesteps
        self.n_variables_ = dataset.n_variables
        _, self.valid_instance_indices_ = get_valid_instances(dataset)
        return self

    def assess(self, query) -> SimilarityIndexMatrix:
        """Score every indexed instance against ``query``.

        Parameters
        ----------
        query : QuerySequence or array-like of shape (N, M)
            Fully observed query on the dataset's grid.

        Returns
        -------
        SimilarityIndexMatrix
            Per-instance rotation, similarity index, and status, in the
            dataset's instance order.
        """
        self._check_fitted()
        if not isinstance(query, QuerySequence):
            query = QuerySequence(
                values=np.asarray(query, dtype=np.float64),
                variable_names=self.dataset_.variable_names,
            )
        return engine.run_pipeline(self.dataset_, query, self._build_config())

    def _check_fitted(self) -> None:
        if not hasattr(self, "dataset_"):
            raise NotFittedError(
                "this TimeSeriesSimilarity instance is not fitted yet; "
                "call fit before assess"
            )

    def _build_config(self) -> AssessmentConfig:
        m = self.n_variables_
        names = self.dataset_.variable_names
        if self.weights is None:
            weights = WeightVector(tuple([1.0 / m] * m))
        else:
            weights = WeightVector(tuple(self.weights))
        if self.analysis_period is None:
            period = AnalysisPeriod.full(self.n_timesteps_)
        else:
            period = AnalysisPeriod(tuple(self.analysis_period))
        if self.rotation_variables is None:
            rotation = RotationVariableSet(tuple(range(m)))
        else:
            indices = []
            for v in self.rotation_variables:
                if isinstance(v, str):
                    if v not in names:
                        raise ValidationError(f"unknown rotation variable {v!r}")
                    indices.append(names.index(v))
                else:
                    indices.append(int(v))
            rotation = RotationVariableSet(tuple(indices))
        if self.absolute_threshold is not None and self.top_k is not None:
            raise ValidationError(
                "absolute_threshold and top_k are mutually exclusive"
            )
        if self.absolute_threshold is not None:
            filtering = Filtering.absolute(self.absolute_threshold)
        elif self.top_k is not None:
            filtering = Filtering.relative(self.top_k)
        else:
            filtering = Filtering.none()
        return AssessmentConfig(
            measurement_vars=names,
            weights=weights,
            analysis_period=period,
            rotation_variables=rotation,
            rotation_mode=self.rotation_mode,
            distance_kind=self.distance_kind,
            feature_transform=self.feature_transform,
            filtering=filtering,
            worker_count=self.worker_count,
        )
