"""Multivariate time-series alignment and similarity assessment.

Given a reference dataset of equally long multivariate time-series
instances and a query sequence, this package finds, for every instance,
the circular rotation that best aligns it with the query and a weighted
similarity index in [0, 1] measured after alignment.  Alignment runs on
spectral features (cross-correlation via the Fourier domain, with a
phase-difference shortcut when both spectra share a fundamental dominant
tone); assessment is parallelized over instances with bit-identical
results for any worker count.

Entry points: :class:`TimeSeriesSimilarity` (fit/assess estimator),
:func:`mtasa.engine.run_pipeline` (functional core), and the ``mtasa``
command-line tool.
"""

from .engine import PipelineStagePlan, partition_tasks, run_pipeline
from .estimator import TimeSeriesSimilarity
from .model import (
    NO_ROTATION,
    STATUS_FILTERED,
    STATUS_MISSING,
    STATUS_OK,
    AnalysisPeriod,
    AssessmentConfig,
    DissimilarityMatrix,
    Filtering,
    QuerySequence,
    RotationVariableSet,
    SimilarityIndexMatrix,
    TimeSeriesDataset,
    ValidatedInputs,
    ValidationError,
    WeightVector,
    get_valid_instances,
    validate_inputs,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisPeriod",
    "AssessmentConfig",
    "DissimilarityMatrix",
    "Filtering",
    "NO_ROTATION",
    "PipelineStagePlan",
    "QuerySequence",
    "RotationVariableSet",
    "STATUS_FILTERED",
    "STATUS_MISSING",
    "STATUS_OK",
    "SimilarityIndexMatrix",
    "TimeSeriesDataset",
    "TimeSeriesSimilarity",
    "ValidatedInputs",
    "ValidationError",
    "WeightVector",
    "__version__",
    "get_valid_instances",
    "partition_tasks",
    "run_pipeline",
    "validate_inputs",
]
