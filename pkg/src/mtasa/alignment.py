"""Circular alignment of dataset instances to a query.

Alignment asks: by how many steps must an instance be rotated so that it
best matches the query?  The answer maximizes the circular
cross-correlation between the aggregate rotation signals of the two
sequences.  Two routes produce it:

* ``rotation_coefficient_xcorr`` — evaluate the full cross-correlation and
  take the argmax.  Always applicable; this is the reference route.
* ``rotation_coefficient_shift_theorem`` — when both spectra concentrate
  on the same dominant bin, the phase difference of that bin encodes the
  shift directly and the argmax can be skipped.

The phase of bin ``m`` only determines a shift modulo ``N/m``, so the fast
route is trusted only when the shared dominant bin is the fundamental
(index 1), where the phase pins the shift uniquely.  Any other agreement,
any dominant-bin mismatch, a non-Fourier feature transform, and
subsequence queries all fall back to the cross-correlation route, which
is optimal by construction.

Coefficient convention: an instance that lags the query by ``d`` steps
(``instance[t] == query[(t - d) mod N]``) has rotation coefficient ``d``,
and applying the rotation advances the instance by ``d``:
``rotated[t] == instance[(t + d) mod N]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import spectral
from .model import NO_ROTATION, AssessmentConfig, QuerySequence

# path_taken markers
CROSS_CORRELATION = "cross_correlation"
DFT_SHIFTING = "dft_shifting"


@dataclass(frozen=True, eq=False)
class RotationTask:
    """One instance queued for rotation estimation against a query."""

    instance_index: int
    instance_values: np.ndarray  # (N, M), fully observed
    query: QuerySequence


@dataclass(frozen=True)
class RotationCoefficient:
    """An estimated rotation plus the route that produced it."""

    value: int
    path_taken: str

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"rotation coefficient {self.value} is negative")
        if self.path_taken not in (CROSS_CORRELATION, DFT_SHIFTING):
            raise ValueError(f"unknown alignment path {self.path_taken!r}")


class ShiftTheoremEstimate(NamedTuple):
    """Shift recovered from a shared dominant bin's phase difference."""

    value: int
    dominant_index: int


def aggregate_rotation_spectrum(
    series,
    variables: Sequence[int],
    period: Sequence[int] | None = None,
    transform: str = "dft",
) -> np.ndarray:
    """Transform of the summed rotation-variable signal of one sequence.

    ``series`` is an (N, M) array; the selected variable columns are summed
    sample-wise into a single length-N signal before the transform, so one
    spectrum drives alignment regardless of how many variables vote.

    ``period`` restricts the signal to a sub-period: samples outside it are
    zeroed while the kept samples stay at their original time indices, so
    the transform length (and hence the rotation grid) is still N.  Pass
    ``None`` — or a period covering every index — for the full signal.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("series must be two-dimensional (time x variables)")
    n = arr.shape[0]
    cols = list(variables)
    if len(cols) == 0:
        raise ValueError("need at least one rotation variable")
    signal = arr[:, cols].sum(axis=1)
    if period is not None:
        keep = np.asarray(period, dtype=np.intp)
        if keep.size < n:
            restricted = np.zeros(n, dtype=np.float64)
            restricted[keep] = signal[keep]
            signal = restricted
    if transform == "dft":
        return spectral.dft(signal)
    if transform == "dwt":
        return spectral.dwt(signal)
    raise ValueError(f"unknown feature transform {transform!r}")


def rotation_coefficient_xcorr(query_spectrum, instance_spectrum) -> int:
    """Optimal rotation via the cross-correlation argmax.

    Correlating instance against query peaks at the lag ``t*`` where the
    query best overlays the instance; the instance must be advanced by
    ``(N - t*) mod N`` to align, which is the returned coefficient.  Ties
    resolve to the smallest coefficient's lag via the first argmax.
    """
    x = np.asarray(query_spectrum)
    y = np.asarray(instance_spectrum)
    if x.shape != y.shape:
        raise ValueError(f"spectrum length mismatch: {x.shape} vs {y.shape}")
    response = np.fft.ifft(np.conj(y) * x).real
    n = response.size
    lag = int(np.argmax(response))
    return (n - lag) % n


def rotation_coefficient_shift_theorem(
    query_spectrum, instance_spectrum
) -> ShiftTheoremEstimate | None:
    """Shift estimate from the dominant bins' phase difference.

    If both spectra have the same dominant bin ``m`` with phases ``a`` and
    ``b``, a circular shift by ``d`` satisfies ``a - b = 2*pi*m*d / N``, so
    ``d = (a - b) * N / (2*pi*m)`` rounded to the nearest integer (half away
    from zero) and reduced mod N.  Returns None when the dominant bins
    disagree — the signal that the spectra are not shifted copies and the
    cross-correlation route must decide.
    """
    x = np.asarray(query_spectrum, dtype=np.complex128)
    y = np.asarray(instance_spectrum, dtype=np.complex128)
    if x.shape != y.shape:
        raise ValueError(f"spectrum length mismatch: {x.shape} vs {y.shape}")
    dom_x = spectral.dominant_coefficient(x)
    dom_y = spectral.dominant_coefficient(y)
    if dom_x.index != dom_y.index:
        return None
    n = x.size
    theta = dom_x.phase - dom_y.phase
    raw = theta * n / (2.0 * math.pi * dom_x.index)
    return ShiftTheoremEstimate(_round_half_away(raw) % n, dom_x.index)


def _round_half_away(value: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    if value >= 0.0:
        return int(math.floor(value + 0.5))
    return int(math.ceil(value - 0.5))


def resolve_rotation(
    query_spectrum,
    instance_spectrum,
    use_shift_theorem: bool,
) -> RotationCoefficient:
    """Pick the alignment route for one spectrum pair.

    The shift-theorem shortcut is attempted only when the caller allows it
    (full-sequence Fourier mode) and is accepted only for a shared
    fundamental bin; everything else goes through the cross-correlation
    argmax.
    """
    if use_shift_theorem:
        estimate = rotation_coefficient_shift_theorem(
            query_spectrum, instance_spectrum
        )
        if estimate is not None and estimate.dominant_index == 1:
            return RotationCoefficient(estimate.value, DFT_SHIFTING)
    return RotationCoefficient(
        rotation_coefficient_xcorr(query_spectrum, instance_spectrum),
        CROSS_CORRELATION,
    )


def compute_rotation_coef(
    task: RotationTask, config: AssessmentConfig
) -> RotationCoefficient:
    """Rotation coefficient of one fully observed instance against a query.

    The query's rotation signal honours the analysis period (subsequence
    queries are zero-extended onto the full grid); the instance's signal is
    always full length.  Subsequence mode and non-Fourier transforms use
    the cross-correlation route exclusively.
    """
    n = task.query.n_timesteps
    if task.instance_values.shape != task.query.values.shape:
        raise ValueError("instance and query shapes disagree")
    variables = config.rotation_variables.indices
    full = config.analysis_period.is_full(n)
    transform = config.feature_transform
    query_spectrum = aggregate_rotation_spectrum(
        task.query.values,
        variables,
        None if full else config.analysis_period.indices,
        transform,
    )
    instance_spectrum = aggregate_rotation_spectrum(
        task.instance_values, variables, None, transform
    )
    return resolve_rotation(
        query_spectrum,
        instance_spectrum,
        use_shift_theorem=full and transform == "dft",
    )


def rotate_dataset(values: np.ndarray, rotation_array) -> np.ndarray:
    """Apply per-instance rotations to a (K, N, M) tensor.

    Instance ``k`` is advanced along the time axis by ``rotation_array[k]``
    steps: ``out[k, t] = values[k, (t + r_k) mod N]``.  Entries marked
    ``NO_ROTATION`` are copied through untouched.  Always returns a new
    array.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError("values must be three-dimensional (K, N, M)")
    rotations = np.asarray(rotation_array, dtype=np.int64)
    if rotations.shape != (arr.shape[0],):
        raise ValueError(
            f"need one rotation per instance, got {rotations.shape} for "
            f"{arr.shape[0]} instances"
        )
    if np.any(rotations < NO_ROTATION):
        raise ValueError("rotation entries must be >= -1")
    out = arr.copy()
    for k, r in enumerate(rotations):
        if r > 0:
            out[k] = np.roll(arr[k], -int(r), axis=0)
    return out
