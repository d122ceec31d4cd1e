"""Spectral feature extraction: exact-length DFT machinery and a Haar DWT.

All transforms operate on the signal's own length N — composite or prime —
with no padding, so circular identities hold exactly on the native grid.
The Fourier kernel is numpy's pocketfft, which evaluates the exact DFT in
O(N log N) for every length.

Conventions: forward DFT uses the negative exponent and no scaling,
inverse applies the 1/N factor.  Circular convolution and circular
cross-correlation are evaluated through their frequency-domain products.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def _as_real_1d(signal, name: str) -> np.ndarray:
    arr = np.asarray(signal, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    return arr


def dft(signal) -> np.ndarray:
    """Discrete Fourier transform of a real signal.

    X[m] = sum_n x[n] * exp(-2j*pi*m*n / N), returned as a complex array
    of the same length.
    """
    return np.fft.fft(_as_real_1d(signal, "signal"))


def idft(spectrum) -> np.ndarray:
    """Inverse DFT, x[n] = (1/N) * sum_m X[m] * exp(+2j*pi*m*n / N).

    Returns a complex array; real inputs round-trip with imaginary parts
    at numerical noise level.
    """
    arr = np.asarray(spectrum, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("spectrum must be one-dimensional")
    if arr.size == 0:
        raise ValueError("spectrum must be non-empty")
    return np.fft.ifft(arr)


def circular_convolution(h, x) -> np.ndarray:
    """Circular convolution y[k] = sum_n h[n] * x[(k - n) mod N].

    Evaluated as idft(dft(h) * dft(x)); both inputs must share one length.
    """
    h = _as_real_1d(h, "h")
    x = _as_real_1d(x, "x")
    if h.shape != x.shape:
        raise ValueError(f"length mismatch: {h.size} vs {x.size}")
    return np.fft.ifft(np.fft.fft(h) * np.fft.fft(x)).real


def circular_cross_correlation(h, x) -> np.ndarray:
    """Circular cross-correlation z[k] = sum_n h[n] * x[(n + k) mod N].

    Evaluated as idft(conj(dft(h)) * dft(x)); both inputs must share one
    length.
    """
    h = _as_real_1d(h, "h")
    x = _as_real_1d(x, "x")
    if h.shape != x.shape:
        raise ValueError(f"length mismatch: {h.size} vs {x.size}")
    return np.fft.ifft(np.conj(np.fft.fft(h)) * np.fft.fft(x)).real


class DominantCoefficient(NamedTuple):
    """Largest-magnitude non-DC bin of a spectrum."""

    index: int
    magnitude: float
    phase: float


#: Relative window within which magnitudes count as tied.  A real signal's
#: bins m and N-m are equal in exact arithmetic but differ by a few ulps
#: after a finite-precision transform; the tie-break must not be decided
#: by that noise.
_TIE_RTOL = 1e-12


def dominant_coefficient(spectrum) -> DominantCoefficient:
    """Locate the dominant non-DC coefficient of a spectrum.

    The DC bin is ignored so constant offsets never masquerade as
    structure.  Ties — including ties up to floating-point rounding, such
    as the conjugate-mirror bins of a real signal — go to the smallest
    index.  The phase is reported in (-pi, pi].  Needs at least two bins.
    """
    arr = np.asarray(spectrum, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("spectrum must be one-dimensional")
    if arr.size < 2:
        raise ValueError("dominant coefficient needs at least two bins")
    magnitudes = np.abs(arr[1:])
    top = float(magnitudes.max())
    tied = np.flatnonzero(magnitudes >= top - top * _TIE_RTOL)
    index = int(tied[0]) + 1
    phase = float(np.angle(arr[index]))
    if phase <= -np.pi:
        phase = np.pi
    return DominantCoefficient(index, float(magnitudes[index - 1]), phase)


def dwt(signal) -> np.ndarray:
    """Single-level Haar transform, packed [approximation..., detail...].

    Pairs (x[2i], x[2i+1]) map to (x[2i]+x[2i+1])/sqrt(2) and
    (x[2i]-x[2i+1])/sqrt(2).  Odd lengths are handled by repeating the
    final sample to complete the last pair; the detail coefficient of that
    padded pair is structurally zero and is dropped, so the output always
    matches the input length.  Needs at least two samples.
    """
    x = _as_real_1d(signal, "signal")
    n = x.size
    if n < 2:
        raise ValueError("dwt needs at least two samples")
    odd = n % 2 == 1
    if odd:
        x = np.concatenate([x, x[-1:]])
    approx = (x[0::2] + x[1::2]) / np.sqrt(2.0)
    detail = (x[0::2] - x[1::2]) / np.sqrt(2.0)
    if odd:
        detail = detail[:-1]
    return np.concatenate([approx, detail])
