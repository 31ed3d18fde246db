"""Discrete Fourier analysis of wavelength traces.

The transform core is self-contained: an iterative radix-2 algorithm for
power-of-two lengths and Bluestein's chirp-z algorithm for every other
length, so records of arbitrary duration transform in O(N log N) without
truncation. Magnitude spectra are scaled to physical amplitude (a unit
sinusoid on a bin reports 1.0), and feature extraction separates the slow
shape content from the tool-locked line and its integer multiples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParameterError

WINDOWS = ("rectangular", "hann")

#: Boundary between shape-band content and tool-excited content (Hz).
DEFAULT_SHAPE_CUTOFF_HZ = 0.05
#: Tool-driven spectral content of interest does not extend past this (Hz).
DEFAULT_MAX_FREQ_HZ = 40.0
#: Minimum peak prominence (nm); five times the simulator noise floor.
DEFAULT_MIN_PROMINENCE_NM = 0.01


def _fft_pow2(x):
    """Iterative radix-2 decimation-in-time transform. len(x) must be 2**m."""
    n = x.shape[0]
    if n == 1:
        return x.astype(np.complex128)
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    a = x[rev].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp((-2j * np.pi / size) * np.arange(half))
        a = a.reshape(-1, size)
        even = a[:, :half]
        odd = a[:, half:] * tw
        a = np.concatenate((even + odd, even - odd), axis=1).ravel()
        size *= 2
    return a


def _ifft_pow2(x):
    return np.conj(_fft_pow2(np.conj(x))) / x.shape[0]


def _fft_bluestein(x):
    """Chirp-z transform of arbitrary length via a power-of-two convolution."""
    n = x.shape[0]
    ks = np.arange(n, dtype=np.int64)
    # k^2 mod 2n keeps the chirp phase exact for large n.
    expo = (ks * ks) % (2 * n)
    chirp = np.exp((-1j * np.pi / n) * expo)
    a = x * chirp
    m = 1 << (2 * n - 1).bit_length()
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:])[::-1]
    fa = _fft_pow2(np.concatenate((a, np.zeros(m - n, dtype=np.complex128))))
    fb = _fft_pow2(b)
    conv = _ifft_pow2(fa * fb)[:n]
    return conv * chirp


def fft_forward(x):
    """Forward transform of a real or complex sequence, any length N >= 1."""
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] == 0:
        raise DataError("transform input must be a non-empty 1-D array")
    n = x.shape[0]
    if n & (n - 1) == 0:
        return _fft_pow2(x)
    return _fft_bluestein(x)


@dataclass(frozen=True)
class Spectrum:
    """Complex transform bins of a uniformly sampled record.

    Bin k corresponds to frequency k * sample_rate_hz / n.
    """

    n: int
    sample_rate_hz: float
    bins: np.ndarray
    window: str = "rectangular"

    def __post_init__(self):
        if self.n < 1 or self.bins.shape != (self.n,):
            raise DataError("bin count must match the transform length")
        if self.sample_rate_hz <= 0:
            raise ParameterError("sample_rate_hz must be positive")
        if self.window not in WINDOWS:
            raise ParameterError(f"unknown window {self.window!r}")

    def frequencies(self):
        return np.arange(self.n) * (self.sample_rate_hz / self.n)


def dft(x, sample_rate_hz=1.0):
    """N-point transform X[k] = sum_n x[n] exp(-j 2 pi k n / N).

    Computed with a fast algorithm for any N, including primes; raises
    DataError on empty input.
    """
    x = np.asarray(x, dtype=float)
    bins = fft_forward(x)
    return Spectrum(n=x.shape[0], sample_rate_hz=float(sample_rate_hz), bins=bins)


def _window_values(window, n):
    if window == "rectangular":
        return np.ones(n)
    if window == "hann":
        # Periodic form: integer-bin lines leak into adjacent bins only.
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    raise ParameterError(f"unknown window {window!r}; expected one of {WINDOWS}")


def magnitude_spectrum(x, sample_rate_hz, window="rectangular", zero_pad_to=None):
    """One-sided amplitude spectrum over [0, sample_rate_hz / 2].

    Amplitudes are scaled by the window's coherent gain so a unit sinusoid
    landing on a bin reports 1.0 for either window choice.

    Returns
    -------
    (frequencies_hz, magnitude) : two aligned 1-D arrays.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] == 0:
        raise DataError("channel must be a non-empty 1-D array")
    n = x.shape[0]
    w = _window_values(window, n)
    xw = x * w
    if zero_pad_to is not None:
        if zero_pad_to < n:
            raise DataError(f"zero_pad_to={zero_pad_to} is smaller than the input ({n})")
        xw = np.concatenate((xw, np.zeros(zero_pad_to - n)))
    m = xw.shape[0]
    bins = fft_forward(xw)
    half = m // 2
    freqs = np.arange(half + 1) * (float(sample_rate_hz) / m)
    mags = np.abs(bins[: half + 1]) * (2.0 / np.sum(w))
    mags[0] *= 0.5
    if m % 2 == 0:
        mags[-1] *= 0.5
    return freqs, mags


@dataclass(frozen=True)
class SpectralPeak:
    frequency_hz: float
    amplitude: float
    prominence: float


def find_peaks(freqs, mags, min_prominence=DEFAULT_MIN_PROMINENCE_NM,
               max_freq_hz=DEFAULT_MAX_FREQ_HZ):
    """Local maxima of a magnitude spectrum, strongest first.

    Prominence is measured against the lower of the two adjacent valley
    minima (the spans until the next higher sample on each side). Peaks
    above max_freq_hz are dropped; an empty list is a valid result.
    """
    if min_prominence <= 0:
        raise ParameterError("min_prominence must be positive")
    freqs = np.asarray(freqs, dtype=float)
    mags = np.asarray(mags, dtype=float)
    peaks = []
    for i in range(1, mags.shape[0] - 1):
        if not (mags[i] > mags[i - 1] and mags[i] > mags[i + 1]):
            continue
        if freqs[i] > max_freq_hz:
            continue
        j = i - 1
        while j > 0 and mags[j] <= mags[i]:
            j -= 1
        left_valley = mags[j:i].min()
        j = i + 1
        while j < mags.shape[0] - 1 and mags[j] <= mags[i]:
            j += 1
        right_valley = mags[i + 1: j + 1].min()
        prom = mags[i] - min(left_valley, right_valley)
        if prom >= min_prominence:
            peaks.append(SpectralPeak(float(freqs[i]), float(mags[i]), float(prom)))
    peaks.sort(key=lambda p: p.amplitude, reverse=True)
    return peaks


@dataclass(frozen=True)
class SpectralFeatures:
    """Shape-band line, tool-locked line, and its integer multiples."""

    base_frequency_hz: float | None = None
    base_amplitude_nm: float | None = None
    fundamental_hz: float | None = None
    fundamental_amplitude_nm: float | None = None
    harmonics_hz: tuple = field(default_factory=tuple)
    harmonic_amplitudes_nm: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if (self.base_frequency_hz is not None and self.fundamental_hz is not None
                and not self.base_frequency_hz < self.fundamental_hz):
            raise DataError("base frequency must lie below the fundamental")


def identify_features(x, sample_rate_hz, rpm_hint=None, window="hann",
                      shape_cutoff_hz=DEFAULT_SHAPE_CUTOFF_HZ,
                      min_prominence=DEFAULT_MIN_PROMINENCE_NM,
                      max_freq_hz=DEFAULT_MAX_FREQ_HZ,
                      max_harmonic=5):
    """Extract base frequency, fundamental, and harmonics from one channel.

    The channel mean is removed before the transform so the large static
    wavelength does not leak into the shape band. The base frequency is the
    strongest peak at or below shape_cutoff_hz; the fundamental is the
    strongest peak above it, snapped to rpm_hint / 60 when within two bins.
    An absent fundamental signals vibration-free data.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] == 0:
        raise DataError("channel must be a non-empty 1-D array")
    resolution = float(sample_rate_hz) / x.shape[0]
    if resolution > 0.5:
        raise DataError(
            f"frequency resolution {resolution:.3f} Hz is coarser than 0.5 Hz; "
            "supply at least 2 s of data")
    freqs, mags = magnitude_spectrum(x - x.mean(), sample_rate_hz, window=window)
    peaks = find_peaks(freqs, mags, min_prominence=min_prominence,
                       max_freq_hz=max_freq_hz)

    base = next((p for p in peaks if p.frequency_hz <= shape_cutoff_hz), None)
    fund = next((p for p in peaks if p.frequency_hz > shape_cutoff_hz), None)
    if fund is None:
        return SpectralFeatures(
            base_frequency_hz=base.frequency_hz if base else None,
            base_amplitude_nm=base.amplitude if base else None)

    f0 = fund.frequency_hz
    if rpm_hint is not None and rpm_hint > 0:
        hinted = rpm_hint / 60.0
        if abs(f0 - hinted) <= 2.0 * resolution:
            f0 = hinted
    harmonics, amplitudes = [], []
    for m in range(2, max_harmonic + 1):
        target = m * f0
        match = min((p for p in peaks if abs(p.frequency_hz - target) <= resolution),
                    key=lambda p: abs(p.frequency_hz - target), default=None)
        if match is not None:
            harmonics.append(match.frequency_hz)
            amplitudes.append(match.amplitude)
    return SpectralFeatures(
        base_frequency_hz=base.frequency_hz if base else None,
        base_amplitude_nm=base.amplitude if base else None,
        fundamental_hz=f0,
        fundamental_amplitude_nm=fund.amplitude,
        harmonics_hz=tuple(harmonics),
        harmonic_amplitudes_nm=tuple(amplitudes))


def spectrum_rows(freqs, mags):
    """Rows for the two-column spectrum CSV (frequency_hz, magnitude_nm)."""
    lines = ["frequency_hz,magnitude_nm"]
    for f, m in zip(freqs, mags):
        lines.append(f"{f:.9f},{m:.9g}")
    return "\n".join(lines) + "\n"
