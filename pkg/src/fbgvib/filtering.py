"""Band-stop cascades keyed to the tool rate, plus a low-pass extractor.

Each notch is a single second-order section with its zeros placed on the
unit circle at the notch frequency and its poles pulled inside at a radius
set by the requested -3 dB width, normalized for exactly unit gain at DC.
Filters are applied forward and backward per section so the cascade has
zero net phase: shape changes and collision transients keep their timing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt, sosfilt_zi

from .errors import DataError, ParameterError

#: Cascade response required at every declared notch center.
NOTCH_FLOOR_DB = -40.0

#: Default notch width relative to the fundamental, with an absolute floor.
DEFAULT_BANDWIDTH_RATIO = 0.125
MIN_BANDWIDTH_HZ = 0.2

DEFAULT_N_HARMONICS = 3


@dataclass(frozen=True)
class BiquadSection:
    """Second-order rational section with unit leading denominator."""

    b0: float
    b1: float
    b2: float
    a1: float
    a2: float

    def __post_init__(self):
        poles = np.roots([1.0, self.a1, self.a2])
        if poles.size and np.max(np.abs(poles)) >= 1.0:
            raise ParameterError("unstable section: poles must lie inside the unit circle")

    def pole_radius(self):
        poles = np.roots([1.0, self.a1, self.a2])
        return float(np.max(np.abs(poles))) if poles.size else 0.0

    def response(self, z_inv):
        num = self.b0 + self.b1 * z_inv + self.b2 * z_inv * z_inv
        den = 1.0 + self.a1 * z_inv + self.a2 * z_inv * z_inv
        return num / den


@dataclass(frozen=True)
class FilterSpec:
    """Immutable cascade of stable second-order sections."""

    sections: tuple
    sample_rate_hz: float
    notches: tuple = ()  # (center_hz, bandwidth_hz) per declared notch

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ParameterError("sample_rate_hz must be positive")
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "notches", tuple(self.notches))
        for center, _ in self.notches:
            gain = abs(self.response(center))
            if gain > 10.0 ** (NOTCH_FLOOR_DB / 20.0):
                raise ParameterError(
                    f"cascade response at {center} Hz is above {NOTCH_FLOOR_DB} dB")

    def response(self, frequency_hz):
        """Complex single-pass response at one or more frequencies (Hz)."""
        f = np.asarray(frequency_hz, dtype=float)
        z_inv = np.exp(-2j * np.pi * f / self.sample_rate_hz)
        h = np.ones_like(z_inv, dtype=complex)
        for s in self.sections:
            h *= s.response(z_inv)
        if np.isscalar(frequency_hz):
            return complex(h)
        return h

    def sos(self):
        return np.array([[s.b0, s.b1, s.b2, 1.0, s.a1, s.a2] for s in self.sections])


def _notch_section(center_hz, bandwidth_hz, sample_rate_hz):
    w0 = 2.0 * np.pi * center_hz / sample_rate_hz
    # Pole radius fixes the -3 dB width for narrow notches.
    r = 1.0 - np.pi * bandwidth_hz / sample_rate_hz
    if r <= 0:
        raise ParameterError("bandwidth too wide for this sample rate")
    cw = np.cos(w0)
    gain = (1.0 - 2.0 * r * cw + r * r) / (2.0 - 2.0 * cw)
    return BiquadSection(b0=gain, b1=-2.0 * gain * cw, b2=gain,
                         a1=-2.0 * r * cw, a2=r * r)


def default_bandwidth_hz(fundamental_hz):
    return max(DEFAULT_BANDWIDTH_RATIO * fundamental_hz, MIN_BANDWIDTH_HZ)


def design_bandstop(fundamental_hz, n_harmonics=DEFAULT_N_HARMONICS,
                    bandwidth_hz=None, sample_rate_hz=1000.0):
    """Notch cascade at the fundamental and its integer multiples.

    One section per multiple m in 1..n_harmonics, centered at
    m * fundamental_hz with -3 dB width bandwidth_hz and exactly unit DC
    gain. Raises ParameterError when any notch would sit at or above the
    Nyquist frequency.
    """
    if fundamental_hz <= 0:
        raise ParameterError("fundamental_hz must be positive")
    if n_harmonics < 1:
        raise ParameterError("n_harmonics must be at least 1")
    if bandwidth_hz is None:
        bandwidth_hz = default_bandwidth_hz(fundamental_hz)
    if bandwidth_hz <= 0:
        raise ParameterError("bandwidth_hz must be positive")
    nyquist = sample_rate_hz / 2.0
    centers = [m * fundamental_hz for m in range(1, n_harmonics + 1)]
    if centers[-1] >= nyquist:
        raise ParameterError(
            f"notch at {centers[-1]} Hz is at or above the Nyquist frequency {nyquist} Hz")
    sections = [_notch_section(c, bandwidth_hz, sample_rate_hz) for c in centers]
    return FilterSpec(sections=tuple(sections), sample_rate_hz=sample_rate_hz,
                      notches=tuple((c, bandwidth_hz) for c in centers))


def design_lowpass(cutoff_hz, sample_rate_hz):
    """Second-order Butterworth low-pass (-3 dB at cutoff), bilinear form."""
    if not (0.0 < cutoff_hz < sample_rate_hz / 2.0):
        raise ParameterError("cutoff_hz must lie in (0, sample_rate_hz / 2)")
    k = np.tan(np.pi * cutoff_hz / sample_rate_hz)
    norm = 1.0 / (1.0 + np.sqrt(2.0) * k + k * k)
    b0 = k * k * norm
    section = BiquadSection(b0=b0, b1=2.0 * b0, b2=b0,
                            a1=2.0 * (k * k - 1.0) * norm,
                            a2=(1.0 - np.sqrt(2.0) * k + k * k) * norm)
    return FilterSpec(sections=(section,), sample_rate_hz=sample_rate_hz)


def transient_samples(spec, n_time_constants=3.0):
    """Edge-transient extent: n time constants of the slowest pole."""
    radii = [s.pole_radius() for s in spec.sections]
    r = max(radii) if radii else 0.0
    if r <= 0:
        return 12
    tau = -1.0 / np.log(r)
    return int(max(n_time_constants * tau, 12))


def _pad_length(spec, n):
    return min(transient_samples(spec), n - 1)


def apply_zero_phase(spec, x):
    """Forward-then-reverse filtering per section; output length == input.

    The record is extended by odd reflection (three time constants of the
    slowest pole) so ramps cross the edges without startup transients. The
    effective magnitude response is the square of the cascade's and the net
    phase is zero.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("channel must be 1-D")
    if x.shape[0] <= 6 * max(len(spec.sections), 1):
        raise DataError("record too short for the edge-transient margin")
    pad = _pad_length(spec, x.shape[0])
    # Odd reflection preserves slope continuity at both edges.
    left = 2.0 * x[0] - x[pad:0:-1]
    right = 2.0 * x[-1] - x[-2:-pad - 2:-1]
    y = np.concatenate((left, x, right))
    for section in spec.sections:
        sos = np.array([[section.b0, section.b1, section.b2, 1.0, section.a1, section.a2]])
        # Step-matched initial state: a constant record passes untouched.
        zi = sosfilt_zi(sos)
        y, _ = sosfilt(sos, y, zi=zi * y[0])
        y = y[::-1]
        y, _ = sosfilt(sos, y, zi=zi * y[0])
        y = y[::-1]
    return y[pad:pad + x.shape[0]]


def extract_shape_component(x, cutoff_hz, sample_rate_hz):
    """Zero-phase low-pass isolating the slow shape content of a channel."""
    return apply_zero_phase(design_lowpass(cutoff_hz, sample_rate_hz), x)


def save_filter_spec(path, spec):
    """Write one section per line: b0 b1 b2 a1 a2 (full double precision)."""
    lines = []
    for s in spec.sections:
        lines.append(" ".join(f"{v:.17e}" for v in (s.b0, s.b1, s.b2, s.a1, s.a2)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_filter_spec(path, sample_rate_hz):
    """Read a coefficient file written by save_filter_spec.

    Declared notch metadata is not stored in the file, so the loaded spec
    carries coefficients only; stability is re-validated per section.
    """
    sections = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise DataError(f"line {lineno}: expected 5 coefficients, got {len(parts)}")
            vals = [float(p) for p in parts]
            sections.append(BiquadSection(*vals))
    if not sections:
        raise DataError("coefficient file holds no sections")
    return FilterSpec(sections=tuple(sections), sample_rate_hz=sample_rate_hz)
