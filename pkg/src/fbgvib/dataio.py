"""Interrogator-style CSV ingestion/emission and run configuration.

Trace files carry one row per (sample, active area) with the header
``time_s,fiber,aa,wavelength_nm``. Column names embed units to keep nm and
pm from being confused. All writers go through an atomic temp-file rename
so an error never leaves a partial output behind.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .errors import ParameterError, ParseError
from .shape import BAND_NM
from .vib_model import WavelengthTrace

TRACE_HEADER = "time_s,fiber,aa,wavelength_nm"

#: Assumed rate for single-instant files, where no spacing is observable.
FALLBACK_SAMPLE_RATE_HZ = 1000.0

RATE_TOLERANCE = 1e-6  # relative spread allowed between sample intervals


def atomic_write_text(path, text):
    """Write text to path via a temp file and atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_csv_text(traces):
    """CSV text for one trace or several (e.g. one per fiber).

    Multiple traces are interleaved by sample instant and must share the
    same time axis.
    """
    if isinstance(traces, WavelengthTrace):
        traces = [traces]
    first = traces[0]
    times = first.times()
    for other in traces[1:]:
        if other.n_samples != first.n_samples or not np.allclose(
                other.times(), times, rtol=0, atol=1e-9):
            raise ParameterError("traces written together must share sample instants")
    lines = [TRACE_HEADER]
    for n in range(first.n_samples):
        for trace in traces:
            for col, (fiber, aa) in enumerate(trace.labels):
                lines.append(f"{times[n]:.6f},{fiber},{aa},"
                             f"{trace.channels[n, col]:.9f}")
    return "\n".join(lines) + "\n"


def write_trace_csv(path, traces):
    atomic_write_text(path, trace_csv_text(traces))


def parse_trace_csv(path):
    """Parse a trace CSV into one WavelengthTrace per fiber.

    Rows sharing a timestamp are grouped into one sample instant. The
    sample rate is derived from the median spacing and every interval must
    agree with it within one part per million. Schema violations raise
    ParseError naming the offending line.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    if lines[0].strip() != TRACE_HEADER:
        raise ParseError(f"expected header {TRACE_HEADER!r}", line=1)

    series = {}  # (fiber, aa) -> (times, wavelengths)
    last_time = None
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 4:
            raise ParseError("expected 4 comma-separated fields", line=lineno)
        try:
            t = float(parts[0])
            fiber = int(parts[1])
            aa = int(parts[2])
            wl = float(parts[3])
        except ValueError:
            raise ParseError(f"malformed row {raw!r}", line=lineno) from None
        if fiber not in (0, 1):
            raise ParseError(f"fiber must be 0 or 1, got {fiber}", line=lineno)
        if aa not in (0, 1, 2):
            raise ParseError(f"aa must be 0, 1, or 2, got {aa}", line=lineno)
        if not (BAND_NM[0] <= wl <= BAND_NM[1]):
            raise ParseError(
                f"wavelength {wl} nm outside the band {BAND_NM}", line=lineno)
        if last_time is not None and t < last_time:
            raise ParseError("time must be non-decreasing", line=lineno)
        last_time = t
        series.setdefault((fiber, aa), ([], []))
        series[(fiber, aa)][0].append(t)
        series[(fiber, aa)][1].append(wl)
    if not series:
        raise ParseError("file holds no samples", line=2)

    traces = []
    for fiber in sorted({f for f, _ in series}):
        aas = sorted(a for f, a in series if f == fiber)
        times0 = np.array(series[(fiber, aas[0])][0])
        n = times0.shape[0]
        for aa in aas:
            t_aa, _ = series[(fiber, aa)]
            if len(t_aa) != n or not np.array_equal(np.array(t_aa), times0):
                raise ParseError(
                    f"fiber {fiber} area {aa} does not share the sample instants "
                    "of the other areas")
        if n > 1:
            deltas = np.diff(times0)
            dt = float(np.median(deltas))
            if dt <= 0:
                raise ParseError(f"fiber {fiber} repeats sample instants")
            if np.any(np.abs(deltas - dt) > RATE_TOLERANCE * dt):
                raise ParseError(
                    f"fiber {fiber} sample spacing varies by more than 1 ppm")
            rate = 1.0 / dt
        else:
            rate = FALLBACK_SAMPLE_RATE_HZ
        channels = np.column_stack([series[(fiber, aa)][1] for aa in aas])
        traces.append(WavelengthTrace(sample_rate_hz=rate, channels=channels,
                                      t0=float(times0[0]),
                                      labels=tuple((fiber, aa) for aa in aas)))
    return traces


# Run configuration: plain-text key = value, units embedded in key names.
CONFIG_KEYS = {
    "tool_velocity_rpm": float,
    "duration_s": float,
    "sample_rate_hz": float,
    "noise_sigma_nm": float,
    "base_wavelength_nm": float,
    "cable_speed_mm_s": float,
    "slack_amplitude_scale": float,
    "slack_threshold_mm": float,
    "natural_f1_hz": float,
    "natural_f2_hz": float,
    "mass_ratio": float,
    "damping_ratio": float,
    "threshold_nm": float,
    "drift_nm": float,
    "window_s": float,
    "notch_harmonics": int,
    "bandwidth_hz": float,
    "shape_cutoff_hz": float,
    "max_freq_hz": float,
    "min_prominence_nm": float,
    "seed": int,
    "calibration_file": str,
    "output_dir": str,
}


def parse_config(path):
    """Read a key = value configuration file; unknown keys are rejected."""
    config = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key = value", line=lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ParameterError(f"unknown config key {key!r} (line {lineno})")
            try:
                config[key] = CONFIG_KEYS[key](value)
            except ValueError:
                raise ParseError(f"bad value for {key}: {value!r}", line=lineno) from None
    return config
