"""Synthetic wavelength traces from a harmonically excited two-mass model.

A rotating tool with residual unbalance forces the manipulator tip (mass 1)
with amplitude proportional to the square of the rotation rate. The sensor
assembly (mass 2) sits loosely in its wall channel, coupled through a soft
spring, so the pair behaves as a two degree-of-freedom system with one low
and one high natural frequency. Generated traces superpose the quasi-static
shape response of a cable bend, the gain-scaled steady-state vibration at
the tool rate and its weak integer multiples, and interrogator noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, ParameterError, UndampedResonanceError

#: Tool rotation range covered by the bench hardware (rev/min).
RPM_MAX = 2400.0

#: Wavelength oscillation amplitude (nm) anchored between the two
#: resonances at the 240 rev/min operating point.
DEFAULT_PLATEAU_NM = 0.045

DEFAULT_UNBALANCE_ME = 1.0e-6  # kg*m


@dataclass(frozen=True)
class TwoDofParams:
    """Lumped parameters of the manipulator-plus-sensor vibration model.

    The stiffness chain is ground --k1-- m1 --k2-- m2; each damper acts
    between its own coordinate and ground, which keeps the high-frequency
    transmission into the sensor governed by the soft coupling spring alone.
    Gains convert coordinate displacement (m) into wavelength shift (nm).
    """

    m1: float
    m2: float
    k1: float
    k2: float
    c1: float = 0.0
    c2: float = 0.0
    unbalance_me: float = DEFAULT_UNBALANCE_ME
    gain1: float = 0.0
    gain2: float = 1.0

    def __post_init__(self):
        if min(self.m1, self.m2, self.k1, self.k2) <= 0:
            raise ParameterError("masses and stiffnesses must be strictly positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ParameterError("dampers must be non-negative")
        f1, f2 = self.natural_frequencies_hz()
        if not np.isfinite(f1) or not np.isfinite(f2) or (f2 - f1) <= 1e-9 * f2:
            raise ParameterError("undamped natural frequencies must be real and distinct")

    def mass_matrix(self):
        return np.diag([self.m1, self.m2])

    def stiffness_matrix(self):
        return np.array([[self.k1 + self.k2, -self.k2], [-self.k2, self.k2]])

    def damping_matrix(self):
        return np.diag([self.c1, self.c2])

    def natural_frequencies_hz(self):
        """Undamped natural frequencies, ascending (Hz)."""
        m1, m2 = self.m1, self.m2
        # Characteristic polynomial of det(K - lambda M) in lambda.
        a = m1 * m2
        b = -(m1 * self.k2 + m2 * (self.k1 + self.k2))
        c = self.k1 * self.k2
        disc = b * b - 4.0 * a * c
        if disc < 0:
            return np.nan, np.nan
        root = np.sqrt(disc)
        lam = np.array([(-b - root) / (2 * a), (-b + root) / (2 * a)])
        return tuple(np.sqrt(lam) / (2.0 * np.pi))


def calibrate_default_params(f1_hz, f2_hz, mass_ratio, damping_ratio,
                             unbalance_me=DEFAULT_UNBALANCE_ME,
                             gain1=0.0, gain2=1.0):
    """Solve stiffnesses so the undamped modes land on the given targets.

    With m1 = 1 kg and m2 = mass_ratio, the two stiffnesses follow from the
    sum and product of the characteristic-polynomial roots; the soft
    coupling branch (smaller k2) is selected so the low mode is dominated
    by the sensor coordinate. Dampers are sized for roughly the requested
    ratio on each mode.

    Raises ParameterError when the targets admit no positive-stiffness
    solution or are not strictly ordered.
    """
    if not (0.0 < f1_hz < f2_hz):
        raise ParameterError("targets must satisfy 0 < f1_hz < f2_hz")
    if not (0.0 < mass_ratio < 1.0):
        raise ParameterError("mass_ratio must lie in (0, 1)")
    if not (0.0 <= damping_ratio < 1.0):
        raise ParameterError("damping_ratio must lie in [0, 1)")
    m1 = 1.0
    m2 = mass_ratio
    lam1 = (2.0 * np.pi * f1_hz) ** 2
    lam2 = (2.0 * np.pi * f2_hz) ** 2
    # (m1+m2) k2^2 - (lam1+lam2) m1 m2 k2 + m1 m2^2 lam1 lam2 = 0
    a = m1 + m2
    b = -(lam1 + lam2) * m1 * m2
    c = m1 * m2 * m2 * lam1 * lam2
    disc = b * b - 4.0 * a * c
    if disc <= 0:
        raise ParameterError("no positive-stiffness solution for these targets")
    k2 = (-b - np.sqrt(disc)) / (2.0 * a)
    if k2 <= 0:
        raise ParameterError("no positive-stiffness solution for these targets")
    k1 = lam1 * lam2 * m1 * m2 / k2
    c1 = 2.0 * damping_ratio * m1 * np.sqrt(lam2)
    c2 = 2.0 * damping_ratio * m2 * np.sqrt(lam1)
    return TwoDofParams(m1=m1, m2=m2, k1=k1, k2=k2, c1=c1, c2=c2,
                        unbalance_me=unbalance_me, gain1=gain1, gain2=gain2)


def frf_response(params, forcing_hz):
    """Complex steady-state displacement of both coordinates (m).

    Solves (K - w^2 M + j w C) X = F for unbalance forcing
    F = unbalance_me * w^2 applied to mass 1.
    """
    w = 2.0 * np.pi * float(forcing_hz)
    if forcing_hz < 0:
        raise ParameterError("forcing_hz must be non-negative")
    if w == 0.0:
        return 0.0 + 0.0j, 0.0 + 0.0j
    a11 = params.k1 + params.k2 - w * w * params.m1 + 1j * w * params.c1
    a12 = -params.k2
    a22 = params.k2 - w * w * params.m2 + 1j * w * params.c2
    det = a11 * a22 - a12 * a12
    f1 = params.unbalance_me * w * w
    scale = max(abs(a11), abs(a22), abs(a12)) ** 2
    if abs(det) <= 1e-12 * scale:
        raise UndampedResonanceError(
            f"system matrix is singular at {forcing_hz} Hz (undamped resonance)")
    x1 = a22 * f1 / det
    x2 = -a12 * f1 / det
    return x1, x2


def frf_amplitude(params, forcing_hz):
    """Steady-state displacement amplitude (|x1|, |x2|) in metres."""
    x1, x2 = frf_response(params, forcing_hz)
    return abs(x1), abs(x2)


def output_response(params, forcing_hz):
    """Complex wavelength-shift phasor gain1 * x1 + gain2 * x2 (nm)."""
    x1, x2 = frf_response(params, forcing_hz)
    return params.gain1 * x1 + params.gain2 * x2


def output_amplitude(params, forcing_hz):
    """Wavelength oscillation amplitude (nm) seen on a trace channel."""
    return abs(output_response(params, forcing_hz))


def default_params():
    """Calibrated model: modes at 0.4 and 16 Hz, plateau pinned at 240 rpm."""
    p = calibrate_default_params(0.4, 16.0, mass_ratio=0.1, damping_ratio=0.05)
    anchor_hz = 4.0
    _, x2 = frf_response(p, anchor_hz)
    return replace(p, gain2=DEFAULT_PLATEAU_NM / abs(x2))


BEND_PHASES = ("hold", "pull", "release")


@dataclass(frozen=True)
class BendProfile:
    """Piecewise-constant-rate cable actuation (pull / hold / release).

    slack_amplitude_scale multiplies the vibration amplitude while cable
    displacement sits below slack_threshold_mm: near the straight pose the
    loose cables stop constraining the oscillation.
    """

    segments: tuple = (("pull", 75.0), ("release", 75.0))
    cable_speed_mm_s: float = 0.1
    curvature_gain: float = 1.0 / 75.0  # (1/m) of curvature per mm of cable
    slack_amplitude_scale: float = 4.0
    slack_threshold_mm: float = 0.5

    def __post_init__(self):
        if self.cable_speed_mm_s <= 0:
            raise ParameterError("cable_speed_mm_s must be positive")
        if self.curvature_gain < 0:
            raise ParameterError("curvature_gain must be non-negative")
        if self.slack_amplitude_scale <= 1.0:
            raise ParameterError("slack_amplitude_scale must exceed 1")
        if self.slack_threshold_mm <= 0:
            raise ParameterError("slack_threshold_mm must be positive")
        disp = 0.0
        for kind, duration in self.segments:
            if kind not in BEND_PHASES:
                raise ParameterError(f"unknown bend phase {kind!r}")
            if duration <= 0:
                raise ParameterError("phase durations must be positive")
            if kind == "pull":
                disp += self.cable_speed_mm_s * duration
            elif kind == "release":
                disp -= self.cable_speed_mm_s * duration
                if disp < -1e-12:
                    raise ParameterError("release would drive cable displacement negative")
        object.__setattr__(self, "segments", tuple((k, float(d)) for k, d in self.segments))

    @property
    def total_duration_s(self):
        return sum(d for _, d in self.segments)

    def _knots(self):
        times = [0.0]
        disps = [0.0]
        for kind, duration in self.segments:
            step = {"pull": 1.0, "release": -1.0, "hold": 0.0}[kind]
            times.append(times[-1] + duration)
            disps.append(max(0.0, disps[-1] + step * self.cable_speed_mm_s * duration))
        return np.array(times), np.array(disps)


def bend_curvature(profile, t):
    """Curvature (1/m) and cable displacement (mm) at time(s) t.

    Displacement is piecewise linear in time; curvature is proportional to
    it. Raises DataError for t outside the profile duration.
    """
    t_arr = np.asarray(t, dtype=float)
    total = profile.total_duration_s
    if np.any(t_arr < 0) or np.any(t_arr > total + 1e-12):
        raise DataError(f"t outside the profile duration [0, {total}] s")
    times, disps = profile._knots()
    displacement = np.interp(t_arr, times, disps)
    curvature = profile.curvature_gain * displacement
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(curvature), float(displacement)
    return curvature, displacement


@dataclass(frozen=True)
class Scenario:
    """One simulated experiment: tool rate, duration, bend, and noise."""

    rpm: float
    duration_s: float
    sample_rate_hz: float = 1000.0
    bend: BendProfile | None = None
    noise_sigma_nm: float = 0.002
    base_wavelength_nm: tuple = (1535.3, 1535.3, 1535.3)
    harmonic_weights: tuple = (1.0, 0.15, 0.05)

    def __post_init__(self):
        if not (0.0 <= self.rpm <= RPM_MAX):
            raise ParameterError(f"rpm must lie in [0, {RPM_MAX}]")
        if self.duration_s <= 0:
            raise ParameterError("duration_s must be positive")
        if self.sample_rate_hz <= 0:
            raise ParameterError("sample_rate_hz must be positive")
        if self.noise_sigma_nm < 0:
            raise ParameterError("noise_sigma_nm must be non-negative")
        base = self.base_wavelength_nm
        if np.isscalar(base):
            base = (float(base),) * 3
        object.__setattr__(self, "base_wavelength_nm", tuple(float(b) for b in base))
        if not self.harmonic_weights or self.harmonic_weights[0] <= 0:
            raise ParameterError("harmonic_weights must start with a positive fundamental weight")
        top = self.rpm / 60.0 * len(self.harmonic_weights)
        if self.sample_rate_hz <= 2.0 * top:
            raise ParameterError(
                f"sample_rate_hz={self.sample_rate_hz} violates the Nyquist margin for "
                f"{len(self.harmonic_weights)} modeled multiples of {self.rpm} rpm")


#: Operating points recommended for the two debriding tool families.
SCENARIO_PRESETS = {
    "soft-70rpm": {"rpm": 70.0},
    "hard-2250rpm": {"rpm": 2250.0},
}


def preset_scenario(name, duration_s=10.0, **overrides):
    if name not in SCENARIO_PRESETS:
        raise ParameterError(
            f"unknown preset {name!r}; expected one of {sorted(SCENARIO_PRESETS)}")
    kwargs = dict(SCENARIO_PRESETS[name])
    kwargs.update(overrides)
    return Scenario(duration_s=duration_s, **kwargs)


@dataclass(frozen=True)
class WavelengthTrace:
    """Uniformly sampled Bragg wavelengths, one column per active area."""

    sample_rate_hz: float
    channels: np.ndarray  # (n_samples, n_channels), nm
    t0: float = 0.0
    labels: tuple = ((0, 0), (0, 1), (0, 2))  # (fiber, active area)

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] < 1:
            raise DataError("channels must be a 2-D array with at least one sample")
        if len(self.labels) != ch.shape[1]:
            raise DataError("one (fiber, aa) label per channel is required")
        if self.sample_rate_hz <= 0:
            raise ParameterError("sample_rate_hz must be positive")
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "labels", tuple((int(f), int(a)) for f, a in self.labels))

    @property
    def n_samples(self):
        return self.channels.shape[0]

    def times(self):
        return self.t0 + np.arange(self.n_samples) / self.sample_rate_hz

    def channel(self, index):
        return self.channels[:, index]


def simulate(scenario, params, seed=0, sensitivities_nm_per_invm=None):
    """Generate a wavelength trace for one scenario.

    Each channel is base wavelength + bend-induced shift (curvature times
    the per-area sensitivity, defaulting to the shape module's calibration
    gain) + steady-state vibration at the tool rate and its modeled
    multiples (scaled up while the cables are slack) + white noise.
    Deterministic for a fixed (scenario, params, seed).
    """
    from .shape import DEFAULT_SENSITIVITY_NM_PER_INVM

    fs = scenario.sample_rate_hz
    n = int(round(scenario.duration_s * fs))
    if n < 1:
        raise ParameterError("duration_s too short for one sample")
    n_areas = len(scenario.base_wavelength_nm)
    if sensitivities_nm_per_invm is None:
        sensitivities_nm_per_invm = (DEFAULT_SENSITIVITY_NM_PER_INVM,) * n_areas
    if len(sensitivities_nm_per_invm) != n_areas:
        raise ParameterError("one sensitivity per active area is required")
    t = np.arange(n) / fs

    if scenario.bend is not None:
        if scenario.duration_s > scenario.bend.total_duration_s + 1e-9:
            raise ParameterError("scenario duration exceeds the bend profile duration")
        curvature, displacement = bend_curvature(scenario.bend, t)
        slack = np.where(displacement < scenario.bend.slack_threshold_mm,
                         scenario.bend.slack_amplitude_scale, 1.0)
    else:
        curvature = np.zeros(n)
        slack = np.ones(n)

    vibration = np.zeros(n)
    if scenario.rpm > 0:
        f0 = scenario.rpm / 60.0
        for m, weight in enumerate(scenario.harmonic_weights, start=1):
            if weight == 0.0:
                continue
            phasor = output_response(params, m * f0)
            vibration += weight * abs(phasor) * np.sin(
                2.0 * np.pi * m * f0 * t + np.angle(phasor))
    vibration *= slack

    rng = np.random.default_rng(seed)
    channels = np.empty((n, n_areas))
    for i in range(n_areas):
        shape_nm = sensitivities_nm_per_invm[i] * curvature
        channels[:, i] = scenario.base_wavelength_nm[i] + shape_nm + vibration
    if scenario.noise_sigma_nm > 0:
        channels += rng.normal(0.0, scenario.noise_sigma_nm, size=channels.shape)
    labels = tuple((0, i) for i in range(n_areas))
    return WavelengthTrace(sample_rate_hz=fs, channels=channels, t0=0.0, labels=labels)
