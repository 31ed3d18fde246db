"""Wavelength-to-curvature conversion and planar shape reconstruction.

Each active area reports a wavelength shift proportional to the local
curvature. The centerline is modeled as piecewise-constant curvature: one
circular arc per segment, with segment boundaries midway between active
areas. Arc increments are evaluated through a half-angle sinc form that is
exact for all curvatures and stable through the straight pose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError, ParseError

#: Interrogator wavelength band (nm).
BAND_NM = (1510.0, 1590.0)

DEFAULT_SENSITIVITY_NM_PER_INVM = 13.0
DEFAULT_BASE_NM = 1535.3


@dataclass(frozen=True)
class CalibrationModel:
    """Per-area linear map: wavelength = base + sensitivity * curvature."""

    base_wavelengths_nm: tuple
    sensitivities_nm_per_invm: tuple

    def __post_init__(self):
        bases = tuple(float(b) for b in self.base_wavelengths_nm)
        sens = tuple(float(s) for s in self.sensitivities_nm_per_invm)
        if len(bases) != len(sens) or not bases:
            raise ParameterError("one (base, sensitivity) pair per active area")
        if any(s == 0.0 for s in sens):
            raise ParameterError("sensitivity must be nonzero for every active area")
        if any(not (BAND_NM[0] <= b <= BAND_NM[1]) for b in bases):
            raise ParameterError(f"base wavelengths must lie within {BAND_NM} nm")
        object.__setattr__(self, "base_wavelengths_nm", bases)
        object.__setattr__(self, "sensitivities_nm_per_invm", sens)

    @property
    def n_areas(self):
        return len(self.base_wavelengths_nm)


def default_calibration(n_areas=3):
    return CalibrationModel((DEFAULT_BASE_NM,) * n_areas,
                            (DEFAULT_SENSITIVITY_NM_PER_INVM,) * n_areas)


def wavelength_to_curvature(wavelengths_nm, calibration):
    """Curvature (1/m) per active area from measured wavelengths (nm)."""
    wl = np.asarray(wavelengths_nm, dtype=float)
    if wl.shape != (calibration.n_areas,):
        raise DataError(f"expected {calibration.n_areas} wavelengths, got {wl.shape}")
    if np.any(wl < BAND_NM[0]) or np.any(wl > BAND_NM[1]):
        raise DataError(f"wavelength outside the interrogator band {BAND_NM} nm")
    base = np.array(calibration.base_wavelengths_nm)
    sens = np.array(calibration.sensitivities_nm_per_invm)
    return (wl - base) / sens


@dataclass(frozen=True)
class CmGeometry:
    """Flexible-segment geometry of the manipulator (mm)."""

    length_mm: float = 35.0
    aa_positions_mm: tuple = (8.75, 17.5, 26.25)
    od_mm: float = 6.0
    id_mm: float = 4.0
    channel_d_mm: float = 0.5

    def __post_init__(self):
        pos = tuple(float(p) for p in self.aa_positions_mm)
        if self.length_mm <= 0:
            raise ParameterError("length_mm must be positive")
        if not pos or any(p <= 0 for p in pos) or any(
                b <= a for a, b in zip(pos, pos[1:])) or pos[-1] > self.length_mm:
            raise ParameterError(
                "active-area positions must be strictly increasing in (0, length_mm]")
        if not (self.od_mm > self.id_mm > 0):
            raise ParameterError("diameters must satisfy od_mm > id_mm > 0")
        if self.channel_d_mm <= 0:
            raise ParameterError("channel_d_mm must be positive")
        object.__setattr__(self, "aa_positions_mm", pos)

    def segment_lengths_mm(self):
        """Segment boundaries sit midway between adjacent active areas."""
        pos = self.aa_positions_mm
        bounds = [0.0]
        bounds += [0.5 * (a + b) for a, b in zip(pos, pos[1:])]
        bounds.append(self.length_mm)
        return tuple(b - a for a, b in zip(bounds, bounds[1:]))


def _arc_step(x, z, theta, curvature_inv_mm, ds_mm):
    """Advance a planar pose along one constant-curvature arc (exact)."""
    h = curvature_inv_mm * ds_mm
    # sin(h/2) / (h/2), exact limit 1 at h = 0; no cancellation for small h.
    stretch = np.sinc(h / (2.0 * np.pi))
    x_new = x + ds_mm * stretch * np.sin(theta + 0.5 * h)
    z_new = z + ds_mm * stretch * np.cos(theta + 0.5 * h)
    return x_new, z_new, theta + h


@dataclass(frozen=True)
class ShapeEstimate:
    """Planar reconstruction: x is lateral deflection, z is along the axis."""

    curvatures_inv_m: tuple
    centerline_mm: np.ndarray  # columns (s_mm, x_mm, z_mm)
    tip_mm: tuple  # (x_mm, z_mm)


def reconstruct(curvatures_inv_m, geometry=CmGeometry(), polyline_step_mm=0.1):
    """Compose one circular arc per segment into a centerline and tip.

    The straight pose maps to tip (0, length_mm); curvature is exact in the
    arc sense so a uniform curvature pi/(2 L) lands on the quarter-circle
    point (2L/pi, 2L/pi).
    """
    kappa = np.asarray(curvatures_inv_m, dtype=float)
    seg_lengths = geometry.segment_lengths_mm()
    if kappa.shape != (len(seg_lengths),):
        raise DataError(f"expected {len(seg_lengths)} curvature values, got {kappa.shape}")
    kappa_inv_mm = kappa / 1000.0

    # Tip from one exact arc step per segment.
    x = z = theta = 0.0
    for k, ell in zip(kappa_inv_mm, seg_lengths):
        x, z, theta = _arc_step(x, z, theta, k, ell)
    tip = (float(x), float(z))

    rows = [(0.0, 0.0, 0.0)]
    s = x = z = theta = 0.0
    for k, ell in zip(kappa_inv_mm, seg_lengths):
        n_steps = max(1, int(np.ceil(ell / polyline_step_mm)))
        ds = ell / n_steps
        for _ in range(n_steps):
            x, z, theta = _arc_step(x, z, theta, k, ds)
            s += ds
            rows.append((s, x, z))
    centerline = np.array(rows)
    return ShapeEstimate(curvatures_inv_m=tuple(float(k) for k in kappa),
                         centerline_mm=centerline, tip_mm=tip)


def tips_for_curvatures(curvature_rows_inv_m, geometry=CmGeometry()):
    """Tip positions (x_mm, z_mm) for many curvature triples at once."""
    kappa = np.asarray(curvature_rows_inv_m, dtype=float) / 1000.0
    seg_lengths = geometry.segment_lengths_mm()
    if kappa.ndim != 2 or kappa.shape[1] != len(seg_lengths):
        raise DataError(f"expected rows of {len(seg_lengths)} curvature values")
    x = np.zeros(kappa.shape[0])
    z = np.zeros(kappa.shape[0])
    theta = np.zeros(kappa.shape[0])
    for col, ell in enumerate(seg_lengths):
        x, z, theta = _arc_step(x, z, theta, kappa[:, col], ell)
    return np.column_stack((x, z))


def fit_calibration(samples):
    """Least-squares line per active area from (wavelengths, curvature) pairs.

    Requires at least two distinct curvature levels. Returns the fitted
    model and the per-area residual RMS (nm).
    """
    if len(samples) < 2:
        raise DataError("at least two calibration samples are required")
    curvatures = np.array([float(k) for _, k in samples])
    wl = np.array([np.asarray(w, dtype=float) for w, _ in samples])
    if wl.ndim != 2:
        raise DataError("each sample must carry one wavelength per active area")
    if np.unique(curvatures).size < 2:
        raise DataError("calibration needs at least two distinct curvature levels")
    design = np.column_stack((np.ones_like(curvatures), curvatures))
    coef, *_ = np.linalg.lstsq(design, wl, rcond=None)
    residuals = wl - design @ coef
    rms = np.sqrt(np.mean(residuals ** 2, axis=0))
    model = CalibrationModel(base_wavelengths_nm=tuple(coef[0]),
                             sensitivities_nm_per_invm=tuple(coef[1]))
    return model, rms


def shape_csv_text(estimate):
    lines = ["s_mm,x_mm,z_mm"]
    for s, x, z in estimate.centerline_mm:
        lines.append(f"{s:.6f},{x:.9f},{z:.9f}")
    return "\n".join(lines) + "\n"


def calibration_csv_text(model):
    lines = ["aa_index,base_wavelength_nm,sensitivity_nm_per_invm"]
    for i, (b, s) in enumerate(zip(model.base_wavelengths_nm,
                                   model.sensitivities_nm_per_invm)):
        lines.append(f"{i},{b:.9f},{s:.9f}")
    return "\n".join(lines) + "\n"


def load_calibration(path):
    """Read a calibration CSV written by calibration_csv_text."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "aa_index,base_wavelength_nm,sensitivity_nm_per_invm":
        raise ParseError("bad calibration header", line=1)
    bases, sens = {}, {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError("expected aa_index,base,sensitivity", line=lineno)
        try:
            idx = int(parts[0])
            bases[idx] = float(parts[1])
            sens[idx] = float(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    if sorted(bases) != list(range(len(bases))):
        raise ParseError("active-area indices must be 0..n-1")
    order = sorted(bases)
    return CalibrationModel(tuple(bases[i] for i in order),
                            tuple(sens[i] for i in order))
