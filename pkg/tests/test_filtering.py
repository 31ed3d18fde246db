import numpy as np
import pytest

from fbgvib import (BiquadSection, DataError, FilterSpec, ParameterError,
                    apply_zero_phase, design_bandstop, design_lowpass,
                    extract_shape_component, load_filter_spec,
                    save_filter_spec)

from oracles import sine_amplitude

FS = 1000.0


def identity_spec():
    return FilterSpec(sections=(BiquadSection(1.0, 0.0, 0.0, 0.0, 0.0),),
                      sample_rate_hz=FS)


# --- design ----------------------------------------------------------------

def test_three_harmonic_design():
    spec = design_bandstop(2.0, 3, 0.5, FS)
    assert [c for c, _ in spec.notches] == [2.0, 4.0, 6.0]
    for center, _ in spec.notches:
        gain = abs(spec.response(center))
        assert 20 * np.log10(max(gain, 1e-300)) <= -40.0


def test_dc_gain_is_unity():
    spec = design_bandstop(4.0, 1, 0.5, FS)
    assert abs(spec.response(0.0)) == pytest.approx(1.0, abs=1e-3)


def test_notch_at_nyquist_rejected():
    with pytest.raises(ParameterError):
        design_bandstop(300.0, 2, 1.0, FS)


def test_sections_are_stable():
    spec = design_bandstop(2.0, 3, sample_rate_hz=FS)
    for s in spec.sections:
        assert s.pole_radius() < 1.0


def test_unstable_section_rejected_at_construction():
    with pytest.raises(ParameterError):
        BiquadSection(1.0, 0.0, 0.0, -2.2, 1.21)  # poles outside unit circle


def test_lowpass_minus_3db_at_cutoff():
    spec = design_lowpass(10.0, FS)
    assert abs(spec.response(10.0)) == pytest.approx(1 / np.sqrt(2), rel=1e-6)


def test_lowpass_bad_cutoff_rejected():
    with pytest.raises(ParameterError):
        design_lowpass(600.0, FS)


# --- zero-phase application -------------------------------------------------

def test_identity_spec_passes_input_exactly():
    x = np.random.default_rng(0).normal(size=400)
    assert np.array_equal(apply_zero_phase(identity_spec(), x), x)


def test_record_too_short_rejected():
    spec = design_bandstop(2.0, 3, sample_rate_hz=FS)
    with pytest.raises(DataError):
        apply_zero_phase(spec, np.zeros(10))


def test_notch_kills_its_sinusoid():
    spec = design_bandstop(2.0, 1, 0.5, FS)
    t = np.arange(20000) / FS
    y = apply_zero_phase(spec, np.sin(2 * np.pi * 2.0 * t))
    steady = y[5000:15000]
    assert 0.5 * (steady.max() - steady.min()) <= 0.01


def test_zero_phase_no_lag_in_passband():
    spec = design_bandstop(2.0, 3, sample_rate_hz=FS)
    t = np.arange(30000) / FS
    x = np.sin(2 * np.pi * 0.5 * t)
    y = apply_zero_phase(spec, x)
    xc, yc = x[5000:25000], y[5000:25000]
    lags = np.arange(-20, 21)
    corr = [np.dot(yc, np.roll(xc, k)) for k in lags]
    assert lags[int(np.argmax(corr))] == 0


def test_passband_amplitude_error_below_1pct():
    # Sinusoid at fundamental/4 through the default cascade, zero-phase.
    spec = design_bandstop(2.0, 3, sample_rate_hz=FS)
    t = np.arange(40000) / FS
    x = np.sin(2 * np.pi * 0.5 * t)
    y = apply_zero_phase(spec, x)
    amp = sine_amplitude(y[5000:35000], FS, 0.5)
    assert amp == pytest.approx(1.0, rel=0.01)


def test_linearity_of_filtering():
    spec = design_bandstop(2.0, 2, sample_rate_hz=FS)
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 5000))
    a, b = 1.7, -0.6
    lhs = apply_zero_phase(spec, a * x + b * y)
    rhs = a * apply_zero_phase(spec, x) + b * apply_zero_phase(spec, y)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)


def test_composition_with_spectrum_matches_squared_response():
    # Probe tones near a notch shoulder: measured ratio == |H|^2 within 10%.
    spec = design_bandstop(2.0, 1, 0.5, FS)
    t = np.arange(60000) / FS
    for f_probe in (1.75, 2.25, 3.0):
        x = np.sin(2 * np.pi * f_probe * t)
        y = apply_zero_phase(spec, x)
        measured = sine_amplitude(y[10000:50000], FS, f_probe)
        predicted = abs(spec.response(f_probe)) ** 2
        assert measured == pytest.approx(predicted, rel=0.10)


# --- shape extraction -------------------------------------------------------

def test_dc_passthrough():
    x = np.full(5000, 2.5)
    y = extract_shape_component(x, 0.2, FS)
    assert np.allclose(y, 2.5, atol=1e-9)


def test_two_tone_separation():
    t = np.arange(120000) / FS
    slow = np.sin(2 * np.pi * 0.01 * t)
    x = slow + np.sin(2 * np.pi * 2.0 * t)
    y = extract_shape_component(x, 0.2, FS)
    # Residual fast content after extraction.
    assert sine_amplitude(y[20000:100000], FS, 2.0) <= 0.02
    # The slow line passes nearly unchanged (within 0.1 dB).
    slow_amp = sine_amplitude(y[20000:100000], FS, 0.01)
    assert slow_amp == pytest.approx(1.0, rel=0.012)


def test_step_is_smeared_over_cutoff_timescale():
    def rise_samples(cutoff):
        x = np.zeros(30000)
        x[15000:] = 1.0
        y = extract_shape_component(x, cutoff, FS)
        return np.flatnonzero(y > 0.9)[0] - np.flatnonzero(y > 0.1)[0]

    # A sharp edge (one sample) comes out spread over ~1/cutoff seconds,
    # which is what hides collision transients from a naive low-pass.
    rise = rise_samples(0.5)
    assert rise >= 0.35 / 0.5 * FS
    assert rise_samples(5.0) <= rise / 8  # smear scales with 1/cutoff


# --- serialization -----------------------------------------------------------

def test_coefficient_file_round_trip(tmp_path):
    spec = design_bandstop(2.0, 3, sample_rate_hz=FS)
    path = tmp_path / "cascade.txt"
    save_filter_spec(path, spec)
    loaded = load_filter_spec(path, FS)
    assert len(loaded.sections) == 3
    for a, b in zip(spec.sections, loaded.sections):
        assert (a.b0, a.b1, a.b2, a.a1, a.a2) == (b.b0, b.b1, b.b2, b.a1, b.a2)
    freqs = np.array([0.5, 2.0, 7.0])
    assert np.allclose(abs(loaded.response(freqs)), abs(spec.response(freqs)))


def test_malformed_coefficient_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1.0 0.0 0.0\n")
    with pytest.raises(DataError):
        load_filter_spec(path, FS)
