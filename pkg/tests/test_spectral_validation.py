import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from yoyogait.spectral_validation import (
    DEFAULT_BAND,
    ModelMismatchError,
    NoOscillationError,
    dft_peak,
    phase_offset,
    validate_recording,
)
from yoyogait.yoyo_model import WalkProfile, YoyoParams, simulate_arrays

RATE = 25.0


def grid(seconds=40.0, rate=RATE):
    return np.arange(int(round(seconds * rate))) / rate


def test_single_tone_frequency():
    t = grid()
    peak = dft_peak(np.cos(2 * math.pi * 1.5 * t), RATE, (0.5, 3.0))
    assert peak.frequency == pytest.approx(1.5, abs=0.01)
    assert peak.amplitude == pytest.approx(1.0, rel=1e-6)
    assert peak.phase == pytest.approx(0.0, abs=1e-9)


def test_constant_series_has_no_oscillation():
    with pytest.raises(NoOscillationError, match="no oscillatory content"):
        dft_peak(np.full(1000, 3.0), RATE)


def test_stronger_tone_wins():
    t = grid()
    series = np.sin(2 * math.pi * 1.0 * t) + 0.3 * np.sin(2 * math.pi * 2.0 * t)
    assert dft_peak(series, RATE).frequency == pytest.approx(1.0, abs=0.01)


def test_too_short_for_band():
    with pytest.raises(ValueError, match="at least"):
        dft_peak(np.sin(np.arange(99)), RATE, (0.5, 3.0))
    dft_peak(np.sin(np.arange(100)), RATE, (0.5, 3.0))


def test_lag_phase_convention():
    t = grid()
    peak = dft_peak(np.cos(2 * math.pi * 1.0 * t - 0.7), RATE)
    assert peak.phase == pytest.approx(0.7, abs=1e-9)


@given(st.floats(1.0, 2.9), st.floats(0.0, 2 * math.pi), st.sampled_from([20.0, 32.0, 40.0]))
def test_interpolated_frequency_within_half_bin(freq, phase, seconds):
    t = grid(seconds)
    peak = dft_peak(np.cos(2 * math.pi * freq * t + phase), RATE)
    assert abs(peak.frequency - freq) < 0.5 * RATE / t.size


@pytest.mark.parametrize(
    "vz, expected",
    [
        (lambda w, t: -np.sin(w * t), -90.0),
        (lambda w, t: np.cos(w * t), 0.0),
        (lambda w, t: np.sin(w * t), 90.0),
    ],
)
def test_phase_offset_examples(vz, expected):
    t = grid()
    w = 2 * math.pi * 1.2
    assert phase_offset(np.cos(w * t), vz(w, t), RATE) == pytest.approx(expected, abs=2.0)


def test_phase_offset_rejects_distinct_tones():
    t = grid()
    with pytest.raises(ModelMismatchError):
        phase_offset(np.cos(2 * math.pi * 1.0 * t), np.cos(2 * math.pi * 2.0 * t), RATE)


def _pair(freq, phase, noise, seed):
    rng = np.random.default_rng(seed)
    t = grid()
    vx = np.cos(2 * math.pi * freq * t) + noise * rng.standard_normal(t.size)
    vz = np.cos(2 * math.pi * freq * t + phase) + noise * rng.standard_normal(t.size)
    return vx, vz


@given(st.floats(0.5, 2.5), st.floats(-3.0, 3.0), st.integers(0, 2**16))
def test_phase_offset_antisymmetric(freq, phase, seed):
    vx, vz = _pair(freq, phase, 0.05, seed)
    forward = phase_offset(vx, vz, RATE)
    backward = phase_offset(vz, vx, RATE)
    assert math.remainder(forward + backward, 360.0) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(0.5, 2.5), st.floats(-3.0, 3.0), st.floats(1e-3, 1e3))
def test_scale_invariance(freq, phase, scale):
    vx, vz = _pair(freq, phase, 0.05, 1)
    base = dft_peak(vz, RATE)
    scaled = dft_peak(scale * vz, RATE)
    assert scaled.frequency == pytest.approx(base.frequency, rel=1e-9)
    assert scaled.phase == pytest.approx(base.phase, abs=1e-9)
    assert scaled.amplitude == pytest.approx(scale * base.amplitude, rel=1e-9)
    offset = phase_offset(vx, vz, RATE)
    assert phase_offset(scale * vx, scale * vz, RATE) == pytest.approx(offset, abs=1e-9)


def yoyo_walk(omega=2.5, r=0.2, seconds=40.0, noise=0.0, seed=0):
    params = YoyoParams(2.0, r)
    return simulate_arrays(params, WalkProfile.constant(omega, seconds), 1 / RATE, seconds, noise, seed)


def test_yoyo_walk_offset():
    _, vx, vz = yoyo_walk()
    assert phase_offset(vx - vx.mean(), vz, RATE) == pytest.approx(-90.0, abs=5.0)


@pytest.mark.parametrize("omega", [2.5, 6.0, 10.0])
def test_validate_noiseless_walk(omega):
    t, vx, vz = yoyo_walk(omega)
    report = validate_recording(np.column_stack([t, vx, vz]))
    assert report.passed, report.reason
    assert report.peak_frequency == pytest.approx(omega / (2 * math.pi), abs=0.01)
    assert report.resolution == pytest.approx(RATE / t.size)
    assert 0 < report.peak_frequency < RATE / 2
    assert -180 < report.phase_offset_deg <= 180
    assert isinstance(report.peak_frequency, float)


@pytest.mark.parametrize("seed", range(5))
def test_validate_pure_noise(seed):
    rng = np.random.default_rng(seed)
    t = grid()
    report = validate_recording(np.column_stack([t, rng.standard_normal((t.size, 2))]))
    assert not report.passed
    assert report.reason == "no oscillatory content"


def test_validate_flat_walk():
    t = grid()
    report = validate_recording(np.column_stack([t, np.full_like(t, 5.0), np.zeros_like(t)]))
    assert not report.passed
    assert report.reason == "no oscillatory content"


def test_validate_wrong_phase():
    t = grid()
    w = 2 * math.pi * 0.8
    report = validate_recording(np.column_stack([t, 5 + np.cos(w * t), np.cos(w * t)]))
    assert not report.passed
    assert "phase offset" in report.reason
    assert report.phase_offset_deg == pytest.approx(0.0, abs=2.0)


def test_validate_requires_ten_seconds():
    t = grid(8.0)
    with pytest.raises(ValueError, match="10 s"):
        validate_recording(np.column_stack([t, np.cos(t), np.sin(t)]))


def test_default_band_covers_slow_cadence():
    assert DEFAULT_BAND[0] <= 2.5 / (2 * math.pi) <= DEFAULT_BAND[1]
