"""Offline DFT check of a walking recording against the Yoyo-model.

A recording is consistent with the model when the forward and vertical
velocities share one dominant oscillation and the vertical channel lags
the forward one by a quarter period (-90 degrees).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "NoOscillationError",
    "ModelMismatchError",
    "SpectralPeak",
    "SpectrumReport",
    "DEFAULT_BAND",
    "dft_peak",
    "phase_offset",
    "validate_recording",
]

DEFAULT_BAND = (0.2, 3.0)
EXPECTED_OFFSET_DEG = -90.0
OFFSET_TOL_DEG = 15.0
MIN_DURATION_S = 10.0
NOISE_FACTOR = 3.0
MAGNITUDE_FLOOR = 1e-12


class NoOscillationError(ValueError):
    """No in-band oscillatory content."""


class ModelMismatchError(ValueError):
    """Forward and vertical channels have no common dominant frequency."""


class SpectralPeak(NamedTuple):
    frequency: float
    amplitude: float
    phase: float


@dataclass(frozen=True)
class SpectrumReport:
    peak_frequency: float
    peak_amplitude: float
    phase_offset_deg: float
    resolution: float
    passed: bool
    reason: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _spectrum(series, rate, band):
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    f_lo, f_hi = band
    if not 0 < f_lo < f_hi:
        raise ValueError(f"invalid band {band!r}")
    if x.size < 2 * rate / f_lo:
        raise ValueError(
            f"need at least {math.ceil(2 * rate / f_lo)} samples for a band starting at {f_lo} Hz"
        )
    spec = np.fft.rfft(x - x.mean())
    freqs = np.fft.rfftfreq(x.size, 1.0 / rate)
    in_band = np.flatnonzero((freqs >= f_lo) & (freqs <= min(f_hi, rate / 2)))
    if in_band.size == 0:
        raise ValueError(f"band {band!r} contains no DFT bins")
    # one-sided amplitude of a real sinusoid
    amps = 2.0 * np.abs(spec) / x.size
    return spec, freqs, amps, in_band


def _interpolate(amps, idx, resolution):
    """Sub-bin offset from a parabola through the three log-magnitudes around ``idx``."""
    if idx <= 0 or idx >= amps.size - 1:
        return 0.0
    left, mid, right = np.log(amps[idx - 1 : idx + 2] + 1e-300)
    denom = left - 2.0 * mid + right
    if denom >= 0:
        return 0.0
    delta = 0.5 * (left - right) / denom
    return float(np.clip(delta, -0.5, 0.5)) * resolution


def dft_peak(series, rate: float, band: tuple[float, float] = DEFAULT_BAND) -> SpectralPeak:
    """Dominant in-band frequency (Hz), its amplitude and phase (radians).

    Phase follows the lag convention ``series ~ amplitude*cos(2*pi*f*t - phase)``.
    The series mean is removed first.  The frequency is refined between DFT
    bins by quadratic interpolation of the log-magnitudes; amplitude and
    phase are read from the peak bin itself.
    """
    spec, freqs, amps, in_band = _spectrum(series, rate, band)
    if np.all(amps[in_band] < MAGNITUDE_FLOOR):
        raise NoOscillationError("no oscillatory content in band")
    idx = int(in_band[np.argmax(amps[in_band])])
    resolution = rate / len(series)
    freq = freqs[idx] + _interpolate(amps, idx, resolution)
    return SpectralPeak(float(freq), float(amps[idx]), _lag(spec[idx]))


def _lag(coefficient) -> float:
    return float(-np.angle(coefficient))


def _wrap_deg(angle: float) -> float:
    wrapped = math.fmod(angle, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


def _common_bin(vx, vz, rate, band):
    spec_x, freqs, amps_x, in_band = _spectrum(vx, rate, band)
    spec_z, _, amps_z, _ = _spectrum(vz, rate, band)
    peak_x = amps_x[in_band].max()
    peak_z = amps_z[in_band].max()
    if peak_x < MAGNITUDE_FLOOR or peak_z < MAGNITUDE_FLOOR:
        raise NoOscillationError("no oscillatory content in band")
    idx_x = int(in_band[np.argmax(amps_x[in_band])])
    idx_z = int(in_band[np.argmax(amps_z[in_band])])
    resolution = rate / len(vx)
    fx = freqs[idx_x] + _interpolate(amps_x, idx_x, resolution)
    fz = freqs[idx_z] + _interpolate(amps_z, idx_z, resolution)
    if abs(fx - fz) > 0.1 * max(fx, fz):
        raise ModelMismatchError(
            f"no common peak: forward at {fx:.4g} Hz, vertical at {fz:.4g} Hz"
        )
    # symmetric in the two channels and invariant to their scale
    score = amps_x[in_band] / peak_x + amps_z[in_band] / peak_z
    idx = int(in_band[np.argmax(score)])
    return spec_x, spec_z, amps_x, amps_z, freqs, in_band, idx, fx, fz


def phase_offset(vx_series, vz_series, rate: float, band: tuple[float, float] = DEFAULT_BAND) -> float:
    """Phase of ``vz`` minus phase of ``vx`` at their common peak, in degrees.

    Phases use the lag convention of :func:`dft_peak`, so a vertical channel
    leading the forward one by a quarter period gives -90.  Wrapped to
    (-180, 180].  Raises :class:`ModelMismatchError` if the two dominant
    frequencies differ by more than 10 %.
    """
    if len(vx_series) != len(vz_series):
        raise ValueError("series differ in length")
    spec_x, spec_z, *_, idx, _, _ = _common_bin(vx_series, vz_series, rate, band)
    diff = math.degrees(_lag(spec_z[idx]) - _lag(spec_x[idx]))
    return _wrap_deg(diff)


def _noise_ceiling(amps_in_band: np.ndarray) -> float:
    """Expected largest in-band amplitude of pure noise.

    Noise bin magnitudes are Rayleigh distributed, so the median scales to
    the expected maximum over ``m`` bins by ``sqrt(ln m / ln 2)``.
    """
    m = max(amps_in_band.size, 2)
    return float(np.median(amps_in_band)) * math.sqrt(math.log(m) / math.log(2.0))


def validate_recording(
    samples: Sequence, rate: float | None = None, band: tuple[float, float] = DEFAULT_BAND
) -> SpectrumReport:
    """Check a velocity recording for the model's shared -90 degree oscillation.

    ``samples`` is a sequence of ``(t, vx, vz)`` rows sampled uniformly.
    Failures of the model checks are reported in the returned report rather
    than raised; malformed input still raises ``ValueError``.
    """
    arr = np.asarray(samples, dtype=float).reshape(-1, 3)
    t, vx, vz = arr[:, 0], arr[:, 1], arr[:, 2]
    if t.size < 2:
        raise ValueError("need at least two samples")
    if rate is None:
        rate = 1.0 / float(np.median(np.diff(t)))
    duration = t.size / rate
    if duration < MIN_DURATION_S - 1e-9:
        raise ValueError(f"need at least {MIN_DURATION_S:g} s of data, got {duration:.3g} s")
    resolution = rate / t.size

    def failed(reason, freq=math.nan, amp=math.nan, offset=math.nan):
        return SpectrumReport(freq, amp, offset, resolution, False, reason)

    for channel in (vx, vz):
        _, _, amps, in_band = _spectrum(channel, rate, band)
        if amps[in_band].max() < NOISE_FACTOR * _noise_ceiling(amps[in_band]):
            return failed("no oscillatory content")
    try:
        spec_x, spec_z, _, amps_z, _, _, idx, fx, fz = _common_bin(vx, vz, rate, band)
    except NoOscillationError:
        return failed("no oscillatory content")
    except ModelMismatchError as exc:
        return failed(f"model mismatch: {exc}")

    offset = _wrap_deg(math.degrees(_lag(spec_z[idx]) - _lag(spec_x[idx])))
    freq = float(0.5 * (fx + fz))
    amp = float(amps_z[idx])
    if abs(_wrap_deg(offset - EXPECTED_OFFSET_DEG)) > OFFSET_TOL_DEG:
        return failed(f"phase offset {offset:.1f} deg outside -90 +/- 15 deg", freq, amp, offset)
    return SpectrumReport(freq, amp, offset, resolution, True)
