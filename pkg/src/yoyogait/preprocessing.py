"""Tracked positions to estimator-ready velocities.

Positions are differentiated with a Savitzky-Golay filter at their native
rate, the horizontal speed is taken as the norm of the two horizontal
components, and both channels are linearly resampled onto the filter rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.signal import savgol_filter

from .yoyo_model import VelocitySample

__all__ = [
    "PositionSample",
    "PreprocessConfig",
    "PreprocessError",
    "savgol_derivative",
    "resample",
    "forward_speed",
    "preprocess",
    "preprocess_arrays",
    "check_uniform",
]

UNIFORMITY_TOL = 0.01


class PreprocessError(ValueError):
    pass


class PositionSample(NamedTuple):
    t: float
    px: float
    py: float
    pz: float


@dataclass(frozen=True)
class PreprocessConfig:
    sg_window: int = 11
    sg_order: int = 3
    target_rate: float = 25.0

    def __post_init__(self):
        if int(self.sg_window) != self.sg_window or self.sg_window < 5 or self.sg_window % 2 == 0:
            raise ValueError(f"sg_window must be an odd integer >= 5, got {self.sg_window!r}")
        if int(self.sg_order) != self.sg_order or not 2 <= self.sg_order < self.sg_window:
            raise ValueError(
                f"sg_order must be an integer with 2 <= sg_order < sg_window, got {self.sg_order!r}"
            )
        if not (math.isfinite(self.target_rate) and self.target_rate > 0):
            raise ValueError("target_rate must be finite and > 0")
        object.__setattr__(self, "sg_window", int(self.sg_window))
        object.__setattr__(self, "sg_order", int(self.sg_order))


def check_uniform(t, dt: float | None = None, tol: float = UNIFORMITY_TOL) -> float:
    """Return the sampling interval of ``t``, rejecting gaps off by more than ``tol*dt``."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise PreprocessError("need at least two timestamps")
    gaps = np.diff(t)
    if np.any(gaps <= 0):
        raise PreprocessError("timestamps must be strictly increasing")
    if dt is None:
        dt = float(np.median(gaps))
    worst = float(np.max(np.abs(gaps - dt)))
    if worst > tol * dt:
        raise PreprocessError(
            f"non-uniform sampling: gap deviates by {worst:.3g} s from dt={dt:.6g} s"
        )
    return dt


def savgol_derivative(series, dt: float, config: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """First derivative of a uniformly sampled series by local polynomial fits.

    Each sample takes the slope of the degree-``sg_order`` least-squares fit
    over the centred ``sg_window`` neighbourhood; the first and last half
    windows reuse the fit of the nearest full window.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise PreprocessError("series must be one-dimensional")
    if series.size < config.sg_window:
        raise PreprocessError(
            f"series of length {series.size} shorter than sg_window={config.sg_window}"
        )
    if not (math.isfinite(dt) and dt > 0):
        raise PreprocessError("dt must be finite and > 0")
    return savgol_filter(
        series, config.sg_window, config.sg_order, deriv=1, delta=dt, mode="interp"
    )


def resample(t, values, target_rate: float):
    """Linearly interpolate ``values(t)`` onto a uniform ``target_rate`` grid.

    The grid starts at ``t[0]`` and stops at the last point not beyond
    ``t[-1]``.  ``values`` may be 1-D or have time along axis 0.  Returns
    ``(t_new, values_new)``.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size == 0:
        raise PreprocessError("empty input")
    if values.shape[0] != t.size:
        raise PreprocessError("timestamps and values differ in length")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise PreprocessError("timestamps must be strictly increasing")
    span = t[-1] - t[0]
    count = int(math.floor(span * target_rate + 1e-9)) + 1
    if t.size < 2 or count < 2:
        raise PreprocessError("output span is empty")
    t_new = t[0] + np.arange(count) / target_rate
    t_new = np.minimum(t_new, t[-1])
    if values.ndim == 1:
        return t_new, np.interp(t_new, t, values)
    flat = values.reshape(t.size, -1)
    out = np.column_stack([np.interp(t_new, t, flat[:, j]) for j in range(flat.shape[1])])
    return t_new, out.reshape((count,) + values.shape[1:])


def forward_speed(vx_h, vy_h):
    """Horizontal speed, the 2-norm of the horizontal velocity components."""
    return np.hypot(vx_h, vy_h)


def preprocess_arrays(t, px, py, pz, config: PreprocessConfig = PreprocessConfig()):
    """Array form of :func:`preprocess`; returns ``(t, vx, vz)``."""
    t = np.asarray(t, dtype=float)
    coords = [np.asarray(c, dtype=float) for c in (px, py, pz)]
    if any(c.shape != t.shape for c in coords):
        raise PreprocessError("position columns differ in length")
    if not all(np.all(np.isfinite(c)) for c in (t, *coords)):
        raise PreprocessError("non-finite position samples")
    if t.size < config.sg_window:
        raise PreprocessError(f"need at least sg_window={config.sg_window} samples, got {t.size}")
    dt = check_uniform(t)
    if 1.0 / dt < 2.0 * config.target_rate:
        raise PreprocessError(
            f"input rate {1.0 / dt:.3g} Hz below twice the target rate {config.target_rate:g} Hz"
        )
    vx_h, vy_h, vz = (savgol_derivative(c, dt, config) for c in coords)
    speed = forward_speed(vx_h, vy_h)
    t_new, out = resample(t, np.column_stack([speed, vz]), config.target_rate)
    return t_new, out[:, 0], out[:, 1]


def preprocess(
    positions: Sequence[PositionSample], config: PreprocessConfig = PreprocessConfig()
) -> list[VelocitySample]:
    """Differentiate, take horizontal speed and resample to ``config.target_rate``."""
    arr = np.asarray(positions, dtype=float).reshape(-1, 4)
    t, vx, vz = preprocess_arrays(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], config)
    return [VelocitySample(*row) for row in zip(t.tolist(), vx.tolist(), vz.tolist())]
