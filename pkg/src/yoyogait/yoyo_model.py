"""Curtate-cycloid ("Yoyo") kinematics of a walking human.

The tracked point moves like a point on an inner cylinder of radius ``r``
attached to an outer cylinder of radius ``R`` rolling along the ground:

    x = R*theta + r*sin(theta)        vx = R*w + r*w*cos(theta)
    z = z0 + r*cos(theta)             vz = -r*w*sin(theta)

with ``w = dtheta/dt`` the angular step frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "YoyoParams",
    "WalkProfile",
    "VelocitySample",
    "position",
    "velocity",
    "simulate_walk",
    "simulate_positions",
    "samples_to_arrays",
]


@dataclass(frozen=True)
class YoyoParams:
    """Gait constants of one walker (meters)."""

    R: float
    r: float
    z0: float = 1.0

    def __post_init__(self):
        for name in ("R", "r", "z0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not self.r < self.R:
            raise ValueError(f"r must be smaller than R (got r={self.r}, R={self.R})")


@dataclass(frozen=True)
class WalkProfile:
    """Piecewise-constant step frequency schedule.

    ``segments`` is a sequence of ``(duration_s, omega_rad_s)`` pairs.  Past
    the end of the schedule the last segment's frequency is held.
    """

    segments: tuple[tuple[float, float], ...]
    phase0: float = 0.0

    def __post_init__(self):
        segments = tuple((float(d), float(w)) for d, w in self.segments)
        if not segments:
            raise ValueError("profile needs at least one segment")
        for duration, omega in segments:
            if not (math.isfinite(duration) and duration > 0):
                raise ValueError(f"segment duration must be > 0, got {duration!r}")
            if not (math.isfinite(omega) and omega >= 0):
                raise ValueError(f"segment omega must be >= 0, got {omega!r}")
        if not math.isfinite(self.phase0):
            raise ValueError("phase0 must be finite")
        object.__setattr__(self, "segments", segments)

    @classmethod
    def constant(cls, omega: float, duration: float, phase0: float = 0.0) -> "WalkProfile":
        return cls(((duration, omega),), phase0)

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def omega_at(self, t: np.ndarray) -> np.ndarray:
        """Step frequency in effect at times ``t`` (vectorised)."""
        t = np.asarray(t, dtype=float)
        ends = np.cumsum([d for d, _ in self.segments])
        omegas = np.array([w for _, w in self.segments])
        idx = np.searchsorted(ends, t, side="right")
        return omegas[np.minimum(idx, len(omegas) - 1)]


class VelocitySample(NamedTuple):
    t: float
    vx: float
    vz: float


def position(params: YoyoParams, theta):
    """Forward and vertical position at cycloid angle ``theta``."""
    x = params.R * theta + params.r * np.sin(theta)
    z = params.z0 + params.r * np.cos(theta)
    return x, z


def velocity(params: YoyoParams, omega, theta):
    """Forward and vertical velocity for step frequency ``omega`` at angle ``theta``."""
    vx = params.R * omega + params.r * omega * np.cos(theta)
    vz = -params.r * omega * np.sin(theta)
    return vx, vz


def _theta_path(profile: WalkProfile, T: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n) * T
    omega = profile.omega_at(t)
    theta = np.empty(n)
    theta[0] = profile.phase0
    # theta(k+1) = theta(k) + omega(k)*T, accumulated left to right
    np.cumsum(omega[:-1] * T, out=theta[1:])
    theta[1:] += profile.phase0
    return omega, theta


def simulate_walk(
    params: YoyoParams,
    profile: WalkProfile,
    T: float,
    duration: float,
    noise_std: float | Sequence[float] = (0.0, 0.0),
    seed: int = 0,
) -> list[VelocitySample]:
    """Sample noisy Yoyo-model velocities every ``T`` seconds for ``duration`` seconds.

    ``noise_std`` is either one standard deviation for both axes or a
    ``(sigma_vx, sigma_vz)`` pair.  Output is fully determined by ``seed``.
    """
    t, vx, vz = simulate_arrays(params, profile, T, duration, noise_std, seed)
    return [VelocitySample(float(a), float(b), float(c)) for a, b, c in zip(t, vx, vz)]


def simulate_arrays(
    params: YoyoParams,
    profile: WalkProfile,
    T: float,
    duration: float,
    noise_std: float | Sequence[float] = (0.0, 0.0),
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Array form of :func:`simulate_walk` returning ``(t, vx, vz)``."""
    if not (T > 0 and math.isfinite(T)):
        raise ValueError("T must be finite and > 0")
    if not (duration > 0 and math.isfinite(duration)):
        raise ValueError("duration must be finite and > 0")
    sx, sz = _noise_pair(noise_std)
    n = int(math.floor(duration / T + 1e-9))
    if n < 1:
        raise ValueError("duration shorter than one sample")
    omega, theta = _theta_path(profile, T, n)
    vx, vz = velocity(params, omega, theta)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((2, n))
    vx = vx + sx * noise[0]
    vz = vz + sz * noise[1]
    return np.arange(n) * T, vx, vz


def simulate_positions(
    params: YoyoParams,
    profile: WalkProfile,
    rate: float,
    duration: float,
    heading: float = 0.0,
):
    """Noise-free tracked-point positions sampled at ``rate`` Hz.

    Returns ``(t, px, py, pz)``; forward motion runs along ``heading``
    (radians from the +x axis) in the horizontal plane.  The angle is
    integrated exactly within each constant-frequency segment.
    """
    n = int(math.floor(duration * rate + 1e-9))
    t = np.arange(n) / rate
    starts = np.concatenate(([0.0], np.cumsum([d for d, _ in profile.segments])[:-1]))
    omegas = np.array([w for _, w in profile.segments])
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(omegas) - 1)
    theta_start = profile.phase0 + np.concatenate(
        ([0.0], np.cumsum(np.diff(starts) * omegas[:-1]))
    )
    theta = theta_start[idx] + omegas[idx] * (t - starts[idx])
    forward, pz = position(params, theta)
    return t, forward * math.cos(heading), forward * math.sin(heading), pz


def samples_to_arrays(samples: Sequence[VelocitySample]):
    """Split a sample sequence into ``(t, vx, vz)`` arrays."""
    arr = np.asarray(samples, dtype=float).reshape(-1, 3)
    return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()


def _noise_pair(noise_std) -> tuple[float, float]:
    if np.ndim(noise_std) == 0:
        pair = (float(noise_std), float(noise_std))
    else:
        pair = tuple(float(s) for s in noise_std)
        if len(pair) != 2:
            raise ValueError("noise_std must be a scalar or a (vx, vz) pair")
    for s in pair:
        if not math.isfinite(s) or s < 0:
            raise ValueError(f"noise standard deviation must be finite and >= 0, got {s!r}")
    return pair
