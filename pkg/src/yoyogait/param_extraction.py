"""Observability-gated smoothing of the cycloid radii and velocity reconstruction.

The raw ratios ``x4/x3`` (outer radius) and ``A1/x3`` (inner radius) jump
around whenever the filter is re-locking, and are meaningless once the
walker stops (bias and amplitude both vanish with the frequency).  A
:class:`ParamTracker` therefore only accepts a new ratio when ``x3`` and
``x4`` clear fixed thresholds, and averages it with the ``n`` previously
accepted values.  Rejected samples hold the previous output exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "AMPLITUDE_EPS",
    "ParamFilterConfig",
    "ParamTracker",
    "VelocityEstimate",
    "gate_passes",
    "update_params",
    "reconstruct_velocity",
    "reconstruct_arrays",
    "decompose",
]

AMPLITUDE_EPS = 1e-9


@dataclass(frozen=True)
class ParamFilterConfig:
    """Window length, gate thresholds and initial radii.

    ``mu_omega`` is in radians per sample and ``mu_A0`` in meters per
    sample, the same units as the filter state.  ``abs_gate`` compares
    ``|x3|`` and ``|x4|`` against the thresholds instead, which lets a
    filter sitting on the mirrored negative-frequency solution keep
    updating the radii.
    """

    n: int = 10
    mu_omega: float = 0.1
    mu_A0: float = 0.1
    R0: float = 2.0
    r0: float = 0.2
    abs_gate: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("mu_omega", "mu_A0", "R0", "r0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ParamTracker:
    """Smoothed radii plus the accepted-value history (oldest first)."""

    R_hat: float
    r_hat: float
    history_R: tuple[float, ...]
    history_r: tuple[float, ...]
    k: int = 0
    gate_active: bool = False

    @classmethod
    def initial(cls, config: ParamFilterConfig) -> "ParamTracker":
        return cls(
            R_hat=config.R0,
            r_hat=config.r0,
            history_R=(config.R0,) * config.n,
            history_r=(config.r0,) * config.n,
        )


def _mean_with(history, value: float) -> float:
    # explicit left-to-right sum; the compiled kernel uses the same order
    total = 0.0
    for h in history:
        total += h
    return (total + value) / (len(history) + 1)


def gate_passes(state, k: int, config: ParamFilterConfig) -> bool:
    """Whether sample ``k`` with filter ``state`` may update the radii."""
    x3, x4 = state[2], state[3]
    if config.abs_gate:
        x3, x4 = abs(x3), abs(x4)
    return k > config.n and x3 > config.mu_omega and x4 > config.mu_A0


def update_params(tracker: ParamTracker, state, config: ParamFilterConfig) -> ParamTracker:
    """Advance the tracker by one filter sample.

    The sample index counts filter updates starting at 1, so the first
    ``n`` samples are always a warm-up hold.
    """
    k = tracker.k + 1
    if not gate_passes(state, k, config):
        return ParamTracker(
            tracker.R_hat, tracker.r_hat, tracker.history_R, tracker.history_r, k, False
        )
    x1, x2, x3, x4 = state
    if config.abs_gate:
        x3, x4 = abs(x3), abs(x4)
    R_new = _mean_with(tracker.history_R, x4 / x3)
    r_new = _mean_with(tracker.history_r, math.sqrt(x1 * x1 + x2 * x2) / x3)
    return ParamTracker(
        R_new,
        r_new,
        tracker.history_R[1:] + (R_new,),
        tracker.history_r[1:] + (r_new,),
        k,
        True,
    )


class VelocityEstimate(NamedTuple):
    vx: float
    vz: float
    degenerate: bool = False


def reconstruct_velocity(state, tracker, T: float) -> VelocityEstimate:
    """Velocity rebuilt from the smoothed radii and the filter phase (m/s).

    ``tracker`` may be a :class:`ParamTracker` or an ``(R_hat, r_hat)``
    pair.  When the amplitude is below :data:`AMPLITUDE_EPS` the phase is
    undefined and only the forward term is returned, flagged degenerate.
    """
    forward, (ox, oz), degenerate = _components(state, tracker, T)
    return VelocityEstimate(forward + ox, oz, degenerate)


def decompose(state, tracker, T: float):
    """Split the reconstruction into forward progression and oscillation.

    Returns ``(v_forward, (v_osc_x, v_osc_z))`` in m/s.
    """
    forward, osc, _ = _components(state, tracker, T)
    return forward, osc


def _components(state, tracker, T):
    R_hat, r_hat = _radii(tracker)
    x1, x2, x3, _ = state
    a1 = math.sqrt(x1 * x1 + x2 * x2)
    forward = R_hat * x3 / T
    if a1 <= AMPLITUDE_EPS:
        return forward, (0.0, 0.0), True
    return forward, (r_hat * x3 * (x1 / a1) / T, -r_hat * x3 * (x2 / a1) / T), False


def _radii(tracker):
    if isinstance(tracker, ParamTracker):
        return tracker.R_hat, tracker.r_hat
    R_hat, r_hat = tracker
    return R_hat, r_hat


def reconstruct_arrays(states: np.ndarray, R_hat, r_hat, T: float):
    """Vectorised :func:`reconstruct_velocity` over an ``(N, 4)`` state array.

    Returns ``(vx_hat, vz_hat, degenerate)``.
    """
    states = np.asarray(states, dtype=float)
    x1, x2, x3 = states[:, 0], states[:, 1], states[:, 2]
    a1 = np.sqrt(x1 * x1 + x2 * x2)
    degenerate = a1 <= AMPLITUDE_EPS
    safe = np.where(degenerate, 1.0, a1)
    cos_part = np.where(degenerate, 0.0, x1 / safe)
    sin_part = np.where(degenerate, 0.0, x2 / safe)
    R_hat = np.asarray(R_hat, dtype=float)
    r_hat = np.asarray(r_hat, dtype=float)
    vx = R_hat * x3 / T + r_hat * x3 * cos_part / T
    vz = -r_hat * x3 * sin_part / T
    return vx, vz, degenerate
