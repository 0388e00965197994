"""Extended Kalman filter over a biased sinusoid.

State ``x = (x1, x2, x3, x4)``:

    x1 = A1*cos(w*k + phi)     x3 = w   (radians per sample)
    x2 = A1*sin(w*k + phi)     x4 = A0  (bias)

Each step rotates ``(x1, x2)`` by ``x3``.  Measurements are the forward and
vertical velocities multiplied by the sampling time, so bias and amplitude
are per-sample displacements and ``x4/x3`` comes out in meters::

    vx*T = x4 + x1
    vz*T = -x2

The functions here are the NumPy reference path.  Streaming estimation at
run time goes through :mod:`yoyogait.kernels`, which implements the same
arithmetic on scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "EkfState",
    "EkfConfig",
    "Measurement",
    "DegenerateCovarianceError",
    "H",
    "OMEGA_BAND",
    "default_config",
    "transition",
    "transition_jacobian",
    "predict",
    "update",
    "step",
    "in_band",
    "innovation_condition",
]

#: Measurement matrix mapping the state onto (vx*T, vz*T).
H = np.array([[1.0, 0.0, 0.0, 1.0], [0.0, -1.0, 0.0, 0.0]])

#: Recommended operating range of |x3| in radians per sample.
OMEGA_BAND = (0.05, 0.5)

S_CONDITION_LIMIT = 1e12


class DegenerateCovarianceError(ArithmeticError):
    """Innovation covariance is numerically singular."""


class EkfState(NamedTuple):
    x1: float
    x2: float
    x3: float
    x4: float

    @property
    def amplitude(self) -> float:
        return math.hypot(self.x1, self.x2)

    @property
    def omega(self) -> float:
        return self.x3

    @property
    def bias(self) -> float:
        return self.x4

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class Measurement(NamedTuple):
    """Velocities scaled to per-sample displacements (``v*T``)."""

    vx_s: float
    vz_s: float

    @classmethod
    def from_velocity(cls, vx: float, vz: float, T: float) -> "Measurement":
        return cls(vx * T, vz * T)


@dataclass(frozen=True)
class EkfConfig:
    """Noise model, prior and sampling time of the filter.

    ``Q`` (4x4) and ``V`` (2x2) are the process and measurement covariances,
    ``P0`` the prior covariance of ``x0``.
    """

    Q: np.ndarray
    V: np.ndarray
    P0: np.ndarray
    x0: EkfState
    T: float

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        V = np.array(self.V, dtype=float)
        P0 = np.array(self.P0, dtype=float)
        if Q.shape != (4, 4) or V.shape != (2, 2) or P0.shape != (4, 4):
            raise ValueError("expected Q 4x4, V 2x2 and P0 4x4")
        if np.any(np.diag(Q) <= 0) or np.any(np.diag(V) <= 0):
            raise ValueError("diagonal entries of Q and V must be > 0")
        if not np.allclose(P0, P0.T):
            raise ValueError("P0 must be symmetric")
        if np.linalg.eigvalsh(P0).min() <= 0:
            raise ValueError("P0 must be positive definite")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError("T must be finite and > 0")
        x0 = EkfState(*(float(v) for v in self.x0))
        if not all(math.isfinite(v) for v in x0):
            raise ValueError("x0 must be finite")
        for arr in (Q, V, P0):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "P0", P0)
        object.__setattr__(self, "x0", x0)

    def with_(self, **changes) -> "EkfConfig":
        return replace(self, **changes)


def default_config(
    R0: float = 2.0, r0: float = 0.2, omega0: float = 0.1, T: float = 0.04
) -> EkfConfig:
    """Tuning used for human walking at 25 Hz.

    ``omega0`` is the initial frequency in radians per sample.  The initial
    trigonometric state starts at phase zero so ``x2(0) = 0``.
    """
    return EkfConfig(
        Q=np.diag([1e-5, 1e-5, 1e-3, 1e-3]),
        V=np.diag([1e-2, 1e-2]),
        P0=np.eye(4),
        x0=EkfState(r0 * omega0, 0.0, omega0, R0 * omega0),
        T=T,
    )


def transition(state) -> EkfState:
    x1, x2, x3, x4 = state
    c, s = math.cos(x3), math.sin(x3)
    return EkfState(x1 * c - x2 * s, x1 * s + x2 * c, x3, x4)


def transition_jacobian(state) -> np.ndarray:
    x1, x2, x3, _ = state
    c, s = math.cos(x3), math.sin(x3)
    return np.array(
        [
            [c, -s, -x1 * s - x2 * c, 0.0],
            [s, c, x1 * c - x2 * s, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def predict(state, cov: np.ndarray, config: EkfConfig):
    """Time update; returns the predicted ``(state, P)``."""
    F = transition_jacobian(state)
    P = F @ np.asarray(cov, dtype=float) @ F.T + config.Q
    return transition(state), _symmetrize(P)


def innovation_condition(S: np.ndarray) -> float:
    """2-norm condition number of a symmetric 2x2 matrix."""
    a, b, d = S[0, 0], 0.5 * (S[0, 1] + S[1, 0]), S[1, 1]
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    hi, lo = abs(mean + radius), abs(mean - radius)
    if lo == 0.0:
        return math.inf
    return max(hi, lo) / min(hi, lo)


def update(state, cov: np.ndarray, z, config: EkfConfig):
    """Measurement update in Joseph form.

    Returns ``(state, P, innovation)``.  Raises
    :class:`DegenerateCovarianceError` when the innovation covariance has a
    condition number above 1e12.
    """
    x = np.asarray(state, dtype=float)
    P = np.asarray(cov, dtype=float)
    nu = np.asarray(z, dtype=float) - H @ x
    S = H @ P @ H.T + config.V
    cond = innovation_condition(S)
    if not cond <= S_CONDITION_LIMIT:
        raise DegenerateCovarianceError(f"innovation covariance condition number {cond:.3g}")
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    S_inv = np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
    K = P @ H.T @ S_inv
    x_new = x + K @ nu
    IKH = np.eye(4) - K @ H
    P_new = IKH @ P @ IKH.T + K @ config.V @ K.T
    return EkfState(*x_new.tolist()), _symmetrize(P_new), nu


def step(state, cov: np.ndarray, z, config: EkfConfig):
    """Predict followed by update; returns ``(state, P, innovation)``."""
    x_pred, P_pred = predict(state, cov, config)
    return update(x_pred, P_pred, z, config)


def in_band(x3: float, band: tuple[float, float] = OMEGA_BAND) -> bool:
    """Whether ``|x3|`` lies in the recommended radians-per-sample band."""
    return band[0] < abs(x3) < band[1]
