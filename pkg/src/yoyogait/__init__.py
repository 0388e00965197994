"""Real-time estimation of walking gait kinematics.

Forward and vertical velocities of a walker are modelled as a biased
sinusoid generated by a curtate cycloid; an extended Kalman filter tracks
its frequency, bias and phase, and gated smoothing recovers the cycloid
radii.
"""

from .kernels import BACKEND
from .param_extraction import (
    ParamFilterConfig,
    ParamTracker,
    decompose,
    reconstruct_velocity,
    update_params,
)
from .pipeline import ErrorMetrics, GaitEstimator, compute_metrics, estimate_arrays
from .sinusoid_ekf import EkfConfig, EkfState, default_config, step
from .yoyo_model import WalkProfile, YoyoParams, position, simulate_walk, velocity

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EkfConfig",
    "EkfState",
    "ErrorMetrics",
    "GaitEstimator",
    "ParamFilterConfig",
    "ParamTracker",
    "WalkProfile",
    "YoyoParams",
    "compute_metrics",
    "decompose",
    "default_config",
    "estimate_arrays",
    "position",
    "reconstruct_velocity",
    "simulate_walk",
    "step",
    "update_params",
    "velocity",
]
