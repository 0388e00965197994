"""Flat ``key = value`` configuration files.

Recognised keys (defaults in brackets)::

    q1 q2 q3 q4     process noise variances          [1e-5 1e-5 1e-3 1e-3]
    v1 v2           measurement noise variances      [1e-2 1e-2]
    p0_scale        prior covariance P0 = p0_scale*I [1]
    T               sampling time, s                 [0.04]
    omega0          initial frequency, rad/sample    [0.1]
    R0 r0           initial radii, m                 [2 0.2]
    n               smoothing window, samples        [10]
    mu_omega        frequency gate, rad/sample       [0.1]
    mu_a0           bias gate, m/sample              [0.1]
    abs_gate        gate on |x3|, |x4| (true/false)  [false]
    sg_window       Savitzky-Golay window, samples   [11]
    sg_order        Savitzky-Golay order             [3]
    target_rate     resampling rate, Hz              [25]

``#`` starts a comment.  Unknown keys and malformed lines are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .param_extraction import ParamFilterConfig
from .preprocessing import PreprocessConfig
from .sinusoid_ekf import EkfConfig, EkfState

__all__ = ["ConfigError", "PipelineConfig", "DEFAULTS", "parse_config", "load_config"]

DEFAULTS = {
    "q1": 1e-5,
    "q2": 1e-5,
    "q3": 1e-3,
    "q4": 1e-3,
    "v1": 1e-2,
    "v2": 1e-2,
    "p0_scale": 1.0,
    "T": 0.04,
    "omega0": 0.1,
    "R0": 2.0,
    "r0": 0.2,
    "n": 10,
    "mu_omega": 0.1,
    "mu_a0": 0.1,
    "abs_gate": False,
    "sg_window": 11,
    "sg_order": 3,
    "target_rate": 25.0,
}

_INT_KEYS = {"n", "sg_window", "sg_order"}
_BOOL_KEYS = {"abs_gate"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    ekf: EkfConfig
    params: ParamFilterConfig
    preprocess: PreprocessConfig
    values: dict = field(default_factory=dict, compare=False)

    @property
    def T(self) -> float:
        return self.ekf.T


def _coerce(key: str, raw: str, where: str):
    text = raw.strip()
    if key in _BOOL_KEYS:
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where}: {key} expects a boolean, got {raw!r}")
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{where}: {key} expects a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{where}: {key} must be finite")
    if key in _INT_KEYS:
        if value != int(value):
            raise ConfigError(f"{where}: {key} expects an integer, got {raw!r}")
        return int(value)
    return value


def parse_config(text: str, source: str = "<config>") -> PipelineConfig:
    values = dict(DEFAULTS)
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        seen.add(key)
        values[key] = _coerce(key, raw, where)
    return build_config(values)


def build_config(values: dict) -> PipelineConfig:
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    v = {**DEFAULTS, **values}
    try:
        ekf = EkfConfig(
            Q=np.diag([v["q1"], v["q2"], v["q3"], v["q4"]]),
            V=np.diag([v["v1"], v["v2"]]),
            P0=v["p0_scale"] * np.eye(4),
            x0=EkfState(v["r0"] * v["omega0"], 0.0, v["omega0"], v["R0"] * v["omega0"]),
            T=v["T"],
        )
        params = ParamFilterConfig(
            n=v["n"], mu_omega=v["mu_omega"], mu_A0=v["mu_a0"], R0=v["R0"], r0=v["r0"],
            abs_gate=v["abs_gate"],
        )
        pre = PreprocessConfig(
            sg_window=v["sg_window"], sg_order=v["sg_order"], target_rate=v["target_rate"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if abs(pre.target_rate * ekf.T - 1.0) > 1e-9:
        raise ConfigError(
            f"target_rate={pre.target_rate:g} Hz inconsistent with T={ekf.T:g} s"
        )
    return PipelineConfig(ekf, params, pre, v)


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return build_config({})
    path = Path(path)
    return parse_config(path.read_text(), str(path))
