"""End-to-end runs: CSV ingestion, streaming estimation, metrics, simulation, benchmarks."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import kernels
from .config import PipelineConfig, load_config
from .param_extraction import reconstruct_arrays, reconstruct_velocity
from .preprocessing import check_uniform, preprocess_arrays, resample
from .sinusoid_ekf import OMEGA_BAND
from .yoyo_model import WalkProfile, YoyoParams, simulate_arrays

log = logging.getLogger(__name__)

__all__ = [
    "InputFormatError",
    "ErrorMetrics",
    "EstimateResult",
    "OUTPUT_COLUMNS",
    "read_input_csv",
    "velocities_from_input",
    "write_velocity_csv",
    "estimate_arrays",
    "compute_metrics",
    "run_estimate",
    "load_profile",
    "run_simulate",
    "run_benchmark",
    "format_record",
    "GaitEstimator",
    "StreamEstimate",
]

POSITION_HEADER = ("t", "px", "py", "pz")
VELOCITY_HEADER = ("t", "vx", "vz")
OUTPUT_COLUMNS = (
    "t", "vx_meas", "vz_meas", "omega_hat", "A0_hat", "A1_hat",
    "R_hat", "r_hat", "vx_hat", "vz_hat", "gate_active",
)


class InputFormatError(ValueError):
    pass


def _fmt(value: float) -> str:
    return "%.17g" % value


# ---------------------------------------------------------------------------
# CSV


def read_input_csv(path):
    """Parse a position (``t,px,py,pz``) or velocity (``t,vx,vz``) CSV.

    Returns ``(kind, columns)`` with ``kind`` in ``{"position", "velocity"}``
    and ``columns`` a dict of float arrays keyed by header name.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise InputFormatError(f"{path}: empty file") from None
        if header == POSITION_HEADER:
            kind = "position"
        elif header == VELOCITY_HEADER:
            kind = "velocity"
        else:
            raise InputFormatError(
                f"{path}: unrecognised header {','.join(header)!r}; "
                f"expected {','.join(POSITION_HEADER)!r} or {','.join(VELOCITY_HEADER)!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputFormatError(
                    f"{path}: row {lineno}: expected {len(header)} columns, got {len(row)}"
                )
            values = []
            for col, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise InputFormatError(
                        f"{path}: row {lineno}, column {header[col]!r}: not a number: {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise InputFormatError(
                        f"{path}: row {lineno}, column {header[col]!r}: non-finite value"
                    )
                values.append(value)
            rows.append(values)
    if not rows:
        raise InputFormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    if data.shape[0] > 1 and np.any(np.diff(data[:, 0]) <= 0):
        bad = int(np.flatnonzero(np.diff(data[:, 0]) <= 0)[0]) + 3
        raise InputFormatError(f"{path}: row {bad}: timestamps must be strictly increasing")
    return kind, {name: data[:, j].copy() for j, name in enumerate(header)}


def write_velocity_csv(path, t, vx, vz) -> None:
    buf = io.StringIO()
    buf.write(",".join(VELOCITY_HEADER) + "\n")
    for row in zip(t.tolist(), vx.tolist(), vz.tolist()):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue())


def format_record(record: dict) -> str:
    """Render a flat ``key = value`` text block."""
    lines = []
    for key, value in record.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# estimation


@dataclass(frozen=True)
class ErrorMetrics:
    """Mean and standard deviation of the squared velocity error per axis."""

    mse_vx: float
    std_vx: float
    mse_vz: float
    std_vz: float
    n_samples: int

    def as_dict(self) -> dict:
        return asdict(self)


def compute_metrics(measured, estimated) -> ErrorMetrics:
    """Squared-error statistics between two ``(N, 2)`` ``(vx, vz)`` sequences."""
    a = np.asarray(measured, dtype=float)
    b = np.asarray(estimated, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 1:
        raise ValueError("expected non-empty (N, 2) sequences of (vx, vz)")
    sq = (a - b) ** 2
    mse = sq.mean(axis=0)
    std = sq.std(axis=0)
    return ErrorMetrics(float(mse[0]), float(std[0]), float(mse[1]), float(std[1]), int(a.shape[0]))


@dataclass
class EstimateResult:
    """Per-sample estimator output in physical units (rad/s, m/s, m)."""

    t: np.ndarray
    vx_meas: np.ndarray
    vz_meas: np.ndarray
    states: np.ndarray  # raw (N, 4) filter states
    R_hat: np.ndarray
    r_hat: np.ndarray
    gate_active: np.ndarray
    innovation: np.ndarray
    vx_hat: np.ndarray
    vz_hat: np.ndarray
    degenerate: np.ndarray
    T: float

    @property
    def omega_hat(self) -> np.ndarray:
        return self.states[:, 2] / self.T

    @property
    def A0_hat(self) -> np.ndarray:
        return self.states[:, 3] / self.T

    @property
    def A1_hat(self) -> np.ndarray:
        return np.hypot(self.states[:, 0], self.states[:, 1]) / self.T

    @property
    def out_of_band(self) -> np.ndarray:
        x3 = np.abs(self.states[:, 2])
        return ~((x3 > OMEGA_BAND[0]) & (x3 < OMEGA_BAND[1]))

    def metrics(self, skip_seconds: float = 0.0) -> ErrorMetrics:
        keep = self.t >= self.t[0] + skip_seconds - 1e-9
        if not np.any(keep):
            raise ValueError("skip_seconds leaves no samples")
        return compute_metrics(
            np.column_stack([self.vx_meas[keep], self.vz_meas[keep]]),
            np.column_stack([self.vx_hat[keep], self.vz_hat[keep]]),
        )

    def table(self) -> np.ndarray:
        return np.column_stack([
            self.t, self.vx_meas, self.vz_meas, self.omega_hat, self.A0_hat, self.A1_hat,
            self.R_hat, self.r_hat, self.vx_hat, self.vz_hat, self.gate_active.astype(float),
        ])

    def to_csv(self, path) -> None:
        buf = io.StringIO()
        buf.write(",".join(OUTPUT_COLUMNS) + "\n")
        for row in self.table().tolist():
            cells = [_fmt(v) for v in row[:-1]]
            cells.append(str(int(row[-1])))
            buf.write(",".join(cells) + "\n")
        Path(path).write_text(buf.getvalue())


def estimate_arrays(t, vx, vz, config: PipelineConfig | None = None, backend: str = "auto"):
    """Run the filter and radius tracker over uniformly sampled velocities."""
    config = config or load_config()
    T = config.T
    t = np.asarray(t, dtype=float)
    vx = np.asarray(vx, dtype=float)
    vz = np.asarray(vz, dtype=float)
    kernel = kernels.kernel_from_configs(config.ekf, config.params, backend)
    out = kernel.run(np.column_stack([vx * T, vz * T]))
    states = out[:, :4]
    vx_hat, vz_hat, degenerate = reconstruct_arrays(states, out[:, 4], out[:, 5], T)
    result = EstimateResult(
        t=t, vx_meas=vx, vz_meas=vz, states=states, R_hat=out[:, 4], r_hat=out[:, 5],
        gate_active=out[:, 6].astype(bool), innovation=out[:, 7:9],
        vx_hat=vx_hat, vz_hat=vz_hat, degenerate=degenerate, T=T,
    )
    n_out = int(result.out_of_band.sum())
    if n_out:
        log.info("%d of %d samples with |omega| outside %s rad/sample", n_out, t.size, OMEGA_BAND)
    if degenerate.any():
        log.info("%d amplitude-degenerate samples", int(degenerate.sum()))
    return result


def velocities_from_input(kind, cols, config: PipelineConfig):
    """Turn parsed CSV columns into ``(t, vx, vz)`` uniformly sampled at ``config.T``."""
    if kind == "position":
        if cols["t"].size < config.preprocess.sg_window:
            raise InputFormatError(
                f"position input needs at least sg_window={config.preprocess.sg_window} rows"
            )
        return preprocess_arrays(cols["t"], cols["px"], cols["py"], cols["pz"], config.preprocess)
    t, vx, vz = cols["t"], cols["vx"], cols["vz"]
    if t.size >= 2:
        try:
            check_uniform(t, dt=config.T)
            return t, vx, vz
        except ValueError:
            pass
        t, out = resample(t, np.column_stack([vx, vz]), 1.0 / config.T)
        return t, out[:, 0], out[:, 1]
    return t, vx, vz


def run_estimate(
    input_path,
    output_path=None,
    config_path=None,
    metrics_path=None,
    skip_seconds: float = 0.0,
    backend: str = "auto",
):
    """Estimate from a CSV file; writes the per-sample table and optional metrics.

    Returns ``(EstimateResult, ErrorMetrics)``.  Nothing is written if the
    input or config cannot be parsed.
    """
    config = load_config(config_path)
    kind, cols = read_input_csv(input_path)
    t, vx, vz = velocities_from_input(kind, cols, config)
    result = estimate_arrays(t, vx, vz, config, backend)
    metrics = result.metrics(skip_seconds)
    if output_path is not None:
        result.to_csv(output_path)
    if metrics_path is not None:
        Path(metrics_path).write_text(format_record(metrics.as_dict()))
    return result, metrics


# ---------------------------------------------------------------------------
# simulation


def load_profile(path) -> WalkProfile:
    """Read a walk profile file.

    One ``duration_s omega_rad_s`` pair per line (whitespace or comma
    separated), optionally preceded by ``phase0 = <radians>``.  ``#`` starts
    a comment.
    """
    path = Path(path)
    segments = []
    phase0 = 0.0
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" in line:
            key, value = (p.strip() for p in line.split("=", 1))
            if key != "phase0":
                raise InputFormatError(f"{where}: unknown key {key!r}")
            phase0 = float(value)
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise InputFormatError(f"{where}: expected 'duration omega', got {line!r}")
        try:
            segments.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise InputFormatError(f"{where}: not a number in {line!r}") from None
    try:
        return WalkProfile(tuple(segments), phase0)
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def run_simulate(
    params: YoyoParams,
    profile: WalkProfile,
    noise=0.0,
    seed: int = 0,
    out_path=None,
    T: float = 0.04,
    duration: float | None = None,
):
    """Simulate a walk and optionally write it as a velocity CSV; returns ``(t, vx, vz)``."""
    duration = profile.total_duration if duration is None else duration
    t, vx, vz = simulate_arrays(params, profile, T, duration, noise, seed)
    if out_path is not None:
        write_velocity_csv(out_path, t, vx, vz)
    return t, vx, vz


# ---------------------------------------------------------------------------
# benchmark


def _bench_backend(backend: str, z, config: PipelineConfig, batch: bool):
    kernel = kernels.kernel_from_configs(config.ekf, config.params, backend)
    push = kernel.push
    clock = time.perf_counter_ns
    durations = np.empty(z.shape[0], dtype=np.int64)
    for i, (zx, zz) in enumerate(z.tolist()):
        start = clock()
        push(zx, zz)
        durations[i] = clock() - start
    report = {
        "mean_us": float(durations.mean()) / 1e3,
        "p99_us": float(np.percentile(durations, 99)) / 1e3,
    }
    if batch:
        kernel = kernels.kernel_from_configs(config.ekf, config.params, backend)
        start = clock()
        kernel.run(z)
        report["batch_mean_us"] = (clock() - start) / 1e3 / z.shape[0]
    report["realtime_factor"] = config.T * 1e6 / report["mean_us"]
    return report


def run_benchmark(iterations: int = 100_000, backends=("auto",), seed: int = 0, batch: bool = True):
    """Time one filter step plus radius update per sample, excluding I/O.

    ``mean_us``/``p99_us`` time individual streaming ``push`` calls;
    ``batch_mean_us`` is the per-sample cost of the array loop.  Returns a
    dict keyed by backend name.
    """
    iterations = int(iterations)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    config = load_config()
    T = config.T
    duration = iterations * T
    profile = WalkProfile.constant(2.5, duration)
    _, vx, vz = simulate_arrays(YoyoParams(2.0, 0.2), profile, T, duration + T / 2, 0.02, seed)
    z = np.column_stack([vx[:iterations], vz[:iterations]]) * T
    available = kernels.available_backends()
    results = {}
    for name in backends:
        if name == "auto":
            name = kernels.BACKEND
        if name not in available:
            raise ValueError(f"backend {name!r} not available (have {sorted(available)})")
        report = {"iterations": iterations}
        report.update(_bench_backend(name, z, config, batch))
        results[name] = report
    return results



class StreamEstimate(NamedTuple):
    omega: float  # rad/s
    R_hat: float
    r_hat: float
    vx_hat: float
    vz_hat: float
    gate_active: bool


class GaitEstimator:
    """Sample-by-sample estimator for live velocity streams.

    >>> est = GaitEstimator()
    >>> out = est.push(5.5, 0.0)
    >>> out.R_hat
    2.0
    """

    def __init__(self, config: PipelineConfig | None = None, backend: str = "auto"):
        self.config = config or load_config()
        self.kernel = kernels.kernel_from_configs(self.config.ekf, self.config.params, backend)

    def push(self, vx: float, vz: float) -> StreamEstimate:
        T = self.config.T
        kernel = self.kernel
        gate = kernel.push(vx * T, vz * T)
        state = kernel.state
        vx_hat, vz_hat, _ = reconstruct_velocity(state, (kernel.R_hat, kernel.r_hat), T)
        return StreamEstimate(state[2] / T, kernel.R_hat, kernel.r_hat, vx_hat, vz_hat, bool(gate))
