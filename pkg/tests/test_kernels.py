import os
import time

import numpy as np
import pytest

from conftest import BACKENDS, biased_sinusoid
from yoyogait import kernels
from yoyogait.param_extraction import ParamFilterConfig, ParamTracker, update_params
from yoyogait.sinusoid_ekf import default_config, step


def reference_run(z, ekf, params):
    x, P = ekf.x0, ekf.P0
    tracker = ParamTracker.initial(params)
    rows = []
    for zk in z:
        x, P, nu = step(x, P, zk, ekf)
        tracker = update_params(tracker, x, params)
        rows.append([*x, tracker.R_hat, tracker.r_hat, float(tracker.gate_active), *nu])
    return np.array(rows), P


def walk_measurements(seed, n=3000):
    rng = np.random.default_rng(seed)
    z = biased_sinusoid(0.1, 0.2, 0.02, n, phase=rng.uniform(-0.5, 0.5))
    z[n // 3 : n // 2] = 0.0  # standstill
    return z + 0.0008 * rng.standard_normal(z.shape)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("abs_gate", [False, True])
def test_kernel_matches_reference(backend, seed, abs_gate):
    ekf = default_config()
    params = ParamFilterConfig(abs_gate=abs_gate)
    z = walk_measurements(seed)
    expected, P_ref = reference_run(z, ekf, params)
    kernel = kernels.kernel_from_configs(ekf, params, backend)
    out = kernel.run(z)
    np.testing.assert_allclose(out, expected, rtol=0, atol=1e-10)
    np.testing.assert_allclose(kernel.cov, P_ref, rtol=0, atol=1e-10)
    assert kernel.k == len(z)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@pytest.mark.parametrize("seed", [3, 4])
def test_backends_bitwise_identical(seed):
    ekf, params = default_config(), ParamFilterConfig()
    z = walk_measurements(seed, 5000)
    a = kernels.kernel_from_configs(ekf, params, "compiled").run(z)
    b = kernels.kernel_from_configs(ekf, params, "python").run(z)
    assert a.tobytes() == b.tobytes()


def test_push_matches_run(backend):
    ekf, params = default_config(), ParamFilterConfig()
    z = walk_measurements(5, 600)
    batch = kernels.kernel_from_configs(ekf, params, backend).run(z)
    kernel = kernels.kernel_from_configs(ekf, params, backend)
    for i, (zx, zz) in enumerate(z):
        gate = kernel.push(zx, zz)
        assert gate == batch[i, 6]
        assert kernel.state == tuple(batch[i, :4])
        assert (kernel.R_hat, kernel.r_hat) == tuple(batch[i, 4:6])


def test_warm_up_holds_initial_radii(backend):
    z = biased_sinusoid(0.1, 0.25, 0.03, 30)
    out = kernels.kernel_from_configs(default_config(), ParamFilterConfig(), backend).run(z)
    assert np.all(out[:10, 4] == 2.0)
    assert np.all(out[:10, 5] == 0.2)
    assert not out[:10, 6].any()


def test_degenerate_innovation_raises(backend):
    # F = I at this state, so the innovation covariance is ~diag(3e-14, 1e3)
    ekf = default_config().with_(
        x0=(0.0, 0.0, 0.0, 0.0),
        P0=np.diag([1e-14, 1e3, 1e-14, 1e-14]),
        Q=np.diag([1e-15, 1e-5, 1e-15, 1e-15]),
        V=np.diag([1e-14, 1e-2]),
    )
    kernel = kernels.kernel_from_configs(ekf, ParamFilterConfig(), backend)
    with pytest.raises(kernels.DEGENERATE_ERRORS):
        kernel.push(0.0, 0.0)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_kernel_class("fortran")


def test_auto_backend_prefers_compiled():
    forced = os.environ.get("YOYOGAIT_PURE_PYTHON") == "1"
    expected = "compiled" if "compiled" in BACKENDS and not forced else "python"
    assert kernels.BACKEND == expected


def test_python_fallback_under_budget():
    kernel = kernels.kernel_from_configs(default_config(), ParamFilterConfig(), "python")
    z = walk_measurements(6, 20_000).tolist()
    start = time.perf_counter()
    for zx, zz in z:
        kernel.push(zx, zz)
    mean_us = (time.perf_counter() - start) / len(z) * 1e6
    assert mean_us < 54.6
