import numpy as np
import pytest
from hypothesis import settings

from yoyogait import kernels
from yoyogait.param_extraction import ParamFilterConfig
from yoyogait.sinusoid_ekf import default_config

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

BACKENDS = sorted(kernels.available_backends())


def biased_sinusoid(omega_t, A0, A1, n, phase=0.0):
    """Noise-free scaled measurements ``(A0 + A1 cos, -A1 sin)`` for samples 1..n."""
    k = np.arange(1, n + 1)
    angle = omega_t * k + phase
    return np.column_stack([A0 + A1 * np.cos(angle), -A1 * np.sin(angle)])


def run_kernel(z, ekf=None, params=None, backend="auto"):
    ekf = ekf or default_config()
    params = params or ParamFilterConfig()
    return kernels.kernel_from_configs(ekf, params, backend).run(np.asarray(z, dtype=float))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record ``(passed, detail)`` for the acceptance criterion named by the test's mark."""
    name = request.node.get_closest_marker("criterion").args[0]

    def record(passed, detail):
        _CRITERIA[name] = (bool(passed), detail)
        print(f"{name} {'PASS' if passed else 'FAIL'}: {detail}")
        return passed

    yield record
    if name not in _CRITERIA:
        _CRITERIA[name] = (False, "did not complete")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion identifier")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        passed, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{name} {'PASS' if passed else 'FAIL'}: {detail}")
