"""Backend selection for the streaming estimator.

The compiled Cython extension is used when it is importable; otherwise the
pure-Python implementation is loaded.  Set ``YOYOGAIT_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _pykernels

try:
    if os.environ.get("YOYOGAIT_PURE_PYTHON") == "1":
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _active
except ImportError:
    _active = _pykernels

GaitKernel = _active.GaitKernel
BACKEND = _active.BACKEND
_modules = [_pykernels]
try:
    from . import _kernels as _compiled
except ImportError:
    pass
else:
    _modules.insert(0, _compiled)
# exception classes of every importable backend, so callers choosing one
# explicitly can still catch its degenerate-innovation error
DEGENERATE_ERRORS = tuple(m.DegenerateInnovation for m in _modules)


def available_backends():
    """Map backend name to its ``GaitKernel`` class for every importable backend."""
    backends = {"python": _pykernels.GaitKernel}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        backends["compiled"] = _kernels.GaitKernel
    return backends


def get_kernel_class(backend="auto"):
    if backend == "auto":
        return GaitKernel
    backends = available_backends()
    if backend not in backends:
        raise ValueError(f"backend {backend!r} not available (have {sorted(backends)})")
    return backends[backend]


def kernel_from_configs(ekf_config, param_config, backend="auto"):
    """Build a kernel seeded from an ``EkfConfig`` and ``ParamFilterConfig``."""
    cls = get_kernel_class(backend)
    return cls(
        ekf_config.x0,
        ekf_config.P0.ravel(),
        ekf_config.Q.ravel(),
        ekf_config.V.ravel(),
        param_config.n,
        param_config.mu_omega,
        param_config.mu_A0,
        param_config.R0,
        param_config.r0,
        param_config.abs_gate,
    )
