"""Per-sample cost of one filter step plus radius update on each implementation.

    python benchmarks/bench_kernels.py [--iters N] [--seed S]

``compiled`` and ``python`` are the two streaming kernels selected by
``yoyogait.kernels``; ``numpy`` is the matrix-form reference in
``yoyogait.sinusoid_ekf`` / ``yoyogait.param_extraction``, timed on a
shorter run because it is much slower.
"""

import argparse
import time

import numpy as np

from yoyogait import kernels
from yoyogait.param_extraction import ParamFilterConfig, ParamTracker, update_params
from yoyogait.sinusoid_ekf import default_config, step
from yoyogait.yoyo_model import WalkProfile, YoyoParams, simulate_arrays


def measurements(n, seed):
    T = 0.04
    _, vx, vz = simulate_arrays(
        YoyoParams(2.0, 0.2), WalkProfile.constant(2.5, n * T), T, n * T + T / 2, 0.02, seed
    )
    return np.column_stack([vx[:n], vz[:n]]) * T


def time_kernel(name, z):
    kernel = kernels.kernel_from_configs(default_config(), ParamFilterConfig(), name)
    push = kernel.push
    rows = z.tolist()
    start = time.perf_counter()
    for zx, zz in rows:
        push(zx, zz)
    stream = (time.perf_counter() - start) / len(rows)
    kernel = kernels.kernel_from_configs(default_config(), ParamFilterConfig(), name)
    start = time.perf_counter()
    out = kernel.run(z)
    batch = (time.perf_counter() - start) / len(rows)
    return stream, batch, out


def time_reference(z):
    ekf, params = default_config(), ParamFilterConfig()
    x, P = ekf.x0, ekf.P0
    tracker = ParamTracker.initial(params)
    rows = []
    start = time.perf_counter()
    for zk in z:
        x, P, _ = step(x, P, zk, ekf)
        tracker = update_params(tracker, x, params)
        rows.append((*x, tracker.R_hat, tracker.r_hat))
    return (time.perf_counter() - start) / len(z), np.array(rows)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    z = measurements(args.iters, args.seed)
    n_ref = min(args.iters, 20_000)
    ref_time, ref_out = time_reference(z[:n_ref])

    print(f"{'impl':<9} {'samples':>8} {'stream_us':>10} {'batch_us':>9} {'speedup':>8} {'max_dev':>9}")
    print(f"{'numpy':<9} {n_ref:>8d} {ref_time * 1e6:>10.3f} {'':>9} {1.0:>8.1f} {0.0:>9.1e}")
    for name in sorted(kernels.available_backends()):
        stream, batch, out = time_kernel(name, z)
        dev = np.abs(out[:n_ref, :6] - ref_out).max()
        print(f"{name:<9} {args.iters:>8d} {stream * 1e6:>10.3f} {batch * 1e6:>9.3f} "
              f"{ref_time / stream:>8.1f} {dev:>9.1e}")


if __name__ == "__main__":
    main()
