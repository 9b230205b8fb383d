"""Numpy vs numba timing of the hot kernels.

Times the power/interference projection and the full projected-gradient
Z-update on a 64-antenna scenario. Run from the repository root:

    python benchmarks/bench_kernels.py --repeats 200
"""
import argparse
import time

import numpy as np

from hybridcr import kernels
from hybridcr.channel import SystemConfig, build_scenario
from hybridcr.hybrid_mi import whitened_gram
from hybridcr.projections import TraceConstraintSet


def best_of(fn, repeats):
    fn()  # warm-up (triggers compilation for the numba backend)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return np.median(times), np.min(times)


def cases(backend, seed):
    s = build_scenario(SystemConfig(), seed)
    c = s.config
    cs = TraceConstraintSet(s.H_ps, c.P_max, c.I_max)
    U, d = cs.eigenbasis
    rng = np.random.default_rng(seed)
    A = 3.0 * (rng.standard_normal((c.T_s, c.L_s)) + 1j * rng.standard_normal((c.T_s, c.L_s)))
    K = whitened_gram(s)
    target = 0.1 * A
    lam = np.zeros_like(A)
    return {
        "project_s_eig": lambda: backend.project_s_eig(A, U, d, c.P_max, c.I_max),
        "inner_projected_gradient": lambda: backend.inner_projected_gradient(
            A, K, U, d, c.P_max, c.I_max, target, lam, 10.0, 1e-3, 1e-12, 200),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = {"numpy": kernels.NUMPY}
    if kernels.NUMBA is not None:
        backends["numba"] = kernels.NUMBA
    else:
        print("numba not importable; timing the numpy backend only")

    results = {}
    for name, backend in backends.items():
        for kernel, fn in cases(backend, args.seed).items():
            results[kernel, name] = best_of(fn, args.repeats)

    print(f"{'kernel':<26}{'backend':<8}{'median ms':>11}{'min ms':>10}")
    for (kernel, name), (med, best) in sorted(results.items()):
        print(f"{kernel:<26}{name:<8}{1e3 * med:>11.3f}{1e3 * best:>10.3f}")
    if "numba" in backends:
        for kernel in ("project_s_eig", "inner_projected_gradient"):
            ratio = results[kernel, "numpy"][0] / results[kernel, "numba"][0]
            print(f"{kernel}: numba speed-up x{ratio:.2f}")


if __name__ == "__main__":
    main()
