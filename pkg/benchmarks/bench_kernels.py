"""Time the compiled kernels against the pure-Python fallback.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from cpeps import kernels
from cpeps.gaussian_core import derive_cf_params


def cases():
    u = np.linspace(0.0, 100.0, 20_000)
    num, den = np.array([1.0, 0.75, 0.1]), np.array([1.0, 0.25, 0.02])
    P = derive_cf_params(1.0, 8)
    idx = np.arange(P.D - 1)
    chain = (np.diag(P.A), np.diag(P.Z), P.A[idx, idx + 1], P.Z[idx, idx + 1], P.a, P.z, P.c)
    rng = np.random.default_rng(0)
    w1, w2 = rng.uniform(0.1, 5, 200_000), rng.uniform(0.1, 5, 200_000)
    return {
        "rational_eval_real": lambda k: k.rational_eval_real(num, den, u),
        "cf_truncate_array": lambda k: k.cf_truncate_array(1.0, 12, u),
        "chain_omega": lambda k: k.chain_omega(*chain, u[1:2001]),
        "log_overlap_sum": lambda k: k.log_overlap_sum(w1, w2),
        "radial_log_overlap d=3": lambda k: k.radial_log_overlap(
            num, den, 1.0, 3, 50.0, kernels.GL_NODES, kernels.GL_WEIGHTS, 1e-10, 10**6),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.backends()
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':<24}" + "".join(f"{name:>14}" for name in impls) + f"{'speedup':>10}")
    for label, fn in cases().items():
        times = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for name, mod in impls.items()}
        row = f"{label:<24}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times.values())
        if len(times) == 2:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
