"""Compare the compiled trajectory kernels against the numpy reference.

Both backends live in the same process (the compiled extension is imported
directly, bypassing the OCOBENCH_PURE switch), so the comparison uses one
shared set of inputs. Prints best-of-repeat wall times and the speedup.

Usage: python3 benchmarks/bench_kernels.py [--n N] [--d D] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from ocobench import _kernels_py as pure

try:
    from ocobench import _kernels as compiled
except ImportError:
    compiled = None


def _cases(n, d, rng):
    G = rng.standard_normal((n, d))
    theta0 = np.zeros(d)
    ck = np.empty(0, dtype=np.int64)
    scale = np.full(d, 0.05)
    hw = np.ones(d)
    M = np.diag(rng.uniform(0.5, 2.0, size=d))
    return [
        ("run_diag (no projection)",
         lambda k: k.run_diag(G, theta0, scale, 0, 0.0, None, ck)),
        ("run_diag (box projection)",
         lambda k: k.run_diag(G, theta0, scale, 2, 0.0, hw, ck)),
        ("run_adagrad (box projection)",
         lambda k: k.run_adagrad(G, theta0, 1.0, 1e-12, 2, 0.0, hw, ck)),
        ("run_full (l2 projection)",
         lambda k: k.run_full(G, theta0, M, 1, 1.0, None, ck)),
        ("run_pnorm_md",
         lambda k: k.run_pnorm_md(G, theta0, 1.2, 0.05, ck)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="horizon")
    ap.add_argument("--d", type=int, default=64, help="dimension")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats")
    args = ap.parse_args()

    if compiled is None:
        print("compiled extension not available; nothing to compare")
        return

    rng = np.random.default_rng(0)
    print(f"n={args.n} d={args.d} (best of {args.repeat})")
    print(f"{'kernel':<30} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for name, call in _cases(args.n, args.d, rng):
        # warm up and cross check before timing
        dp, sp, fp = call(pure)
        dc, sc, fc = call(compiled)
        np.testing.assert_allclose(dc, dp, atol=1e-9)
        np.testing.assert_allclose(fc, fp, atol=1e-9)
        tp = min(timeit.repeat(lambda: call(pure), number=1,
                               repeat=args.repeat))
        tc = min(timeit.repeat(lambda: call(compiled), number=1,
                               repeat=args.repeat))
        print(f"{name:<30} {tp:>10.4f} {tc:>13.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
