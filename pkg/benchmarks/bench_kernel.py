"""Time the compiled and pure-Python fusion kernels on the same batch.

    python benchmarks/bench_kernel.py [--n 100000] [--k 7] [--repeat 3]

Also checks that both kernels return bit-identical arrays.
"""

import argparse
import time

import numpy as np

from evfusion import _kernel_py

try:
    from evfusion import _kernel
except ImportError:
    _kernel = None


def make_batch(n, k, seed=0):
    rng = np.random.default_rng(seed)
    logits = rng.normal(rng.uniform(-3, 3, (n, 3, 1)), 1.5, (n, 3, k))
    present = (rng.random((n, 3)) < 0.8).astype(np.uint8)
    present[:, 0] = 1
    return logits, present


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    logits, present = make_batch(args.n, args.k)
    rows = []
    for name, mod in (("compiled", _kernel), ("python", _kernel_py)):
        if mod is None:
            print(f"{name:>9}: not built")
            continue
        for mode in ("advanced", "basic"):
            t, out = best_of(lambda: mod.fuse_batch(logits, present, mode == "advanced"), args.repeat)
            rows.append((name, mode, t, out))
            print(f"{name:>9} {mode:>8}: {t:8.4f} s  ({args.n / t:,.0f} records/s)")

    by_mode = {}
    for name, mode, t, out in rows:
        by_mode.setdefault(mode, []).append((name, t, out))
    for mode, entries in by_mode.items():
        if len(entries) == 2:
            (_, tc, a), (_, tp, b) = entries
            same = all(np.array_equal(a[key], b[key], equal_nan=True) for key in a)
            print(f"{mode}: speedup {tp / tc:.0f}x, outputs bit-identical: {same}")


if __name__ == "__main__":
    main()
