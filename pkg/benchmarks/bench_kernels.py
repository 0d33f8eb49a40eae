"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--scale 1.0] [--repeat 5] [--threads N]

Each row reports the best wall time per backend and the speedup.  Results of the
two backends are compared before timing.
"""
import argparse
import timeit

import numpy as np

from commonfix import kernels


def cases(scale, rng):
    n = max(int(1000 * scale), 10)
    pairs = max(int(200_000 * scale), 100)
    X = rng.uniform(-1, 1, (n, 2))
    TX = 0.5 * X
    I = rng.integers(0, n, pairs)
    J = rng.integers(0, n, pairs)
    x = X[:, 0]
    lo, hi = np.zeros(n), np.abs(x) / 5
    A = rng.uniform(-1, 1, (max(int(3000 * scale), 10), 2))
    B = rng.uniform(-1, 1, (max(int(3000 * scale), 10), 2))
    C = rng.uniform(-1, 1, (max(int(20_000 * scale), 10), 2))
    tail = rng.uniform(-1, 1, (64, 2))
    return [
        ("row_norms p=3", "row_norms", (rng.uniform(-1, 1, (pairs, 2)), 3.0)),
        ("pair_terms_single p=2", "pair_terms_single", (X, TX, I, J, 2.0)),
        ("pair_terms_interval", "pair_terms_interval", (x, lo, hi, I, J)),
        ("directed_hausdorff p=inf", "directed_hausdorff", (A, B, np.inf)),
        ("tail_max_distance p=1", "tail_max_distance", (C, tail, 1.0)),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats (best is reported)")
    ap.add_argument("--threads", type=int, default=None, help="numba threads")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    kernels.set_threads(args.threads)
    impls = kernels.backends()
    if "numba" not in impls:
        print("numba backend unavailable (COMMONFIX_DISABLE_NUMBA set or numba missing); timing numpy only")
    rng = np.random.default_rng(args.seed)
    names = list(impls)
    print(f"{'kernel':<26}" + "".join(f"{n + ' [ms]':>14}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn, inputs in cases(args.scale, rng):
        results, times = {}, {}
        for name, mod in impls.items():
            f = getattr(mod, fn)
            results[name] = f(*inputs)  # warm-up and JIT compile
            times[name] = min(timeit.repeat(lambda: f(*inputs), number=1, repeat=args.repeat)) * 1e3
        if len(names) > 1 and not _same(results["numpy"], results["numba"]):
            raise SystemExit(f"backend mismatch on {label}")
        row = f"{label:<26}" + "".join(f"{times[n]:>14.3f}" for n in names)
        if len(names) > 1:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
