"""Benchmark the compiled ML-detection kernel against the numpy fallback.

The nearest-signature search is the inner loop of the bit-error-rate
experiments (symbols x candidates x antennas at tiny dimensions), so the
compiled path pays off through fused loops rather than BLAS.  Run with

    python benchmarks/bench_detect.py
"""

import time

import numpy as np

from secbeam.detect import ml_argmin_compiled, ml_argmin_numpy

try:
    ml_argmin_compiled(np.zeros((1, 1), complex), np.zeros((1, 1), complex))
    HAVE_COMPILED = True
except RuntimeError:
    HAVE_COMPILED = False


def timeit(fn, *args, repeat=7):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    cases = [
        ("per-trial batch", 10, 8, 4),
        ("large batch", 5000, 8, 4),
        ("wide lattice", 2000, 64, 4),
        ("more antennas", 2000, 16, 8),
    ]
    print(f"{'case':<16} {'symbols':>8} {'cands':>6} {'dim':>4} "
          f"{'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, n_sym, n_cand, dim in cases:
        y = rng.standard_normal((n_sym, dim)) + 1j * rng.standard_normal((n_sym, dim))
        s = rng.standard_normal((n_cand, dim)) + 1j * rng.standard_normal((n_cand, dim))
        t_np = timeit(ml_argmin_numpy, y, s)
        if HAVE_COMPILED:
            assert np.array_equal(ml_argmin_numpy(y, s), ml_argmin_compiled(y, s))
            t_cy = timeit(ml_argmin_compiled, y, s)
            print(f"{name:<16} {n_sym:>8} {n_cand:>6} {dim:>4} "
                  f"{t_np * 1e6:>8.1f}us {t_cy * 1e6:>8.1f}us {t_np / t_cy:>7.1f}x")
        else:
            print(f"{name:<16} {n_sym:>8} {n_cand:>6} {dim:>4} "
                  f"{t_np * 1e6:>8.1f}us {'n/a':>10} {'n/a':>8}")
    if not HAVE_COMPILED:
        print("\ncompiled kernel not built; showing numpy fallback only")


if __name__ == "__main__":
    main()
