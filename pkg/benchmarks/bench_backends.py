"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--repeat 3]

Both backends run the same Nelder-Mead searches from the same starts; the
script reports wall time per backend and the largest disagreement in the
optimized values.
"""

import argparse
import time

import numpy as np

from bellspec import _fallback
from bellspec.bell_operator import mk_coefficients
from bellspec.violation import psi_family, table1_states

try:
    from bellspec import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    for n, restarts in ((3, 8), (4, 4), (5, 2)):
        T = np.ascontiguousarray(psi_family(n, 0.3).correlation_tensor().ravel())
        beta = np.ascontiguousarray(mk_coefficients(n).beta.ravel())
        starts = np.ascontiguousarray(rng.uniform(0, np.pi, (restarts, 4 * n)))
        yield f"expectation n={n} x{restarts}", 0, starts, T, beta, n
    T = np.ascontiguousarray(table1_states()["w"].correlation_tensor().ravel())
    for mode, name in ((1, "upper"), (2, "lower")):
        starts = np.ascontiguousarray(rng.uniform(0, np.pi, (8, 9)))
        yield f"bound {name} n=3 x8", mode, starts, T, None, 3


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'case':28s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max |dv|':>10s}")
    for label, mode, starts, T, beta, n in cases(rng):
        tp, rp = best_time(lambda: _fallback.multistart(mode, starts, T, beta, n), args.repeat)
        if _kernels is None:
            print(f"{label:28s} {tp:11.4f}")
            continue
        tc, rc = best_time(lambda: _kernels.multistart(mode, starts, T, beta, n), args.repeat)
        dv = float(np.max(np.abs(rp[0] - rc[0])))
        print(f"{label:28s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f} {dv:10.2e}")


if __name__ == "__main__":
    main()
