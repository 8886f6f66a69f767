"""Time the compiled counting kernel against the pure-Python twin.

    python benchmarks/bench_kernel.py [--repeat 3]

Both kernels fill the same ``|P_N(m)|`` row; the script checks the rows agree
before reporting timings.
"""

import argparse
import time

from partition_lab import _kernel_py
from partition_lab.counting import _limb_widths

try:
    from partition_lab import _kernel
except ImportError:
    _kernel = None

CASES = [(2_000, 50), (20_000, 50), (20_000, 300), (100_000, 100), (100_000, 316)]


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernel is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    print(f"{'n_max':>8} {'m':>5} {'python_s':>10} {'cython_s':>10} {'speedup':>8}")
    for n_max, m in CASES:
        widths = _limb_widths(n_max, m)
        t_py, row_py = best_of(lambda: _kernel_py.at_most_rows(n_max, m), args.repeat)
        t_cy, row_cy = best_of(lambda: _kernel.at_most_rows(n_max, m, widths=widths), args.repeat)
        if row_py[-1] != row_cy[-1]:
            raise SystemExit(f"kernels disagree at n_max={n_max}, m={m}")
        print(f"{n_max:>8} {m:>5} {t_py:>10.3f} {t_cy:>10.3f} {t_py / t_cy:>8.1f}")


if __name__ == "__main__":
    main()
