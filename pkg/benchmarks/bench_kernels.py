"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times LHV enumeration and the Jacobi eigensolver on both backends and
checks that they agree.
"""

import argparse
import time

import numpy as np

from bellbound import _pykernels

try:
    from bellbound import _ckernels
except ImportError:
    _ckernels = None

LHV_CASES = [((2, 2, 2, 2), "CHSH-size"), ((3, 3, 3, 2, 2, 2), "3 parties, 3 settings"),
             ((2, 2, 2, 2, 3, 3, 3, 3), "4 qutrit parties"), ((4, 4, 4, 2, 2, 2), "3 parties, 4 settings"),
             ((4, 4, 4, 3, 3, 3), "3 qutrit parties, 4 settings")]
EIG_SIZES = [8, 32, 64, 128]


def best_time(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_lhv(mod, shape, repeat):
    N = len(shape) // 2
    coeffs = np.random.default_rng(0).standard_normal(shape).ravel()
    s = np.array(shape[:N], dtype=np.int_)
    d = np.array(shape[N:], dtype=np.int_)
    return best_time(lambda: mod.lhv_extrema(coeffs, s, d)[:2], repeat)


def bench_eig(mod, n, repeat):
    rng = np.random.default_rng(n)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = g + g.conj().T
    ar, ai = np.ascontiguousarray(a.real), np.ascontiguousarray(a.imag)
    return best_time(lambda: np.sort(np.asarray(mod.jacobi_eigh(ar, ai, 1e-15, 100)[0])), repeat)


def row(label, tp, tc, agree):
    speed = f"{tp / tc:7.1f}x" if tc else "    n/a"
    tc_s = f"{tc * 1e3:10.2f}" if tc else "       n/a"
    print(f"{label:<34}{tp * 1e3:10.2f}{tc_s}  {speed}  {agree}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'case':<34}{'numpy ms':>10}{'cython ms':>10}  {'speedup':>8}  agree")
    for shape, label in LHV_CASES:
        tp, vp = bench_lhv(_pykernels, shape, args.repeat)
        tc, vc = bench_lhv(_ckernels, shape, args.repeat) if _ckernels else (0.0, vp)
        row(f"lhv {label}", tp, tc, np.allclose(vp, vc, rtol=1e-12))
    for n in EIG_SIZES:
        tp, wp = bench_eig(_pykernels, n, args.repeat)
        tc, wc = bench_eig(_ckernels, n, args.repeat) if _ckernels else (0.0, wp)
        row(f"jacobi n={n}", tp, tc, np.allclose(wp, wc, atol=1e-9 * np.abs(wp).max()))


if __name__ == "__main__":
    main()
