"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the environment switch is not
needed. Results are also checked for agreement.
"""
import argparse
import timeit

import numpy as np

from indefpencil._kernels import _fallback

try:
    from indefpencil._kernels import _core
except ImportError:
    _core = None


def cases(rng):
    n = 40
    d = rng.standard_normal(n)
    e = rng.standard_normal(n - 1)
    ts = np.geomspace(1.5, 1e8, 40)
    hi = (0.5 * np.pi) ** 2 - 1e-9
    return {
        "tridiag_eigvalsh(n=40)": lambda m: m.tridiag_eigvalsh(d, e),
        "sturm_count x200": lambda m: [m.sturm_count(d, e, x) for x in np.linspace(-4, 4, 200)],
        "matching_residual x10k": lambda m: [m.matching_residual(0.1 + 2e-4 * i, 7.0) for i in range(10000)],
        "shooting_bisect x40": lambda m: [m.shooting_bisect(t, 1e-6, hi, 1e-15) for t in ts],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'python [ms]':>12}{'compiled [ms]':>15}{'speed-up':>10}")
    for name, fn in cases(rng).items():
        tp = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:<26}{tp:12.3f}{'-':>15}{'-':>10}")
            continue
        tc = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        a, b = np.asarray(fn(_fallback), float), np.asarray(fn(_core), float)
        agree = np.allclose(a, b, rtol=1e-12, atol=1e-12)
        print(f"{name:<26}{tp:12.3f}{tc:15.3f}{tp / tc:9.1f}x" + ("" if agree else "  MISMATCH"))


if __name__ == "__main__":
    main()
