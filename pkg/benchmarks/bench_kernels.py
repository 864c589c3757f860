"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the dispatch setting in
``mixchar.kernels`` does not matter here.  Outputs are checked for equality
before anything is timed.
"""

import argparse
import random
import timeit

from mixchar import _kernels_py

try:
    from mixchar import _kernels as _compiled
except ImportError:
    _compiled = None


def workloads(rng):
    p = 3
    a = [rng.randrange(p**20) for _ in range(400)]
    b = [rng.randrange(p**20) for _ in range(400)]
    values = [rng.randrange(-(10**12), 10**12) for _ in range(300)]
    ns = [rng.randrange(10**9) for _ in range(2000)]
    return {
        "conv_trunc_mod (400 x 400, mod 3^20)": lambda k: k.conv_trunc_mod(a, b, 400, p**20),
        "forward_differences (300 values)": lambda k: k.forward_differences(values),
        "val_p_factorial (2000 calls)": lambda k: [k.val_p_factorial(p, n) for n in ns],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; only the Python backend is available")
    rng = random.Random(0)
    print(f"{'kernel':40s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in workloads(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if _compiled is None:
            print(f"{name:40s} {t_py * 1e3:10.2f} {'-':>10s} {'-':>8s}")
            continue
        assert fn(_compiled) == fn(_kernels_py), name
        t_cy = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat))
        print(f"{name:40s} {t_py * 1e3:10.2f} {t_cy * 1e3:10.2f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
