"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints per-call timings for each hot kernel and the speed-up of the compiled
core.  Both backends are also checked to return identical values.
"""
import argparse
import timeit

import numpy as np

from vpwave import kernels
from vpwave.specfun import KummerPolynomial


def workloads():
    rng = np.random.default_rng(0)
    j0_small = rng.uniform(0.0, 25.0, 60)
    j0_large = rng.uniform(0.0, 50.0, 2000)
    poly = KummerPolynomial.of_order(10).split_coefficients
    kx = rng.uniform(0.0, 30.0, 2000)
    lams = np.linspace(0.25, 8.0, 32)
    return {
        "j0 (60 pts, one fit evaluation)": lambda b: b.j0(j0_small),
        "j0 (2000 pts)": lambda b: b.j0(j0_large),
        "kummer m=10 (2000 pts)": lambda b: b.poly_dd(poly[0], poly[1], kx),
        "shoot (32 lanes x 2500 steps)": lambda b: b.shoot(lams, 0.5, 25.5, 2500),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy fallback is available")
    print(f"{'kernel':36s}" + "".join(f"{name:>14s}" for name in backends) + f"{'speed-up':>10s}")
    for label, call in workloads().items():
        times = {}
        outputs = {}
        for name, backend in backends.items():
            outputs[name] = call(backend)
            timer = timeit.Timer(lambda: call(backend))
            number, _ = timer.autorange()
            times[name] = min(timer.repeat(args.repeat, number)) / number
        same = len({np.asarray(o).tobytes() for o in outputs.values()}) == 1
        row = f"{label:36s}" + "".join(f"{times[n] * 1e6:12.1f}us" for n in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row + ("" if same else "  (outputs differ!)"))


if __name__ == "__main__":
    main()
