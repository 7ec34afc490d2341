"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 3] [--N 16384] [--json]

Times the linearizer recursion, the circle-map displacement loop and the
Blaschke orbit on each available backend and reports the speedup.
"""

import argparse
import json
import time

import numpy as np

from siegel import kernels
from siegel.arithmetic import GOLDEN
from siegel.linearizer import _divisors


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(N, n_circle):
    div = _divisors(GOLDEN, N)
    return {
        # sigma near the radius keeps every coefficient in range, so the loop runs to N
        f"recurse N={N}": lambda m: m.recurse(div, 0.32),
        f"circle_displacements n={n_circle}":
            lambda m: m.circle_displacements(kernels.BLASCHKE, 4.0, 0.6151732159527992, 0.0, n_circle),
        f"blaschke_orbit n={n_circle}":
            lambda m: m.blaschke_orbit(4.0, 0.6151732159527992, 1.0 + 0j, n_circle),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--N", type=int, default=16384)
    parser.add_argument("--circle", type=int, default=2 ** 18)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    backends = kernels.backends()
    results = []
    for name, fn in cases(args.N, args.circle).items():
        row = {"case": name}
        outputs = {}
        for label, mod in backends.items():
            row[label], outputs[label] = best_of(lambda: fn(mod), args.repeat)
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
            a, b = outputs["python"], outputs["cython"]
            a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
            row["max_abs_diff"] = float(np.max(np.abs(a - b)))
        results.append(row)

    if args.json:
        print(json.dumps(results, indent=2))
        return
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'case':36s} {'python':>10s} {'cython':>10s} {'speedup':>8s} {'max diff':>10s}")
    for r in results:
        cy = f"{r['cython']:10.4f}" if "cython" in r else f"{'-':>10s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8s}"
        md = f"{r['max_abs_diff']:10.1e}" if "max_abs_diff" in r else f"{'-':>10s}"
        print(f"{r['case']:36s} {r['python']:10.4f} {cy} {sp} {md}")


if __name__ == "__main__":
    main()
