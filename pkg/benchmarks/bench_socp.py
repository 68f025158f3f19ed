"""Compare the compiled and numpy cone-solver kernels.

Two workloads: random strictly feasible conic programs of varying size, and
the guessing program on honest statistics from random ternary measurements.
For each kernel the script reports the mean time per solve and, against the
other kernel, the worst relative difference in optimal value.

    python benchmarks/bench_socp.py --problems 200 --seed 1
"""

import argparse
import math
import time

import numpy as np

from qbound.certify import OverlapScenario, close_ternary, honest_statistics
from qbound.errors import InfeasibleError, QboundError
from qbound.sdp import solve_guessing
from qbound.socp import available_backends, solve_socp


def interior_point(rng):
    v = rng.normal(size=3)
    v[0] = np.linalg.norm(v[1:]) + rng.uniform(0.1, 2.0)
    return v


def random_programs(rng, count):
    out = []
    for _ in range(count):
        q = int(rng.integers(2, 12))
        m = int(rng.integers(1, 3 * q - 1))
        A = rng.normal(size=(m, 3 * q))
        x0 = np.concatenate([interior_point(rng) for _ in range(q)])
        s0 = np.concatenate([interior_point(rng) for _ in range(q)])
        out.append((A, A @ x0, A.T @ rng.normal(size=m) + s0))
    return out


def guessing_cases(rng, count):
    out = []
    while len(out) < count:
        try:
            params = close_ternary(*rng.uniform(-math.pi, math.pi, 2), rng.uniform(0, 2))
        except InfeasibleError:
            continue
        s = OverlapScenario(float(rng.uniform(0.05, 0.99)))
        out.append((honest_statistics(params, s), s.xz))
    return out


def run(label, cases, solve, backends):
    times, values = {}, {}
    for be in backends:
        vals = []
        start = time.perf_counter()
        for case in cases:
            try:
                vals.append(solve(case, be))
            except QboundError:
                vals.append(np.nan)
        times[be] = (time.perf_counter() - start) / len(cases)
        values[be] = np.array(vals)
    print(f"\n{label} ({len(cases)} problems)")
    for be in backends:
        print(f"  {be:>7}: {times[be] * 1e3:8.3f} ms per solve")
    if len(backends) == 2:
        a, b = (values[be] for be in backends)
        rel = np.abs(a - b) / np.maximum(1.0, np.abs(a))
        print(f"  speedup {times['python'] / times['cython']:.1f}x, worst relative difference {np.nanmax(rel):.1e}")
        print(f"  disagreements in failure status: {int(np.sum(np.isnan(a) != np.isnan(b)))}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--problems", type=int, default=200)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; timing the numpy kernel only")
    rng = np.random.default_rng(args.seed)
    run(
        "random conic programs",
        random_programs(rng, args.problems),
        lambda case, be: solve_socp(*case, backend=be).primal,
        backends,
    )
    run(
        "guessing program",
        guessing_cases(rng, args.problems),
        lambda case, be: solve_guessing(case[0], case[1], backend=be).p_guess,
        backends,
    )


if __name__ == "__main__":
    main()
