"""Time the compiled and pure-Python covering-word kernels on the same inputs.

Usage: python benchmarks/bench_kernels.py [--depth N] [--samples K]
"""

import argparse
import math
import time

import numpy as np

from overlap_lab import kernels
from overlap_lab.algebraic import AlgebraicParameter
from overlap_lab.ifs import bernoulli_convolution
from overlap_lab.measures import BernoulliWeights, sample_words


def inputs(depth, samples):
    s = bernoulli_convolution(AlgebraicParameter([-1, 0, 2], ("1/2", "1")))
    r, b, lo, hi = s.float_arrays()
    lp = np.log(np.full(2, 0.5))
    brackets = [o.bracket().to_floats(s.param) for o in sample_words(s, BernoulliWeights.uniform(2), depth, samples, seed=1)]
    return [(r, b, lo, hi, a, c, 1e-13, depth, lp, math.log(0.5), math.inf) for a, c in brackets]


def bench(fn, cases):
    t0 = time.perf_counter()
    visits = sum(fn(*c)[3] for c in cases)
    return time.perf_counter() - t0, visits


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()
    cases = inputs(args.depth, args.samples)
    print(f"depth {args.depth}, {args.samples} brackets, default backend: {kernels.BACKEND}")
    tp, vp = bench(kernels.python_cover_profile, cases)
    print(f"python  {tp:8.3f} s  {vp / tp:12.0f} nodes/s")
    if kernels.compiled_cover_profile is None:
        print("cython  (extension not built)")
        return
    tc, vc = bench(kernels.compiled_cover_profile, cases)
    assert vc == vp
    print(f"cython  {tc:8.3f} s  {vc / tc:12.0f} nodes/s  speedup {tp / tc:.1f}x")


if __name__ == "__main__":
    main()
