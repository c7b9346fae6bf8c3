#!/usr/bin/env python3
"""Benchmark the two tape-evaluation backends (numba kernel vs pure numpy)
and the tree-walk baseline on expressions of realistic sizes.

The workload mirrors what the zero test does internally: compile an
expression DAG once, then evaluate it over a batch of sample points.
Typical hot expressions are curvature-tensor entries (hundreds to a few
thousand tape nodes) evaluated at 20-100 points per query.

Run:  python benchmarks/bench_eval.py [--samples 20] [--repeat 200]
"""

import argparse
import random
import time
from fractions import Fraction

import numpy as np

from homogeo import expr as ex
from homogeo import numtape
from homogeo.chart import Chart
from homogeo.metric import riemann
from homogeo.tensors import SymTensor2


def build_curvature_entry():
    """A genuinely hot expression: a curvature entry of a trig metric."""
    chart = Chart("s", ("th", "ph"), (ex.Constraint("th", ">", Fraction(1, 10)),
                                      ex.Constraint("th", "<", 3)))
    th = ex.var("th")
    f = ex.add(ex.rat(4), ex.pw(ex.sin_(th), 2))
    g = SymTensor2(chart, ((f, ex.ONE),
                           (ex.ONE, ex.mul(ex.rat(4), ex.pw(ex.sin_(th), 2)))))
    R = riemann(g)
    entry = R[0][1][0][1]
    return entry


def build_deep_random(depth=9, seed=1):
    rng = random.Random(seed)
    names = ("th", "ph")

    def rec(d):
        if d == 0 or rng.random() < 0.2:
            return ex.var(rng.choice(names)) if rng.random() < 0.6 \
                else ex.rat(Fraction(rng.randint(-8, 8), rng.randint(1, 6)))
        op = rng.choice(["add", "mul", "sin", "cos", "pow"])
        a = rec(d - 1)
        if op == "add":
            return ex.add(a, rec(d - 1))
        if op == "mul":
            return ex.mul(a, rec(d - 1))
        if op == "pow":
            return ex.pw(a, rng.choice([2, 3]))
        return (ex.sin_ if op == "sin" else ex.cos_)(a)

    # anchor both variables so canonicalization cannot fold the whole tree
    return ex.add(rec(depth), ex.mul(ex.var("th"), rec(depth - 1)),
                  ex.mul(ex.var("ph"), rec(depth - 1)))


def bench(entry_name, e, samples, repeat):
    names = sorted(e.free) or ["th"]
    tape = numtape.compile_tape(e, names)
    rng = np.random.default_rng(0)
    values = np.ascontiguousarray(0.2 + rng.random((len(names), samples)) * 2.0)

    results = {}
    if numtape.NUMBA_ENABLED:
        numtape.eval_tape(tape, values, backend="numba")  # compile once
        t0 = time.perf_counter()
        for _ in range(repeat):
            out_nb = numtape.eval_tape(tape, values, backend="numba")
        results["numba"] = (time.perf_counter() - t0) / repeat
    t0 = time.perf_counter()
    for _ in range(repeat):
        out_np = numtape.eval_tape(tape, values, backend="numpy")
    results["numpy"] = (time.perf_counter() - t0) / repeat

    tree_repeat = max(1, repeat // 20)
    t0 = time.perf_counter()
    for _ in range(tree_repeat):
        for s in range(samples):
            ex.eval_float(e, {n: values[i, s] for i, n in enumerate(names)})
    results["tree walk"] = (time.perf_counter() - t0) / tree_repeat

    if numtape.NUMBA_ENABLED:
        assert np.allclose(out_nb, out_np, rtol=1e-12, atol=1e-12, equal_nan=True)

    print(f"\n{entry_name}: {len(tape)} tape nodes, {samples} samples")
    base = results.get("numba", results["numpy"])
    for k, v in results.items():
        rel = v / base
        print(f"  {k:10s} {v * 1e6:10.1f} us/batch   ({rel:5.1f}x)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    print("backend available:", "numba" if numtape.NUMBA_ENABLED else
          "numpy only (HOMOGEO_NO_NUMBA set or numba missing)")
    bench("curvature entry", build_curvature_entry(), args.samples, args.repeat)
    bench("deep random expression", build_deep_random(), args.samples, args.repeat)
    big = ex.add(*[ex.mul(build_deep_random(seed=s), build_deep_random(seed=s + 50))
                   for s in range(6)])
    bench("wide sum of products", big, args.samples, args.repeat)


if __name__ == "__main__":
    main()
