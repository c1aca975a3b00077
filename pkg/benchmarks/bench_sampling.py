"""Throughput comparison between the compiled and pure-Python samplers.

Runs forward simulation and a likelihood-weighting query on the ten-step
glucose model with both backends, checks the outputs are bit-identical, and
prints samples/second.  The first compiled call pays the JIT warmup, so each
backend gets one small untimed run first.

Usage: python3 benchmarks/bench_sampling.py [--n 200000] [--workers 4]
"""

import argparse
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from mtbn import _kernels
from mtbn.compile import compile_model
from mtbn.model import parse_model_file
from mtbn.sample import forward_simulate, likelihood_weighting_query

FIXTURE = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "glucose_t3.json"


def time_backend(cm, backend, n, workers):
    forward_simulate(cm, 100, seed=0, backend=backend)   # warmup
    t0 = time.perf_counter()
    sim = forward_simulate(cm, n, seed=42, workers=workers, backend=backend)
    t_fwd = time.perf_counter() - t0

    ev = {"DM@1": "yes", "G@1": "high"}
    likelihood_weighting_query(cm, ("G@3", "high"), ev, n=100, seed=0,
                               backend=backend)
    t0 = time.perf_counter()
    lw = likelihood_weighting_query(cm, ("G@3", "high"), ev, n=n, seed=42,
                                    workers=workers, backend=backend)
    t_lw = time.perf_counter() - t0
    return sim, t_fwd, lw, t_lw


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    cm = compile_model(parse_model_file(str(FIXTURE)))
    print(f"model: {FIXTURE.name}, {cm.n_instances} instances, "
          f"n={args.n}, workers={args.workers}\n")

    results = {}
    backends = ["python"] + (["numba"] if _kernels.HAS_NUMBA else [])
    for backend in backends:
        sim, t_fwd, lw, t_lw = time_backend(cm, backend, args.n, args.workers)
        results[backend] = (sim, lw)
        print(f"{backend:>7}: forward {args.n / t_fwd:>12,.0f} samples/s "
              f"({t_fwd:.3f}s)   lw {args.n / t_lw:>12,.0f} samples/s "
              f"({t_lw:.3f}s)")

    if len(results) == 2:
        sim_p, lw_p = results["python"]
        sim_n, lw_n = results["numba"]
        assert np.array_equal(sim_p.values, sim_n.values), "forward draws diverged"
        assert lw_p.estimate == lw_n.estimate, "lw estimates diverged"
        assert lw_p.weight_sum == lw_n.weight_sum, "lw weights diverged"
        print("\nbackends produced bit-identical draws, estimates, and weights")
    else:
        print("\nnumba not importable; only the pure-Python backend was timed")


if __name__ == "__main__":
    main()
