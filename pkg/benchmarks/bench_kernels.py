"""Compare the compiled fixed-point kernel with the NumPy fallback.

Runs both kernels on identical inputs: a handful of coplanar-scenario points
(the sweep workload) and random qutrit ensembles. Reports best-of-N wall time
per solve and checks that both kernels agree.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from qsd import _dispatch
from qsd.model import Ensemble, uniform_povm
from qsd.scenarios import SWEEP_CONFIG, CoplanarScenario, coplanar_three_states


def workloads():
    for xi in (0.3, 0.8, 0.95):
        yield f"scenario xi={xi}", coplanar_three_states(CoplanarScenario(math.pi / 16, xi)), SWEEP_CONFIG
    rng = np.random.default_rng(0)
    for k in range(2):
        states = []
        for _ in range(4):
            g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            a = g @ g.conj().T
            states.append(a / np.trace(a).real)
        yield f"random qutrit M=4 #{k}", Ensemble(states, rng.dirichlet(np.ones(4))), SWEEP_CONFIG


def best_time(kernel, args, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kernel(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _dispatch.compiled_kernel is None:
        print("compiled kernel not built; only the fallback is available")
    print(f"{'workload':<26}{'iters':>7}{'python ms':>12}{'compiled ms':>13}{'speedup':>9}{'max diff':>11}")
    for name, e, cfg in workloads():
        kargs = (e.weighted_states(), uniform_povm(e.size, e.dim).elements, cfg.max_iterations, cfg.gap_tolerance, cfg.rank_cutoff)
        t_py, out_py = best_time(_dispatch.fallback_kernel, kargs, args.repeat)
        iters = out_py[2]
        if _dispatch.compiled_kernel is None:
            print(f"{name:<26}{iters:>7}{t_py * 1e3:>12.2f}{'-':>13}{'-':>9}{'-':>11}")
            continue
        t_c, out_c = best_time(_dispatch.compiled_kernel, kargs, args.repeat)
        diff = np.abs(np.asarray(out_py[0]) - np.asarray(out_c[0])).max()
        print(f"{name:<26}{iters:>7}{t_py * 1e3:>12.2f}{t_c * 1e3:>13.2f}{t_py / t_c:>8.1f}x{diff:>11.1e}")


if __name__ == "__main__":
    main()
