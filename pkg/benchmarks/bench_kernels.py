"""Time the numba kernels against the numpy fallback.

Each backend runs in its own subprocess because the choice is made at
import time from MOSCI_DISABLE_NUMBA. Workloads mirror one full study:
20,200 samples for the beta-quantile estimators and 20,200 rows of
1000 bootstrap replicates for the BCa bounds.

    python benchmarks/bench_kernels.py [--repeat 3] [--cells 20200]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from mosci import kernels
from mosci.estimators import clopper_pearson_bounds, jeffreys_bounds
from mosci.bootstrap import jackknife_acceleration

cells, repeat = int(sys.argv[1]), int(sys.argv[2])
gen = np.random.default_rng(0)
p = gen.uniform(0, 1, cells)
counts = np.stack([gen.multinomial(20, [(1 - q) ** 4, 4 * q * (1 - q) ** 3, 6 * q * q * (1 - q) ** 2,
                                        4 * q ** 3 * (1 - q), q ** 4]) for q in p])
theta = (counts @ np.arange(1, 6)) / 20
reps = np.sort(theta[:, None] + gen.normal(0, 0.15, (cells, 1000)), axis=1)
accel = jackknife_acceleration(counts)
q = gen.uniform(0.001, 0.999, cells)
a = gen.uniform(0.5, 80, cells)
b = gen.uniform(0.5, 80, cells)

work = {
    "clopper_pearson_bounds": lambda: clopper_pearson_bounds(counts),
    "jeffreys_bounds": lambda: jeffreys_bounds(counts),
    "betaincinv (all distinct)": lambda: kernels.betaincinv(q, a, b),
    "bca_bounds": lambda: kernels.bca_bounds(reps, theta, accel, 0.05),
}
out = {"backend": kernels.BACKEND, "times": {}}
for name, fn in work.items():
    fn()  # warm-up, includes JIT compilation or cache load
    samples = []
    for _ in range(repeat):
        t = time.perf_counter(); fn(); samples.append(time.perf_counter() - t)
    out["times"][name] = min(samples)
print(json.dumps(out))
"""


def run_backend(disable: bool, cells: int, repeat: int) -> dict:
    env = dict(os.environ, MOSCI_DISABLE_NUMBA="1" if disable else "")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(cells), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=20200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    fast = run_backend(False, args.cells, args.repeat)
    slow = run_backend(True, args.cells, args.repeat)
    print(f"{args.cells} cells, best of {args.repeat}")
    print(f"{'kernel':28s}{fast['backend']:>10s}{slow['backend']:>10s}{'speedup':>10s}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:28s}{t_fast:9.3f}s{t_slow:9.3f}s{t_slow / t_fast:9.1f}x")


if __name__ == "__main__":
    main()
