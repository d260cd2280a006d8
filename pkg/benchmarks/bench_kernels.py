"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--n 512] [--repeat 5]

The per-kernel table times each cellwise kernel on an n x n mesh.  The
end-to-end rows run one descent per backend in a subprocess (the backend
is chosen at import) to show how much of a run the kernels account for.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from l0topo import _kernels_py as py
from l0topo.mesh import build_mesh

try:
    from l0topo import _ckernels as cx
except ImportError:
    cx = None

END_TO_END = """
import time
from l0topo import DescentConfig, assemble, build_mesh, preset, run_descent
from l0topo.kernels import BACKEND
spec = preset("l0_elliptic")
t0 = time.perf_counter()
mesh = build_mesh(1, 1, {n})
ops = assemble(mesh, spec.pde)
res = run_descent(spec, ops, DescentConfig())
print(BACKEND, time.perf_counter() - t0, res.J)
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_table(n, repeat):
    mesh = build_mesh(1, 1, n)
    rng = np.random.default_rng(0)
    p = rng.standard_normal(mesh.n_cells) * 0.05
    beta = np.full(mesh.n_cells, 0.01)
    mask = rng.random(mesh.n_cells) < 0.5
    u = py.pointwise_minimizer(p, 0.01, -4.0, 4.0)
    calls = {
        "p1_triplets": lambda m: m.p1_triplets(mesh.nodes, mesh.cells),
        "hbar": lambda m: m.hbar(p, py.QUADRATIC_BOX, 0.01, -4.0, 4.0),
        "topo_derivative": lambda m: m.topo_derivative(p, mask, beta, py.QUADRATIC_BOX,
                                                       0.01, -4.0, 4.0),
        "box_residual": lambda m: m.box_residual(u, p, mask, 0.01, -4.0, 4.0),
    }
    print(f"cellwise kernels, n={n} ({mesh.n_cells} cells), best of {repeat}")
    print(f"{'kernel':<16} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for name, call in calls.items():
        tp = best(lambda: call(py), repeat) * 1e3
        if cx is None:
            print(f"{name:<16} {tp:10.3f} {'n/a':>12} {'':>8}")
            continue
        tc = best(lambda: call(cx), repeat) * 1e3
        print(f"{name:<16} {tp:10.3f} {tc:12.3f} {tp / tc:8.2f}")


def end_to_end(n):
    print(f"\nend-to-end descent, l0_elliptic, n={n}")
    for flag in ("1", "0"):
        env = dict(os.environ, L0TOPO_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"{out[0]:<10} {float(out[1]):8.3f} s  J={float(out[2]):.12g}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--descent-n", type=int, default=128)
    args = ap.parse_args()
    kernel_table(args.n, args.repeat)
    end_to_end(args.descent_n)


if __name__ == "__main__":
    main()
