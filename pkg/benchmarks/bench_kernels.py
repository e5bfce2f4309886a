"""Compare the compiled and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Kernel timings call both implementations directly in one process.  The
end-to-end rows run the ``free-decay`` command in subprocesses, once with
``QCORR_PURE_PYTHON=1`` so that every caller sees the fallback.
"""
import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from qcorr import _pykernels
from qcorr import dynamics as dyn
from qcorr.matrixio import measured_state

try:
    from qcorr import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_rows(repeat):
    rho = measured_state().rho
    thetas = np.linspace(0, math.pi / 2, 64)
    phis = np.linspace(0, 2 * math.pi, 128, endpoint=False)
    model = dyn.EnsembleModel.from_params(dyn.PhysicsParams())
    de, dn, _ = model.nodes()
    nodes = np.ascontiguousarray(np.broadcast_to(rho, (len(de), 4, 4)), dtype=complex)

    cases = {
        "cond_entropy (1 basis)": (lambda k: k.cond_entropy(rho, 0.3, 1.2), 2000),
        "cond_entropy_grid (64x128)": (lambda k: k.cond_entropy_grid(rho, thetas, phis), 50),
        "free_evolve (4096 nodes)": (lambda k: k.free_evolve(nodes, de, dn, 2.5, 1.0), 50),
    }
    rows = []
    for name, (call, number) in cases.items():
        py = best_of(lambda: call(_pykernels), repeat, number)
        cy = best_of(lambda: call(_ckernels), repeat, number) if _ckernels else float("nan")
        rows.append((name, py, cy))
    return rows


def end_to_end(pure: bool, repeat: int) -> float:
    env = dict(os.environ)
    env.pop("QCORR_PURE_PYTHON", None)
    if pure:
        env["QCORR_PURE_PYTHON"] = "1"
    code = (
        "import time; from qcorr import cli; from qcorr.config import RunConfig\n"
        "t = time.perf_counter(); cli.cmd_free_decay(RunConfig()); print(time.perf_counter() - t)"
    )
    runs = []
    for _ in range(repeat):
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        runs.append(float(out.stdout))
    return min(runs)


def fmt(seconds: float) -> str:
    if math.isnan(seconds):
        return "n/a"
    for unit, scale in (("s", 1.0), ("ms", 1e-3), ("us", 1e-6)):
        if seconds >= scale:
            return f"{seconds / scale:8.2f} {unit}"
    return f"{seconds / 1e-9:8.2f} ns"


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled extension not built; only the numpy column is meaningful")
    rows = kernel_rows(args.repeat)
    rows.append(("free-decay, 200 points", end_to_end(True, 3), end_to_end(False, 3)))

    print(f"{'case':30s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, py, cy in rows:
        speed = py / cy if cy and not math.isnan(cy) else float("nan")
        print(f"{name:30s} {fmt(py):>12s} {fmt(cy):>12s} {speed:7.1f}x")


if __name__ == "__main__":
    main()
