"""Compare the compiled kernels with the numpy fallback.

Micro-benchmarks call both kernel modules directly; the end-to-end timing
runs one benchmark case in a subprocess per backend (the backend is fixed at
import time through ``SHELLBAR_PURE_PYTHON``).

    python3 bench/bench_kernels.py [--case scordelis --mesh 8 --repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from shellbar import _kernels_py, splines
from shellbar.benchmarks import get_case
from shellbar.model import refine

try:
    from shellbar import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _micro(repeat: int) -> list[tuple[str, float, float | None]]:
    model = refine(get_case("hemisphere").model, 2, 4)
    kv = model.xi
    span = splines.find_span(kv, 0.37)
    idx, R, dR = splines.rational_surface_basis(model.basis, 0.37, 0.61)
    dR = np.ascontiguousarray(dR)
    X = np.ascontiguousarray(model.net.flat_points()[idx])
    N = np.ascontiguousarray(model.flat_directors()[idx])
    rng = np.random.default_rng(0)
    B, C = rng.normal(size=(2, 6, 6 * len(idx)))
    D = rng.normal(size=(6, 6))
    K = np.zeros((6 * len(idx), 6 * len(idx)))

    calls = {
        "basis_funs_ders": lambda m: m.basis_funs_ders(kv.knots, kv.degree, span, 0.37, 1),
        "shell_strain_operator": lambda m: m.shell_strain_operator(R, dR, X, N, 0.01),
        "add_btdc": lambda m: m.add_btdc(K, B, D, C, 0.5),
    }
    rows = []
    for name, fn in calls.items():
        n = 2000
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=n, repeat=repeat)) / n
        cy = None
        if _compiled is not None:
            cy = min(timeit.repeat(lambda: fn(_compiled), number=n, repeat=repeat)) / n
        rows.append((name, py, cy))
    return rows


_END_TO_END = """
import json, time, sys
from shellbar import BACKEND, get_case, run_case
case, mesh = sys.argv[1], int(sys.argv[2])
run_case(get_case(case), "glb", 2, 2)
t = time.perf_counter()
r = run_case(get_case(case), "glb", 2, mesh)
print(json.dumps({"backend": BACKEND, "seconds": time.perf_counter() - t, "monitor": r.monitor}))
"""


def _end_to_end(case: str, mesh: int, pure: bool) -> dict:
    env = dict(os.environ, SHELLBAR_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run(
        [sys.executable, "-c", _END_TO_END, case, str(mesh)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", default="scordelis")
    ap.add_argument("--mesh", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':<24}{'numpy [us]':>12}{'cython [us]':>13}{'speedup':>9}")
    for name, py, cy in _micro(args.repeat):
        if cy is None:
            print(f"{name:<24}{py * 1e6:>12.2f}{'n/a':>13}{'':>9}")
        else:
            print(f"{name:<24}{py * 1e6:>12.2f}{cy * 1e6:>13.2f}{py / cy:>8.1f}x")

    print(f"\nend to end: {args.case} glb p=2 mesh {args.mesh}")
    runs = [_end_to_end(args.case, args.mesh, pure) for pure in (True, False)]
    for r in runs:
        print(f"  {r['backend']:<8}{r['seconds']:8.3f} s   monitor {r['monitor']:.10e}")
    if runs[0]["backend"] != runs[1]["backend"]:
        print(f"  speedup {runs[0]['seconds'] / runs[1]['seconds']:.1f}x, "
              f"monitor difference {abs(runs[0]['monitor'] - runs[1]['monitor']):.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
