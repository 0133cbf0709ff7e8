"""Compare the compiled elimination kernel with the pure-Python fallback.

Two kinds of timing:

* kernel: ``rank`` and ``rref`` on random sparse integer matrices and on the
  boundary matrices of an iterated barycentric subdivision, calling both
  kernel modules directly in this process;
* end to end: the ``corank`` command on a shipped fixture, run in
  subprocesses with and without ``CORANK_SS_PURE_PYTHON``.

Usage: ``python benchmarks/bench_kernel.py [--repeat N] [--sizes 40 80 160]``
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time
from pathlib import Path

from corank_ss import _kernel_py
from corank_ss.complex import SimplicialComplex, as_delta, barycentric_subdivide
from corank_ss.cosheaf import Cosheaf, chain_complex

try:
    from corank_ss import _kernel as _kernel_c
except ImportError:
    _kernel_c = None

ROOT = Path(__file__).resolve().parent.parent


def random_rows(rng: random.Random, n: int, density: float, lo: int = -9, hi: int = 9):
    rows = []
    for _ in range(n):
        cols, vals = [], []
        for j in range(n):
            if rng.random() < density:
                v = rng.randint(lo, hi)
                if v:
                    cols.append(j)
                    vals.append(v)
        rows.append((cols, vals))
    return rows


def boundary_rows(depth: int):
    """Rows of the top boundary matrix of a subdivided tetrahedron."""
    s = SimplicialComplex(range(4), [(0, 1, 2, 3)])
    for _ in range(depth):
        s, _ = barycentric_subdivide(s)
    cc = chain_complex(Cosheaf.constant(as_delta(s)))
    top = max(cc.degrees())
    m = cc.diff(top)
    rows = []
    for r in m.row_dicts():
        cols = sorted(r)
        rows.append((cols, [int(r[c]) for c in cols]))
    return rows, m.cols


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_kernels(sizes, repeat: int) -> list[tuple[str, float, float | None]]:
    rng = random.Random(2024)
    cases = []
    for n in sizes:
        cases.append((f"random {n}x{n} d=0.3", random_rows(rng, n, 0.3), n))
        cases.append((f"random {n}x{n} d=0.05", random_rows(rng, n, 0.05), n))
    for depth in (1, 2):
        rows, ncols = boundary_rows(depth)
        cases.append((f"sd^{depth} tetrahedron {len(rows)}x{ncols}", rows, ncols))
    out = []
    for label, rows, ncols in cases:
        for op in ("rank", "rref"):
            tp = best_of(lambda: getattr(_kernel_py, op)(rows, ncols), repeat)
            tc = best_of(lambda: getattr(_kernel_c, op)(rows, ncols), repeat) if _kernel_c else None
            out.append((f"{op:4} {label}", tp, tc))
    return out


def bench_cli(fixture: str, repeat: int) -> tuple[float, float]:
    cmd = [sys.executable, "-m", "corank_ss.cli", "corank", str(ROOT / "fixtures" / fixture)]
    times = []
    for pure in ("1", "0"):
        env = dict(os.environ, CORANK_SS_PURE_PYTHON=pure)
        times.append(best_of(lambda: subprocess.run(cmd, env=env, check=True, capture_output=True), repeat))
    return times[0], times[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 80, 160])
    ap.add_argument("--fixture", default="mixed_siegel.json")
    args = ap.parse_args(argv)

    if _kernel_c is None:
        print("compiled kernel not built; only the Python timings are shown")
    print(f"{'case':44} {'python':>10} {'cython':>10} {'speedup':>8}")
    for label, tp, tc in bench_kernels(args.sizes, args.repeat):
        if tc is None:
            print(f"{label:44} {tp * 1e3:9.2f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{label:44} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms {tp / tc:7.1f}x")
    tp, tc = bench_cli(args.fixture, args.repeat)
    print(f"{'cli corank ' + args.fixture:44} {tp * 1e3:9.1f}ms {tc * 1e3:9.1f}ms {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
