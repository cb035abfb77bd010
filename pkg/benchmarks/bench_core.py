"""Compare the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_core.py [--repeat 5] [--json]

Each workload is run on both backends with identical inputs; the outputs
are checked for agreement before timings are reported.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from dppmle import _fallback

try:
    from dppmle import _core
except ImportError:
    _core = None


def workloads(rng: np.random.Generator):
    """(name, args, function name) triples sized to take ~0.1 s on the fallback."""
    n = 14
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    K = (U * rng.uniform(0, 1, n)) @ U.T
    masks = np.arange(1 << n, dtype=np.uint64)
    yield f"enumerate n={n} (2^{n} dets)", (K, masks), "masked_abs_dets"

    r, N, m = 3, 3000, 6000
    Q = rng.standard_normal((r, N))
    Q /= 1.01 * np.linalg.norm(Q, 2)
    E = np.eye(r) - Q @ Q.T
    idx = np.array([rng.choice(N, 3, replace=False) for _ in range(m)], dtype=np.int64)
    indptr = np.arange(0, 3 * m + 1, 3, dtype=np.int64)
    yield f"bordered dets rank {r}, {m} triples", (E, Q, indptr, idx.ravel()), "bordered_abs_dets"

    P = rng.standard_normal((40000, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    nb = rng.standard_normal((12, 3))
    yield "sphere min sin^2, 40000 x 12", (P, nb), "sphere_min_sin2"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1
    rows = []
    for name, call_args, fn in workloads(np.random.default_rng(args.seed)):
        fast, slow = getattr(_core, fn), getattr(_fallback, fn)
        a, b = fast(*call_args), slow(*call_args)
        err = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        rows.append({"workload": name, "compiled_s": t_fast, "python_s": t_slow,
                     "speedup": t_slow / t_fast, "max_abs_diff": err})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'workload':40s} {'compiled':>10s} {'python':>10s} {'speedup':>8s} {'max diff':>9s}")
        for r in rows:
            print(f"{r['workload']:40s} {r['compiled_s']:10.4f} {r['python_s']:10.4f} "
                  f"{r['speedup']:8.1f} {r['max_abs_diff']:9.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
