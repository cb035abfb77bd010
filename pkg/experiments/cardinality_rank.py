"""Does allowing rank above 3 ever help on lifted graph datasets?

For a few small graphs, run the multi-start optimizer at every rank from 3
to the lifted ground-set size and report the best log-likelihood per rank
next to the frequency lower bound.  Nothing is asserted; the output is a
record of which rank won.

Usage::

    python3 experiments/cardinality_rank.py [--restarts 10] [--json]
"""
from __future__ import annotations

import argparse
import json
import sys

from dppmle.diagonal import hadamard_lower_bound
from dppmle.graph import Graph
from dppmle.mle import OptimizerConfig, optimize
from dppmle.reduction import lift_to_hypergraph

GRAPHS = {
    "K3": Graph(3, ((0, 1), (1, 2), (0, 2))),
    "P4": Graph(4, ((0, 1), (1, 2), (2, 3))),
    "star3": Graph(4, ((0, 1), (0, 2), (0, 3))),
    "C5": Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4))),
    "K4": Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))),
}


def run(restarts: int, max_iters: int, seed: int, margin: float) -> list[dict]:
    rows = []
    for name, G in GRAPHS.items():
        D = lift_to_hypergraph(G).dataset
        lb = hadamard_lower_bound(D)
        per_rank = {}
        for r in range(3, D.n + 1):
            rep = optimize(D, OptimizerConfig(rank=r, restarts=restarts, max_iters=max_iters,
                                              seed=seed))
            per_rank[r] = rep.best_ll
        best3 = per_rank[3]
        best_any = min(per_rank.values())
        rows.append({"graph": name, "N": D.n, "lower_bound": lb, "best_by_rank": per_rank,
                     "rank3_gap": best3 - lb,
                     "higher_rank_wins": best_any < best3 - margin})
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--restarts", type=int, default=10)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--margin", type=float, default=1e-4,
                    help="improvement needed to call a higher rank the winner; rank 3 "
                         "converges more slowly, so tiny gaps are optimizer noise")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rows = run(args.restarts, args.iters, args.seed, args.margin)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    for row in rows:
        ranks = " ".join(f"r{r}={v:.6f}" for r, v in row["best_by_rank"].items())
        print(f"{row['graph']:6s} N={row['N']:2d} bound={row['lower_bound']:.6f} {ranks} "
              f"higher rank wins: {row['higher_rank_wins']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
