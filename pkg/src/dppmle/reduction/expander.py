"""Seeded random d-regular expanders with a spectral and density audit."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import networkx as nx
import numpy as np

from dppmle.errors import ExpanderQualityError, ParameterError


@dataclass(frozen=True)
class ExpanderAudit:
    min_degree: int
    max_degree: int
    connected: bool
    lambda2: float
    spectral_bound: float
    attempts: int
    density_checks: int
    density_violations: int

    @property
    def spectral_ok(self) -> bool:
        return self.lambda2 <= self.spectral_bound


@dataclass(frozen=True)
class ExpanderSpec:
    """A d-regular simple graph on ``count`` vertices.

    ``edges`` are sorted pairs ``(a, b)`` with ``a < b`` in lexicographic
    order; the position of an edge in this tuple is its expander-edge id.
    """

    count: int
    d: int
    seed: int
    edges: tuple[tuple[int, int], ...]
    audit: ExpanderAudit

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.count)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def to_json(self) -> list:
        return [list(e) for e in self.edges]


def _second_eigenvalue(count: int, edges) -> float:
    A = np.zeros((count, count))
    for a, b in edges:
        A[a, b] = A[b, a] = 1.0
    lam = np.linalg.eigvalsh(A)
    return float(lam[-2]) if count > 1 else 0.0


def _density_checks(count, d, adj, rng: random.Random, trials: int = 32) -> tuple[int, int]:
    """Spot-check that random small vertex sets induce sparse subgraphs.

    Sets of size at most ``count/10`` are expected to have average induced
    degree below ``d/6``; this is report-only.
    """
    size = count // 10
    if size < 2:
        return 0, 0
    viol = 0
    for _ in range(trials):
        seed_v = rng.randrange(count)
        # grow a connected ball, the worst case for density
        S, frontier = {seed_v}, [seed_v]
        while frontier and len(S) < size:
            v = frontier.pop(0)
            for u in adj[v]:
                if len(S) < size and u not in S:
                    S.add(u)
                    frontier.append(u)
        e = sum(1 for v in S for u in adj[v] if u in S) / 2
        if 2 * e / len(S) > d / 6:
            viol += 1
    return trials, viol


def build_expander(count: int, d: int, seed: int, max_retries: int = 50,
                   spectral_slack: float = 0.5) -> ExpanderSpec:
    """Random connected d-regular graph passing ``lambda_2 <= 2 sqrt(d-1) + slack``.

    Raises
    ------
    ParameterError
        ``count * d`` odd, ``count <= d`` or ``d < 1``.
    ExpanderQualityError
        No sample passed the audit within ``max_retries`` attempts.
    """
    if d < 1:
        raise ParameterError(f"degree must be >= 1, got {d}")
    if count <= d:
        raise ParameterError(f"need more vertices than the degree (count={count}, d={d})")
    if (count * d) % 2:
        raise ParameterError(f"count*d must be even (count={count}, d={d})")
    rng = random.Random(seed)
    bound = 2.0 * math.sqrt(max(d - 1, 0)) + spectral_slack
    for attempt in range(1, max_retries + 1):
        G = nx.random_regular_graph(d, count, seed=rng.randrange(2**32))
        if not nx.is_connected(G):
            continue
        edges = tuple(sorted((min(a, b), max(a, b)) for a, b in G.edges()))
        lam2 = _second_eigenvalue(count, edges)
        if lam2 > bound:
            continue
        degs = [deg for _, deg in G.degree()]
        spec = ExpanderSpec(count, d, seed, edges, None)  # type: ignore[arg-type]
        checks, viol = _density_checks(count, d, spec.adjacency(), rng)
        audit = ExpanderAudit(min(degs), max(degs), True, lam2, bound, attempt, checks, viol)
        return ExpanderSpec(count, d, seed, edges, audit)
    raise ExpanderQualityError(
        f"no connected {d}-regular graph on {count} vertices met lambda_2 <= {bound:.3f} "
        f"in {max_retries} attempts")


def expander_from_edges(count: int, d: int, seed: int, edges) -> ExpanderSpec:
    """Rebuild a spec from a stored edge list (audit recomputed)."""
    edges = tuple(sorted((min(a, b), max(a, b)) for a, b in edges))
    degs = [0] * count
    for a, b in edges:
        degs[a] += 1
        degs[b] += 1
    G = nx.Graph(list(edges))
    G.add_nodes_from(range(count))
    lam2 = _second_eigenvalue(count, edges)
    audit = ExpanderAudit(min(degs), max(degs), nx.is_connected(G), lam2,
                          2.0 * math.sqrt(max(d - 1, 0)) + 0.5, 0, 0, 0)
    return ExpanderSpec(count, d, seed, edges, audit)
