"""Static social graph: scale-free generation, neighbor queries, edge-list I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SocialGraph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    weights: dict[tuple[int, int], float]

    def weight(self, i: int, j: int) -> float:
        return self.weights[(i, j) if i < j else (j, i)]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.weights)

    def with_weights(self, weight: float) -> SocialGraph:
        return SocialGraph(self.n, self.adjacency, {e: float(weight) for e in self.weights})


def from_edges(n: int, edges, default_weight: float = 1.0) -> SocialGraph:
    """Build a graph from `(i, j)` or `(i, j, w)` tuples."""
    adj: list[set[int]] = [set() for _ in range(n)]
    weights: dict[tuple[int, int], float] = {}
    for e in edges:
        i, j = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else default_weight
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) outside 0..{n - 1}")
        if not w > 0:
            raise GraphError(f"edge ({i}, {j}) has non-positive weight {w}")
        adj[i].add(j)
        adj[j].add(i)
        weights[(min(i, j), max(i, j))] = w
    return SocialGraph(n, tuple(tuple(sorted(a)) for a in adj), weights)


def complete_graph(n: int, weight: float = 1.0) -> SocialGraph:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], weight)


def generate_scale_free(n: int, m: int, rng: np.random.Generator, weight: float = 1.0) -> SocialGraph:
    """Barabasi-Albert preferential attachment.

    Starts from a clique on m + 1 nodes; each later node links to m distinct
    existing nodes drawn with probability proportional to current degree.
    """
    if not (1 <= m < n):
        raise GraphError(f"need 1 <= m < n, got n={n}, m={m}")
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # each node appears once per incident edge endpoint
    endpoints = [v for e in edges for v in e]
    for v in range(m + 1, n):
        targets: list[int] = []
        while len(targets) < m:
            u = endpoints[int(rng.integers(len(endpoints)))]
            if u not in targets:
                targets.append(u)
        for u in targets:
            edges.append((u, v))
            endpoints.extend((u, v))
    return from_edges(n, edges, weight)


def neighbors(g: SocialGraph, i: int) -> list[int]:
    if not 0 <= i < g.n:
        raise GraphError(f"unknown agent id {i}")
    return list(g.adjacency[i])


def build_graph(n: int, m: int, rng: np.random.Generator, weight: float = 1.0) -> SocialGraph:
    """Scale-free graph, or a complete graph when there are too few nodes for m links each."""
    if n <= m:
        return complete_graph(n, weight)
    return generate_scale_free(n, m, rng, weight)


def is_connected(g: SocialGraph) -> bool:
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        for j in g.adjacency[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == g.n


def write_edgelist(g: SocialGraph, path: str | Path) -> None:
    lines = [f"# nodes {g.n}"] + [f"{i} {j} {float(w)!r}" for (i, j), w in sorted(g.weights.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edgelist(path: str | Path, n: int | None = None) -> SocialGraph:
    edges = []
    declared = None
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "nodes":
                declared = int(parts[1])
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphError(f"bad edge line: {raw!r}")
        edges.append(tuple(float(p) if k == 2 else int(p) for k, p in enumerate(parts)))
    if n is None:
        n = declared if declared is not None else 1 + max((max(e[0], e[1]) for e in edges), default=-1)
    return from_edges(n, edges)
