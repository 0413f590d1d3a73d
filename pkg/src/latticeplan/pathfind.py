"""Path extraction from a generated tree.

Back-tracing ancestor links is the primary extractor; BFS (unit weights)
and Dijkstra (Euclidean weights) are kept as independent cross-checks —
on a tree all three must return the same unique root-to-target chain.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import List

import numpy as np

from .geometry import distance
from .graph import SearchGraph


@dataclass
class GraphPath:
    """Root-to-target vertex chain with its Euclidean length."""

    vertices: List[int]
    coords: List[np.ndarray]
    length: float
    hops: int


def _require_target(g: SearchGraph) -> int:
    if g.target_id is None:
        raise ValueError("graph does not contain the target vertex")
    return g.target_id


def _make_path(g: SearchGraph, chain: List[int]) -> GraphPath:
    coords = [g.coords[v] for v in chain]
    length = sum(distance(a, b) for a, b in zip(coords, coords[1:]))
    return GraphPath(vertices=chain, coords=coords, length=length,
                     hops=len(chain) - 1)


def backtrace(g: SearchGraph) -> GraphPath:
    """Follow ancestor links from the target back to the root."""
    v = _require_target(g)
    chain = [v]
    while g.ancestor[v] is not None:
        v = g.ancestor[v]
        chain.append(v)
    chain.reverse()
    if chain[0] != 0:
        raise ValueError("target vertex does not trace back to the root")
    return _make_path(g, chain)


def _adjacency(g: SearchGraph) -> List[List[int]]:
    adj: List[List[int]] = [[] for _ in range(g.count)]
    for a, b in g.edges():
        adj[a].append(b)
        adj[b].append(a)
    return adj


def bfs_path(g: SearchGraph) -> GraphPath:
    """Minimum-hop path under unit edge weights."""
    target = _require_target(g)
    adj = _adjacency(g)
    parent = {0: None}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        if v == target:
            break
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                queue.append(w)
    if target not in parent:
        raise ValueError("target vertex unreachable from the root")
    chain = []
    v: int | None = target
    while v is not None:
        chain.append(v)
        v = parent[v]
    chain.reverse()
    return _make_path(g, chain)


def dijkstra_path(g: SearchGraph) -> GraphPath:
    """Minimum Euclidean-length path with edge weights ||v_i - v_j||."""
    target = _require_target(g)
    adj = _adjacency(g)
    dist = {0: 0.0}
    parent = {0: None}
    heap = [(0.0, 0)]
    settled = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        if v == target:
            break
        for w in adj[v]:
            nd = d + distance(g.coords[v], g.coords[w])
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                parent[w] = v
                heapq.heappush(heap, (nd, w))
    if target not in parent:
        raise ValueError("target vertex unreachable from the root")
    chain = []
    v: int | None = target
    while v is not None:
        chain.append(v)
        v = parent[v]
    chain.reverse()
    return _make_path(g, chain)
