"""Multi-path route selection: k-shortest, highest-funds heuristic,
edge-disjoint widest, edge-disjoint shortest."""

from __future__ import annotations

import enum
import heapq
from collections import deque
from itertools import islice

import networkx as nx

from .network import Network

Path = tuple[int, ...]


class NoPath(Exception):
    pass


class PathKind(enum.Enum):
    KSP = "ksp"
    HEURISTIC = "heuristic"
    EDW = "edw"
    EDS = "eds"


def edges_of(path: Path) -> list[tuple[int, int]]:
    return list(zip(path[:-1], path[1:]))


def bottleneck(net: Network, path: Path) -> int:
    return min(net.balance(u, v) for u, v in edges_of(path))


def _bfs_path(adj: dict[int, list[int]], s: int, e: int, allowed) -> Path | None:
    """Shortest path by hops; neighbours scanned in id order."""
    parent = {s: None}
    frontier = deque([s])
    while frontier:
        u = frontier.popleft()
        if u == e:
            break
        for v in adj[u]:
            if v not in parent and allowed(u, v):
                parent[v] = u
                frontier.append(v)
    if e not in parent:
        return None
    out = [e]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return tuple(reversed(out))


def _widest_value(net: Network, adj, s: int, e: int, allowed) -> int | None:
    """Largest bottleneck over s->e paths (modified Dijkstra)."""
    best = {s: float("inf")}
    heap = [(-float("inf"), s)]
    done = set()
    while heap:
        negw, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == e:
            return int(-negw)
        for v in adj[u]:
            if v in done or not allowed(u, v):
                continue
            w = min(-negw, net.balance(u, v))
            if w > best.get(v, -1):
                best[v] = w
                heapq.heappush(heap, (-w, v))
    return None


def _disjoint(net: Network, s: int, e: int, k: int, widest: bool) -> list[Path]:
    used: set[frozenset] = set()
    paths: list[Path] = []
    for _ in range(k):
        free = lambda u, v: frozenset((u, v)) not in used  # noqa: E731
        if widest:
            w = _widest_value(net, net.adj, s, e, free)
            if w is None:
                break
            path = _bfs_path(net.adj, s, e, lambda u, v, w=w: free(u, v) and net.balance(u, v) >= w)
        else:
            path = _bfs_path(net.adj, s, e, free)
        if path is None:
            break
        paths.append(path)
        used.update(frozenset(edge) for edge in edges_of(path))
    return paths


def _shortest_simple(net: Network, s: int, e: int, k: int, graph: nx.Graph | None) -> list[Path]:
    g = graph if graph is not None else net.graph()
    pool: list[Path] = []
    gen = nx.shortest_simple_paths(g, s, e)
    for p in gen:
        p = tuple(p)
        if len(pool) >= k and len(p) > len(pool[-1]):
            break
        pool.append(p)
    # equal-length ties resolved by node sequence
    pool.sort(key=lambda p: (len(p), p))
    return pool[:k]


def compute_paths(
    net: Network,
    s: int,
    e: int,
    k: int,
    kind: PathKind | str = PathKind.EDW,
    graph: nx.Graph | None = None,
) -> list[Path]:
    """Up to ``k`` routes from ``s`` to ``e``.

    Widths are the spendable funds in the direction of travel at call time.
    """
    kind = PathKind(kind)
    if s == e:
        raise ValueError("source and destination must differ")
    if k < 1:
        raise ValueError("k must be positive")
    if s not in net.adj or e not in net.adj or _bfs_path(net.adj, s, e, lambda u, v: True) is None:
        raise NoPath((s, e))
    if kind is PathKind.KSP:
        return _shortest_simple(net, s, e, k, graph)
    if kind is PathKind.HEURISTIC:
        pool = _shortest_simple(net, s, e, 4 * k, graph)
        pool.sort(key=lambda p: (-bottleneck(net, p), len(p), p))
        return pool[:k]
    return _disjoint(net, s, e, k, widest=kind is PathKind.EDW)


def all_simple_paths(net: Network, s: int, e: int, cutoff: int | None = None) -> list[Path]:
    return [tuple(p) for p in islice(nx.all_simple_paths(net.graph(), s, e, cutoff=cutoff), 100000)]
