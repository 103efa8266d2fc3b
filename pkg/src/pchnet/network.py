"""Payment channel network model.

Token amounts are stored as integer milli-tokens so that fund conservation
can be checked with exact equality.  Each channel keeps per-direction
spendable funds plus per-direction *held* funds (HTLC-style locks that are
either settled to the far side or refunded to the near side).
"""

from __future__ import annotations

import enum
import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

MILLI = 1000
UNREACHABLE = math.inf


class NetworkError(Exception):
    pass


class InvalidSpec(NetworkError, ValueError):
    pass


class DisconnectedTopology(NetworkError):
    pass


class UnknownNode(NetworkError, KeyError):
    pass


class UnknownChannel(NetworkError, KeyError):
    pass


class InsufficientFunds(NetworkError):
    pass


def to_milli(tokens: float) -> int:
    return int(round(tokens * MILLI))


def to_tokens(milli: int) -> float:
    return milli / MILLI


class NodeRole(enum.Enum):
    CLIENT = "client"
    CANDIDATE = "candidate"
    ACTIVE = "active"

    @property
    def is_candidate(self) -> bool:
        return self is not NodeRole.CLIENT


@dataclass
class Channel:
    """Bidirectional channel between ``a < b``.

    ``funds[0]`` is spendable in direction a->b, ``funds[1]`` in b->a.
    ``held`` mirrors that layout for amounts locked by in-flight payments.
    """

    a: int
    b: int
    capacity: int
    funds: list[int]
    held: list[int] = field(default_factory=lambda: [0, 0])

    def __post_init__(self):
        if self.a >= self.b:
            raise InvalidSpec(f"channel endpoints must be ordered, got ({self.a}, {self.b})")
        if self.capacity <= 0:
            raise InvalidSpec("channel capacity must be positive")
        if min(self.funds) < 0 or sum(self.funds) + sum(self.held) != self.capacity:
            raise InvalidSpec(f"funds {self.funds} do not add up to capacity {self.capacity}")

    def direction(self, u: int, v: int) -> int:
        if (u, v) == (self.a, self.b):
            return 0
        if (u, v) == (self.b, self.a):
            return 1
        raise UnknownChannel((u, v))

    def balance(self, u: int, v: int) -> int:
        return self.funds[self.direction(u, v)]

    @property
    def total(self) -> int:
        return sum(self.funds) + sum(self.held)

    def copy(self) -> "Channel":
        return Channel(self.a, self.b, self.capacity, list(self.funds), list(self.held))


@dataclass
class NetworkSpec:
    """Parameters for :func:`build_network`.

    Either a Watts-Strogatz small-world topology (``ring_degree``,
    ``rewire_prob``) or an explicit ``edges`` list.  Channel capacities are
    drawn from a floored log-normal unless ``capacity`` fixes them.
    """

    nodes: int
    candidates: int = 0
    clients: int | None = None
    ring_degree: int = 4
    rewire_prob: float = 0.1
    lognormal_mu: float = math.log(152.0)
    lognormal_sigma: float = math.sqrt(2.0 * math.log(403.0 / 152.0))
    capacity_floor: float = 10.0
    capacity: float | None = None
    edges: Sequence[tuple[int, int]] | None = None
    candidate_ids: Sequence[int] | None = None
    seed: int = 0
    max_retries: int = 20

    def validate(self) -> None:
        if self.nodes < 2:
            raise InvalidSpec("a network needs at least two nodes")
        if self.candidates < 0 or self.candidates > self.nodes:
            raise InvalidSpec("candidate count out of range")
        clients = self.nodes - self.candidates if self.clients is None else self.clients
        if clients < 0 or clients + self.candidates != self.nodes:
            raise InvalidSpec("clients + candidates must equal nodes")
        if self.edges is None:
            if self.ring_degree < 2 or self.ring_degree >= self.nodes:
                raise InvalidSpec("ring_degree must be in [2, nodes)")
            if not 0.0 <= self.rewire_prob <= 1.0:
                raise InvalidSpec("rewire_prob must lie in [0, 1]")
        if self.capacity is not None and self.capacity <= 0:
            raise InvalidSpec("capacity must be positive")
        if self.lognormal_sigma <= 0 or self.capacity_floor <= 0:
            raise InvalidSpec("channel size distribution parameters must be positive")
        if self.max_retries < 1:
            raise InvalidSpec("max_retries must be positive")


class Network:
    """Nodes with roles, channels keyed by ordered endpoint pair, hop table."""

    def __init__(self, roles: dict[int, NodeRole], channels: Iterable[Channel]):
        self.roles = dict(sorted(roles.items()))
        self.channels: dict[tuple[int, int], Channel] = {}
        self.adj: dict[int, list[int]] = {n: [] for n in self.roles}
        for ch in channels:
            if ch.a not in self.roles or ch.b not in self.roles:
                raise UnknownNode((ch.a, ch.b))
            key = (ch.a, ch.b)
            if key in self.channels:
                raise InvalidSpec(f"duplicate channel {key}")
            self.channels[key] = ch
            self.adj[ch.a].append(ch.b)
            self.adj[ch.b].append(ch.a)
        for nbrs in self.adj.values():
            nbrs.sort()
        self._index = {n: i for i, n in enumerate(self.roles)}
        self.hops = self._all_pairs_hops()

    # ---- structure -------------------------------------------------------

    @property
    def nodes(self) -> list[int]:
        return list(self.roles)

    @property
    def clients(self) -> list[int]:
        return [n for n, r in self.roles.items() if r is NodeRole.CLIENT]

    @property
    def candidates(self) -> list[int]:
        return [n for n, r in self.roles.items() if r.is_candidate]

    def channel(self, u: int, v: int) -> Channel:
        key = (u, v) if u < v else (v, u)
        try:
            return self.channels[key]
        except KeyError:
            raise UnknownChannel((u, v)) from None

    def has_channel(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.channels

    def balance(self, u: int, v: int) -> int:
        return self.channel(u, v).balance(u, v)

    def total_funds(self) -> int:
        return sum(ch.total for ch in self.channels.values())

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.roles)
        g.add_edges_from(self.channels)
        return g

    def _all_pairs_hops(self) -> np.ndarray:
        n = len(self.roles)
        dist = np.full((n, n), np.inf)
        ids = list(self.roles)
        for src in ids:
            i = self._index[src]
            dist[i, i] = 0
            frontier = deque([src])
            while frontier:
                u = frontier.popleft()
                du = dist[i, self._index[u]]
                for v in self.adj[u]:
                    j = self._index[v]
                    if dist[i, j] == np.inf:
                        dist[i, j] = du + 1
                        frontier.append(v)
        return dist

    def hop_matrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        ri = [self._index[r] for r in rows]
        ci = [self._index[c] for c in cols]
        return self.hops[np.ix_(ri, ci)]

    def is_connected(self) -> bool:
        return bool(np.isfinite(self.hops).all())

    # ---- funds -----------------------------------------------------------

    def transfer(self, u: int, v: int, amount: int) -> None:
        """Move ``amount`` milli-tokens from u's side to v's side, in place."""
        if amount <= 0:
            raise ValueError("transfer amount must be positive")
        ch = self.channel(u, v)
        d = ch.direction(u, v)
        if ch.funds[d] < amount:
            raise InsufficientFunds(f"{u}->{v}: have {ch.funds[d]}, need {amount}")
        ch.funds[d] -= amount
        ch.funds[1 - d] += amount

    def hold(self, u: int, v: int, amount: int) -> None:
        """Lock funds on u's side for an in-flight payment."""
        ch = self.channel(u, v)
        d = ch.direction(u, v)
        if ch.funds[d] < amount:
            raise InsufficientFunds(f"{u}->{v}: have {ch.funds[d]}, need {amount}")
        ch.funds[d] -= amount
        ch.held[d] += amount

    def settle(self, u: int, v: int, amount: int) -> None:
        """Release a lock toward v (payment succeeded)."""
        ch = self.channel(u, v)
        d = ch.direction(u, v)
        if ch.held[d] < amount:
            raise InsufficientFunds(f"settle {u}->{v}: only {ch.held[d]} held")
        ch.held[d] -= amount
        ch.funds[1 - d] += amount

    def refund(self, u: int, v: int, amount: int) -> None:
        """Release a lock back to u (payment aborted)."""
        ch = self.channel(u, v)
        d = ch.direction(u, v)
        if ch.held[d] < amount:
            raise InsufficientFunds(f"refund {u}->{v}: only {ch.held[d]} held")
        ch.held[d] -= amount
        ch.funds[d] += amount

    def copy(self) -> "Network":
        other = Network.__new__(Network)
        other.roles = dict(self.roles)
        other.channels = {k: ch.copy() for k, ch in self.channels.items()}
        other.adj = {k: list(v) for k, v in self.adj.items()}
        other._index = self._index
        other.hops = self.hops
        return other

    # ---- text dump -------------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        for n, role in self.roles.items():
            buf.write(f"node {n} {role.value}\n")
        for (a, b), ch in self.channels.items():
            buf.write(f"chan {a} {b} {ch.funds[0]} {ch.funds[1]}\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "Network":
        roles: dict[int, NodeRole] = {}
        channels = []
        for lineno, line in enumerate(text.splitlines(), 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "node" and len(parts) == 3:
                roles[int(parts[1])] = NodeRole(parts[2])
            elif parts[0] == "chan" and len(parts) == 5:
                a, b, fab, fba = map(int, parts[1:])
                if a > b:
                    a, b, fab, fba = b, a, fba, fab
                channels.append(Channel(a, b, fab + fba, [fab, fba]))
            else:
                raise ValueError(f"line {lineno}: cannot parse {line!r}")
        return cls(roles, channels)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.dumps() == other.dumps()

    def __repr__(self):
        return f"Network(nodes={len(self.roles)}, channels={len(self.channels)})"


def hop_distance(net: Network, m: int, n: int) -> float:
    """Unweighted shortest-path hop count, ``inf`` when disconnected."""
    if m not in net._index:
        raise UnknownNode(m)
    if n not in net._index:
        raise UnknownNode(n)
    return float(net.hops[net._index[m], net._index[n]])


def apply_transfer(net: Network, a: int, b: int, amount: int) -> Network:
    """Return a copy of ``net`` with ``amount`` moved across channel (a, b)."""
    out = net.copy()
    out.transfer(a, b, amount)
    return out


def sample_capacities(rng: np.random.Generator, size: int, mu: float, sigma: float, floor: float) -> np.ndarray:
    """Heavy-tailed channel sizes in whole tokens, floored."""
    raw = rng.lognormal(mean=mu, sigma=sigma, size=size)
    return np.maximum(np.round(raw), math.ceil(floor)).astype(np.int64)


def _pick_candidates(g: nx.Graph, count: int) -> list[int]:
    # highest degree first, lowest id on ties
    ranked = sorted(g.nodes, key=lambda n: (-g.degree[n], n))
    return sorted(ranked[:count])


def build_network(spec: NetworkSpec) -> Network:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    if spec.edges is not None:
        g = nx.Graph()
        g.add_nodes_from(range(spec.nodes))
        for u, v in spec.edges:
            if not (0 <= u < spec.nodes and 0 <= v < spec.nodes) or u == v:
                raise InvalidSpec(f"bad edge ({u}, {v})")
            g.add_edge(u, v)
        if not nx.is_connected(g):
            raise DisconnectedTopology("explicit edge list is not connected")
    else:
        for attempt in range(spec.max_retries):
            g = nx.watts_strogatz_graph(
                spec.nodes, spec.ring_degree, spec.rewire_prob, seed=spec.seed * 1009 + attempt
            )
            if nx.is_connected(g):
                break
        else:
            raise DisconnectedTopology(f"no connected topology after {spec.max_retries} attempts")

    if spec.candidate_ids is not None:
        cands = sorted(set(spec.candidate_ids))
        if len(cands) != spec.candidates:
            raise InvalidSpec("candidate_ids length must match candidates")
    else:
        cands = _pick_candidates(g, spec.candidates)
    roles = {n: (NodeRole.CANDIDATE if n in cands else NodeRole.CLIENT) for n in range(spec.nodes)}

    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges)
    if spec.capacity is not None:
        caps = np.full(len(edges), spec.capacity)
    else:
        caps = sample_capacities(rng, len(edges), spec.lognormal_mu, spec.lognormal_sigma, spec.capacity_floor)
    channels = []
    for (u, v), cap in zip(edges, caps):
        total = to_milli(float(cap))
        half = total // 2
        channels.append(Channel(u, v, total, [half, total - half]))
    return Network(roles, channels)


def line_network(capacity: float = 20.0) -> Network:
    """Three nodes A=0, B=1, C=2 wired A-C-B, the textbook deadlock setting."""
    spec = NetworkSpec(nodes=3, candidates=1, candidate_ids=[2], edges=[(0, 2), (2, 1)], capacity=capacity)
    return build_network(spec)


@dataclass(frozen=True)
class PaymentDemand:
    """A client payment of ``value`` milli-tokens due by ``deadline`` seconds."""

    id: int
    source: int
    dest: int
    value: int
    created_at: float
    deadline: float

    def __post_init__(self):
        if self.source == self.dest:
            raise ValueError("source and destination must differ")
        if self.value <= 0:
            raise ValueError("payment value must be positive")
        if self.deadline <= self.created_at:
            raise ValueError("deadline must come after creation")
