from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pchnet.network import (
    Channel,
    InsufficientFunds,
    InvalidSpec,
    Network,
    NetworkSpec,
    NodeRole,
    UnknownNode,
    apply_transfer,
    build_network,
    hop_distance,
    line_network,
    to_milli,
)

A, B, C = 0, 1, 2


def bfs_oracle(edges, src):
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    dist = {src: 0}
    todo = deque([src])
    while todo:
        u = todo.popleft()
        for v in adj.get(u, []):
            if v not in dist:
                dist[v] = dist[u] + 1
                todo.append(v)
    return dist


def two_node(fab, fba):
    roles = {0: NodeRole.CLIENT, 1: NodeRole.CLIENT}
    return Network(roles, [Channel(0, 1, fab + fba, [fab, fba])])


def test_line_preset_is_balanced():
    net = line_network(20.0)
    assert net.balance(A, C) == net.balance(C, A) == to_milli(10)
    assert net.balance(C, B) == net.balance(B, C) == to_milli(10)
    assert net.candidates == [C]


def test_single_node_spec_rejected():
    with pytest.raises(InvalidSpec):
        build_network(NetworkSpec(nodes=1, candidates=0))


def test_build_is_deterministic():
    assert build_network(NetworkSpec(nodes=100, seed=7)) == build_network(NetworkSpec(nodes=100, seed=7))
    assert build_network(NetworkSpec(nodes=100, seed=7)) != build_network(NetworkSpec(nodes=100, seed=8))


def test_dump_round_trip():
    net = build_network(NetworkSpec(nodes=30, candidates=4, seed=3))
    assert Network.loads(net.dumps()) == net


def test_transfer_examples():
    net = two_node(to_milli(10), to_milli(10))
    after = apply_transfer(net, 0, 1, to_milli(5))
    assert after.channel(0, 1).funds == [to_milli(5), to_milli(15)]
    assert net.channel(0, 1).funds == [to_milli(10), to_milli(10)]  # input untouched

    with pytest.raises(InsufficientFunds):
        apply_transfer(two_node(0, to_milli(20)), 0, 1, 1)

    trip = apply_transfer(apply_transfer(net, 0, 1, to_milli(10)), 1, 0, to_milli(10))
    assert trip == net


def test_hold_settle_refund():
    net = two_node(1000, 1000)
    net.hold(0, 1, 400)
    assert net.channel(0, 1).funds == [600, 1000] and net.total_funds() == 2000
    net.refund(0, 1, 400)
    assert net.channel(0, 1).funds == [1000, 1000]
    net.hold(0, 1, 400)
    net.settle(0, 1, 400)
    assert net.channel(0, 1).funds == [600, 1400]
    with pytest.raises(InsufficientFunds):
        net.settle(0, 1, 1)


def test_hop_distance_line():
    net = line_network()
    assert hop_distance(net, A, B) == 2
    assert hop_distance(net, A, A) == 0
    with pytest.raises(UnknownNode):
        hop_distance(net, A, 99)


def test_hop_distance_matches_bfs_oracle():
    net = build_network(NetworkSpec(nodes=100, seed=11))
    rng = np.random.default_rng(0)
    edges = list(net.channels)
    for _ in range(50):
        m, n = (int(v) for v in rng.choice(100, size=2))
        assert hop_distance(net, m, n) == bfs_oracle(edges, m)[n]


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    moves=st.lists(st.tuples(st.integers(0, 10_000), st.integers(1, 30_000)), max_size=40),
)
def test_transfers_conserve_funds(seed, moves):
    net = build_network(NetworkSpec(nodes=12, candidates=2, ring_degree=4, seed=seed))
    total = net.total_funds()
    keys = list(net.channels)
    for pick, amount in moves:
        a, b = keys[pick % len(keys)]
        u, v = (a, b) if pick % 2 else (b, a)
        try:
            net.transfer(u, v, amount)
        except InsufficientFunds:
            pass
        assert net.total_funds() == total
        assert all(min(ch.funds) >= 0 for ch in net.channels.values())
