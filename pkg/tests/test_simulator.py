import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pchnet.network import Channel, Network, NetworkSpec, NodeRole, PaymentDemand, build_network, line_network
from pchnet.placement import AssignmentPlan, PlacementPlan, PlacementProblem, optimal_assignment
from pchnet.simulator import (
    TRACE_HEADER,
    ConfigError,
    SimConfig,
    communication_costs,
    deadlock_config,
    detect_deadlock,
    run,
)
from pchnet.workload import Workload, WorkloadSpec, generate_workload

A, B, C = 0, 1, 2


def small_config(seed, routing="splicer", **kw):
    return SimConfig(
        network=NetworkSpec(nodes=30, candidates=4, seed=seed),
        workload=WorkloadSpec(pairs=15, pair_rate=0.5),
        routing=routing,
        duration=kw.pop("duration", 60.0),
        seed=seed,
        **kw,
    )


def wealth(net):
    out = {n: 0 for n in net.nodes}
    for ch in net.channels.values():
        out[ch.a] += ch.funds[0] + ch.held[0]
        out[ch.b] += ch.funds[1] + ch.held[1]
    return out


def scaled(net, factor):
    chans = [Channel(c.a, c.b, c.capacity * factor, [f * factor for f in c.funds]) for c in net.channels.values()]
    return Network(net.roles, chans)


def test_zero_demand_run():
    cfg = small_config(0, duration=5.0)
    cfg.workload = WorkloadSpec(kind="none")
    m = run(cfg).metrics
    assert m.generated == 0 and m.tsr == 1.0 and m.normalized_throughput == 0 and m.deadlock_events == 0


def test_deadlock_detection_examples():
    net = line_network()
    assert detect_deadlock(net, []) == []
    assert detect_deadlock(net, [(C, B, 1000)]) == []
    net.transfer(C, B, 10_000)  # C has paid out everything toward B
    events = detect_deadlock(net, [(C, B, 1000), (A, C, 1000)], now=12.0)
    assert [(e.node, e.blocked, e.time) for e in events] == [(C, [(C, B)], 12.0)]


def test_one_way_drain_deadlocks_after_capacity_over_rate():
    roles = {0: NodeRole.CLIENT, 1: NodeRole.CLIENT}
    net = Network(roles, [Channel(0, 1, 20_000, [10_000, 10_000])])
    wl = Workload([PaymentDemand(i, 0, 1, 1000, float(i), i + 3.0) for i in range(20)], {(0, 1): 1.0})
    cfg = SimConfig(network=NetworkSpec(nodes=2), placement="none", routing="shortest", duration=20.0)
    res = run(cfg, net, wl)
    assert res.metrics.completed == 10
    first = res.deadlocks[0].time
    assert 10.0 <= first <= 10.0 + cfg.tau + 1e-9  # 10 tokens / 1 token per second


def test_communication_costs_examples():
    net = line_network()
    p = PlacementProblem.from_network(net)
    plan = PlacementPlan.from_set([0], 1)
    y = AssignmentPlan.from_choice([0, 0], 1)
    cc = communication_costs(net, p, plan, y, [(A, B)], hop_latency=0.01)
    assert cc.avg_delay == pytest.approx(2 * 0.01)
    assert cc.sync_messages == 0

    big = build_network(NetworkSpec(nodes=60, candidates=8, seed=4))
    prob = PlacementProblem.from_network(big)
    few, many = PlacementPlan.from_set([0], 8), PlacementPlan.from_set(range(8), 8)
    c_few = communication_costs(big, prob, few, optimal_assignment(prob.with_omega(0), few))
    c_many = communication_costs(big, prob, many, optimal_assignment(prob.with_omega(0), many))
    assert c_many.management_hops <= c_few.management_hops
    assert c_many.sync_hops >= c_few.sync_hops
    assert c_many.sync_messages == 8 * 7


@pytest.mark.parametrize("routing", ["splicer", "waterfill", "shortest"])
def test_conservation_and_atomicity(routing):
    cfg = small_config(3, routing)
    net = build_network(cfg.network)
    before, total = wealth(net), net.total_funds()
    res = run(cfg, net)
    after = wealth(res.network)
    assert all(ch.held == [0, 0] for ch in res.network.channels.values())
    expected = dict(before)
    for _, s, e, tokens in res.completions:
        amount = round(tokens * 1000)
        expected[s] -= amount
        expected[e] += amount
    assert after == expected
    assert res.network.total_funds() == total


def test_determinism():
    a = run(small_config(5, trace=True, duration=20.0))
    b = run(small_config(5, trace=True, duration=20.0))
    assert a.metrics == b.metrics
    assert a.trace_csv() == b.trace_csv() and a.throughput_csv() == b.throughput_csv()
    assert a.trace_csv().splitlines()[1] == ",".join(TRACE_HEADER)


@pytest.mark.parametrize("routing", ["splicer", "waterfill", "shortest"])
def test_more_capacity_never_hurts(routing):
    for seed in range(5):
        cfg = small_config(seed, routing)
        net = build_network(cfg.network)
        wl = generate_workload(cfg.workload, net, cfg.duration, cfg.timeout, cfg.min_tu, np.random.default_rng(seed))
        base = run(cfg, net.copy(), wl).metrics.tsr
        rich = run(cfg, scaled(net, 10), wl).metrics.tsr
        assert rich >= base


def test_deadlock_preset_shape():
    cfg = deadlock_config("splicer", duration=10.0)
    assert cfg.hubs == [2] and cfg.k == 1
    res = run(cfg)
    assert res.metrics.generated == 50


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(routing="teleport").validate()
    with pytest.raises(ConfigError):
        SimConfig(tau=0.015).validate()
    with pytest.raises(ConfigError):
        SimConfig(placement="fixed").validate()
    with pytest.raises(ConfigError):
        dataclasses.replace(SimConfig(), min_tu=5.0).validate()


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 10_000), routing=st.sampled_from(["splicer", "waterfill", "shortest"]))
def test_conservation_property(seed, routing):
    cfg = small_config(seed, routing, duration=15.0)
    net = build_network(cfg.network)
    total = net.total_funds()
    res = run(cfg, net)
    assert res.network.total_funds() == total
    assert res.metrics.completed + res.metrics.aborted == res.metrics.generated
