import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pchnet.network import Channel, Network, NodeRole
from pchnet.routing import (
    RATE_FLOOR,
    ChannelPriceState,
    InvalidThreshold,
    PathState,
    RateController,
    RateParams,
    ValueTooSmall,
    channel_routing_price,
    forwarding_fee,
    path_fees,
    path_price,
    split_amounts,
    update_capacity_price,
    update_imbalance_price,
    update_rate,
)


def test_capacity_price():
    st_ = ChannelPriceState(lam=0.3, required=[6.0, 4.0])
    assert update_capacity_price(st_, 10.0, 0.1) == 0.3
    st_ = ChannelPriceState(lam=0.0, required=[15.0, 5.0])
    assert update_capacity_price(st_, 10.0, 0.1) == pytest.approx(1.0)
    st_ = ChannelPriceState(lam=0.5, required=[0.0, 0.0])
    assert update_capacity_price(st_, 10.0, 0.1) == 0.0


def test_imbalance_price():
    st_ = ChannelPriceState(mu=[0.7, 0.2], arrived=[3.0, 3.0])
    assert update_imbalance_price(st_, 0.05) == (0.7, 0.2)
    st_ = ChannelPriceState(mu=[0.0, 0.4], arrived=[20.0, 0.0])
    mu_ab, mu_ba = update_imbalance_price(st_, 0.05)
    assert mu_ab == pytest.approx(1.0) and mu_ba == 0.0
    st_ = ChannelPriceState(mu=[2.0, 2.0], arrived=[5.0, 0.0])
    update_imbalance_price(st_, 0.1)
    st_.arrived = [0.0, 5.0]
    assert update_imbalance_price(st_, 0.1) == pytest.approx((2.0, 2.0))


def test_routing_price_and_fees():
    assert channel_routing_price(ChannelPriceState()) == 0
    st_ = ChannelPriceState(lam=1.0, mu=[0.4, 0.1])
    assert channel_routing_price(st_, 0) == pytest.approx(2.3)
    assert forwarding_fee(st_, 0.1) == pytest.approx(0.23)
    assert forwarding_fee(ChannelPriceState(mu=[0.0, 1.0]), 0.1) == 0.0
    assert channel_routing_price(ChannelPriceState(lam=0.7, mu=[0.3, 0.3])) == pytest.approx(1.4)
    assert path_fees([1.0, 0.5], 0.1) == pytest.approx(0.15)
    with pytest.raises(InvalidThreshold):
        forwarding_fee(st_, 1.0)


def test_path_price():
    assert path_price([0.0, 0.0], 0.1) == 0
    assert path_price([1.0, 0.5], 0.1) == pytest.approx(1.65)
    assert path_price([0.8], 0.1) == pytest.approx(1.1 * 0.8)


def test_rate_update():
    ps = PathState((0, 1), rate=0.5)
    assert update_rate(ps, 0.1, rho=2.0, total_rate=0.5) == 0.5  # fixed point
    ps = PathState((0, 1), rate=1.0)
    assert update_rate(ps, 0.1, rho=0.0, total_rate=1.0) == pytest.approx(1.1)
    ps = PathState((0, 1), rate=1.0)
    assert update_rate(ps, 0.1, rho=1e9, total_rate=1.0) == RATE_FLOOR


@given(lam=st.floats(0, 100), mu_ab=st.floats(0, 100), mu_ba=st.floats(0, 100))
def test_routing_price_antisymmetric_part(lam, mu_ab, mu_ba):
    st_ = ChannelPriceState(lam=lam, mu=[mu_ab, mu_ba])
    fwd, rev = channel_routing_price(st_, 0), channel_routing_price(st_, 1)
    assert fwd - 2 * lam == pytest.approx(-(rev - 2 * lam), abs=1e-9)


def test_split_examples():
    assert split_amounts(10, 1, 4) == [4, 4, 2]
    assert split_amounts(1, 1, 4) == [1]
    assert split_amounts(4500, 1000, 4000) == [2250, 2250]
    with pytest.raises(ValueTooSmall):
        split_amounts(500, 1000, 4000)


@given(value=st.integers(1000, 200_000), lo=st.integers(1, 2000), span=st.integers(0, 6000))
def test_split_properties(value, lo, span):
    assume(value >= lo)
    hi = max(2 * lo, lo + span)
    parts = split_amounts(value, lo, hi)
    assert sum(parts) == value
    assert all(lo <= p <= hi for p in parts)


def test_two_node_fluid_converges_to_demand():
    net = Network({0: NodeRole.CLIENT, 1: NodeRole.CLIENT}, [Channel(0, 1, 1_000_000, [500_000, 500_000])])
    paths = {(0, 1): [(0, 1)], (1, 0): [(1, 0)]}
    ctrl = RateController(net, paths, {(0, 1): 2.0, (1, 0): 2.0}, RateParams(initial_rate=0.1), delta=0.1)
    for _ in range(500):
        ctrl.update()
    assert ctrl.flows[(0, 1)][0].rate == pytest.approx(2.0, abs=1e-3)
    assert ctrl.flows[(1, 0)][0].rate == pytest.approx(2.0, abs=1e-3)
    assert max(ctrl.max_gap().values()) <= 1e-3
