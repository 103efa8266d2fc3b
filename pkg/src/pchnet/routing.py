"""Price-driven multi-path rate control.

Each channel carries a capacity price (shared by both directions) and an
imbalance price per direction.  Sources probe the summed channel prices of
their paths every update interval and move each path rate along the
gradient of a log utility of their total rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import count
from typing import Sequence

from .network import PaymentDemand

RATE_FLOOR = 1e-3


class ValueTooSmall(ValueError):
    pass


class InvalidThreshold(ValueError):
    pass


class TUState(enum.Enum):
    PENDING = "pending"
    IN_FLIGHT = "in_flight"
    QUEUED = "queued"
    DELIVERED = "delivered"
    COMPLETED = "completed"
    ABORTED = "aborted"


_tu_ids = count()


@dataclass(eq=False)
class TransactionUnit:
    tuid: int
    parent: int
    amount: int  # milli-tokens
    path_index: int = 0
    path: tuple[int, ...] = ()
    marked: bool = False
    state: TUState = TUState.PENDING
    hop: int = 0  # index into path of the node currently holding the TU
    deadline: float = math.inf
    sent_at: float = 0.0
    held_hops: list[tuple[int, int]] = field(default_factory=list)

    def mark(self) -> None:
        self.marked = True

    @property
    def at(self) -> int:
        return self.path[self.hop]

    @property
    def next_hop(self) -> tuple[int, int]:
        return self.path[self.hop], self.path[self.hop + 1]


def split_amounts(value: int, min_tu: int, max_tu: int) -> list[int]:
    """Greedy max-size fill; an undersized tail is merged with the previous
    chunk and the pair split evenly."""
    if min_tu <= 0 or max_tu < min_tu:
        raise ValueError("need 0 < min_tu <= max_tu")
    if value < min_tu:
        raise ValueTooSmall(f"value {value} below min TU {min_tu}")
    full, rest = divmod(value, max_tu)
    amounts = [max_tu] * full
    if rest:
        if rest >= min_tu:
            amounts.append(rest)
        else:
            merged = amounts.pop() + rest
            lo = merged // 2
            hi = merged - lo
            if lo < min_tu:
                raise ValueTooSmall(f"value {value} cannot be split within [{min_tu}, {max_tu}]")
            amounts.extend([hi, lo])
    return amounts


def split_demand(d: PaymentDemand, min_tu: int, max_tu: int, k: int) -> list[TransactionUnit]:
    """TUs for one payment, assigned round-robin to ``k`` paths."""
    if k < 1:
        raise ValueError("k must be positive")
    return [
        TransactionUnit(next(_tu_ids), d.id, amt, path_index=i % k, deadline=d.deadline)
        for i, amt in enumerate(split_amounts(d.value, min_tu, max_tu))
    ]


@dataclass
class ChannelPriceState:
    """Prices and per-interval counters of one channel.

    Index 0 is the a->b direction of the channel (``a < b``), index 1 the
    reverse.  ``required`` is the funds needed to sustain the current rates
    and ``arrived`` the TU volume that showed up during the last interval,
    both in tokens.
    """

    lam: float = 0.0
    mu: list[float] = field(default_factory=lambda: [0.0, 0.0])
    required: list[float] = field(default_factory=lambda: [0.0, 0.0])
    arrived: list[float] = field(default_factory=lambda: [0.0, 0.0])
    rate: list[float] = field(default_factory=lambda: [0.0, 0.0])

    def reset_counters(self) -> None:
        self.arrived = [0.0, 0.0]


def update_capacity_price(st: ChannelPriceState, capacity: float, kappa: float) -> float:
    st.lam = max(0.0, st.lam + kappa * (st.required[0] + st.required[1] - capacity))
    return st.lam


def imbalance_step(st: ChannelPriceState, eta: float) -> float:
    """Unprojected change applied to the forward imbalance price."""
    return eta * (st.arrived[0] - st.arrived[1])


def update_imbalance_price(st: ChannelPriceState, eta: float) -> tuple[float, float]:
    step = imbalance_step(st, eta)
    st.mu = [max(0.0, st.mu[0] + step), max(0.0, st.mu[1] - step)]
    return st.mu[0], st.mu[1]


def channel_routing_price(st: ChannelPriceState, direction: int = 0) -> float:
    return 2.0 * st.lam + st.mu[direction] - st.mu[1 - direction]


def _check_fee(t_fee: float) -> None:
    if not 0.0 < t_fee < 1.0:
        raise InvalidThreshold(f"fee threshold must lie in (0, 1), got {t_fee}")


def forwarding_fee(st: ChannelPriceState, t_fee: float, direction: int = 0) -> float:
    """Fee the sender of a hop pays; never negative."""
    _check_fee(t_fee)
    return max(0.0, t_fee * channel_routing_price(st, direction))


def path_fees(prices: Sequence[float], t_fee: float) -> float:
    _check_fee(t_fee)
    return sum(max(0.0, t_fee * xi) for xi in prices)


def path_price(prices: Sequence[float], t_fee: float) -> float:
    """Probe result for a path given the routing price of each hop."""
    _check_fee(t_fee)
    if not prices:
        raise ValueError("path has no channels")
    return (1.0 + t_fee) * sum(prices)


@dataclass(eq=False)
class PathState:
    path: tuple[int, ...]
    rate: float
    rho: float = 0.0
    window: float = 4.0
    outstanding: int = 0
    credit: float = 0.0
    ceiling: float = math.inf

    @property
    def hops(self) -> list[tuple[int, int]]:
        return list(zip(self.path[:-1], self.path[1:]))


def marginal_utility(total_rate: float) -> float:
    """Derivative of log(total rate)."""
    return 1.0 / max(total_rate, RATE_FLOOR)


def update_rate(
    ps: PathState,
    alpha: float,
    rho: float,
    total_rate: float,
    floor: float = RATE_FLOOR,
    ceiling: float | None = None,
) -> float:
    ceiling = ps.ceiling if ceiling is None else ceiling
    ps.rho = rho
    ps.rate = min(max(ps.rate + alpha * (marginal_utility(total_rate) - rho), floor), ceiling)
    return ps.rate


def cap_to_demand(paths: Sequence[PathState], demand_rate: float, floor: float = RATE_FLOOR) -> None:
    """Scale path rates down so their sum does not exceed the offered load."""
    total = sum(p.rate for p in paths)
    if total > demand_rate > 0:
        scale = demand_rate / total
        for p in paths:
            p.rate = max(p.rate * scale, floor)


@dataclass
class RateParams:
    kappa: float = 0.002
    eta: float = 0.05
    alpha: float = 0.5
    t_fee: float = 0.1
    floor: float = RATE_FLOOR
    headroom: float = 1.0  # demand cap multiplier on the offered load
    initial_rate: float | None = None  # per path; None starts at demand / paths


class RateController:
    """Prices and path rates for a set of source/destination flows.

    ``update`` performs one interval: refresh channel prices from the
    arrival counters, probe every path, then step each path rate.  When no
    measured counters are supplied the arrivals are taken to be the
    controlled rates themselves (fluid operation).
    """

    def __init__(self, net, paths, demand, params: RateParams | None = None, delta: float = 0.1):
        self.net = net
        self.params = params or RateParams()
        self.demand = dict(demand)
        self.delta = delta
        self.prices = {key: ChannelPriceState() for key in net.channels}
        self.flows: dict[tuple[int, int], list[PathState]] = {}
        self.crossing: dict[tuple[int, int], list[PathState]] = {}
        for pair, plist in paths.items():
            start = self.params.initial_rate
            if start is None:
                start = self.demand.get(pair, 1.0) / max(len(plist), 1)
            start = max(start, self.params.floor)
            states = [PathState(tuple(p), rate=start) for p in plist]
            self.flows[pair] = states
            for ps in states:
                for hop in ps.hops:
                    self.crossing.setdefault(hop, []).append(ps)
        self.set_delta(delta)

    def set_delta(self, delta: float) -> None:
        self.delta = delta
        for states in self.flows.values():
            for ps in states:
                ps.ceiling = min(self.net.channel(u, v).capacity / 1000 / delta for u, v in ps.hops)

    def directional_rates(self) -> dict[tuple[int, int], float]:
        return {hop: sum(ps.rate for ps in states) for hop, states in self.crossing.items()}

    def hop_price(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        return channel_routing_price(self.prices[key], 0 if u < v else 1)

    def update(self, arrived: dict[tuple[int, int], float] | None = None, tau: float = 0.2) -> None:
        p = self.params
        rates = self.directional_rates()
        for (a, b), st in self.prices.items():
            st.rate = [rates.get((a, b), 0.0), rates.get((b, a), 0.0)]
            st.required = [r * self.delta for r in st.rate]
            if arrived is None:
                st.arrived = [r * tau for r in st.rate]
            else:
                st.arrived = [arrived.get((a, b), 0.0), arrived.get((b, a), 0.0)]
            update_capacity_price(st, self.net.channel(a, b).capacity / 1000, p.kappa)
            update_imbalance_price(st, p.eta)
        for pair, states in self.flows.items():
            total = sum(ps.rate for ps in states)
            for ps in states:
                rho = path_price([self.hop_price(u, v) for u, v in ps.hops], p.t_fee)
                update_rate(ps, p.alpha, rho, total, p.floor)
            cap = self.demand.get(pair, 0.0) * p.headroom
            cap_to_demand(states, cap, p.floor)

    def max_gap(self) -> dict[tuple[int, int], float]:
        """|r_ab - r_ba| for every channel that carries a path."""
        rates = self.directional_rates()
        gaps = {}
        for a, b in self.prices:
            if (a, b) in rates or (b, a) in rates:
                gaps[(a, b)] = abs(rates.get((a, b), 0.0) - rates.get((b, a), 0.0))
        return gaps
