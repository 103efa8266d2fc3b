"""Synthetic payment workloads."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .network import Network, PaymentDemand, to_milli

# node ids of the three-node deadlock example (A-C-B line)
A, B, C = 0, 1, 2


@dataclass
class WorkloadSpec:
    kind: str = "poisson"  # "poisson" | "deadlock" | "none"
    pairs: int = 40
    pair_rate: float = 1.0  # payments per second per pair (mean)
    value_mu: float = math.log(5.0)
    value_sigma: float = 1.0
    symmetric: bool = False
    asymmetric_fraction: float = 0.5  # share of pairs that also get a weaker reverse flow
    asymmetry: float = 0.5  # reverse rate / forward rate for those pairs
    endpoints: str = "all"  # "all" | "clients"

    def validate(self) -> None:
        if self.kind not in ("poisson", "deadlock", "none"):
            raise ValueError(f"unknown workload kind {self.kind!r}")
        if self.pairs < 0 or self.pair_rate <= 0 or self.value_sigma <= 0:
            raise ValueError("workload parameters must be positive")
        if not 0 <= self.asymmetric_fraction <= 1 or self.asymmetry < 0:
            raise ValueError("asymmetry parameters out of range")


@dataclass
class Workload:
    demands: list[PaymentDemand]
    rates: dict[tuple[int, int], float] = field(default_factory=dict)  # tokens / second

    def __len__(self):
        return len(self.demands)


def value_mean(mu: float, sigma: float, floor: float) -> float:
    """Mean of max(floor, LogNormal(mu, sigma))."""
    z = (math.log(floor) - mu) / sigma
    return floor * stats.norm.cdf(z) + math.exp(mu + sigma**2 / 2) * stats.norm.cdf(sigma - z)


def sample_values(rng: np.random.Generator, size: int, mu: float, sigma: float, floor: float) -> np.ndarray:
    raw = np.maximum(rng.lognormal(mu, sigma, size), floor)
    return np.round(raw * 1000).astype(np.int64)


def deadlock_workload(duration: float, timeout: float, amount: float = 1.0) -> Workload:
    """A->B at 1 token/s, C->B at 2 token/s, B->A at 2 token/s, unit payments."""
    flows = [(A, B, 1.0), (C, B, 2.0), (B, A, 2.0)]
    events = []
    for order, (s, e, rate) in enumerate(flows):
        step = amount / rate
        n = int(math.floor(duration / step + 1e-9))
        for i in range(n):
            events.append((round(i * step, 9), order, s, e))
    events.sort()
    demands = [
        PaymentDemand(i, s, e, to_milli(amount), t, t + timeout) for i, (t, _, s, e) in enumerate(events)
    ]
    return Workload(demands, {(s, e): r for s, e, r in flows})


def _pick_pairs(rng: np.random.Generator, nodes: list[int], count: int) -> list[tuple[int, int]]:
    seen: set[tuple[int, int]] = set()
    out = []
    limit = len(nodes) * (len(nodes) - 1)
    while len(out) < min(count, limit):
        s, e = (int(v) for v in rng.choice(nodes, size=2, replace=False))
        if (s, e) not in seen:
            seen.add((s, e))
            out.append((s, e))
    return out


def generate_workload(
    spec: WorkloadSpec,
    net: Network,
    duration: float,
    timeout: float,
    min_tu: float,
    rng: np.random.Generator,
) -> Workload:
    """Poisson payment arrivals over ``[0, duration)``."""
    spec.validate()
    if spec.kind == "none":
        return Workload([], {})
    if spec.kind == "deadlock":
        return deadlock_workload(duration, timeout, min_tu)

    nodes = net.clients if spec.endpoints == "clients" else net.nodes
    base = _pick_pairs(rng, nodes, spec.pairs)
    flows: dict[tuple[int, int], float] = {}
    for s, e in base:
        lam = spec.pair_rate * rng.uniform(0.5, 1.5)
        flows[(s, e)] = flows.get((s, e), 0.0) + lam
        if spec.symmetric:
            flows[(e, s)] = flows.get((e, s), 0.0) + lam
        elif rng.random() < spec.asymmetric_fraction:
            flows[(e, s)] = flows.get((e, s), 0.0) + lam * spec.asymmetry

    arrivals = []
    for s, e in sorted(flows):
        lam = flows[(s, e)]
        t = rng.exponential(1.0 / lam)
        while t < duration:
            arrivals.append((t, s, e))
            t += rng.exponential(1.0 / lam)
    arrivals.sort()
    values = sample_values(rng, len(arrivals), spec.value_mu, spec.value_sigma, min_tu)
    demands = [
        PaymentDemand(i, s, e, int(v), float(t), float(t) + timeout)
        for i, ((t, s, e), v) in enumerate(zip(arrivals, values))
    ]
    mean_value = value_mean(spec.value_mu, spec.value_sigma, min_tu)
    rates = {pair: lam * mean_value for pair, lam in sorted(flows.items())}
    return Workload(demands, rates)
