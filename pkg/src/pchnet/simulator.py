"""Deterministic time-stepped payment network simulator.

Time advances in ticks of one per-hop latency.  Every ``tau`` seconds the
hubs close an epoch: prices, path rates and windows are refreshed and a
deadlock scan runs.  Payments travel as transaction units that lock funds
hop by hop; a payment settles only when every one of its units has been
acknowledged, otherwise all its locks are refunded at the deadline.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict, deque
from dataclasses import asdict, dataclass, field

import numpy as np

from . import congestion as cc
from .network import Network, NetworkSpec, PaymentDemand, build_network, to_milli
from .paths import NoPath, PathKind, compute_paths
from .placement import (
    AssignmentPlan,
    PlacementPlan,
    PlacementProblem,
    PlacementResult,
    double_greedy,
    solve_exact,
)
from .routing import (
    RateController,
    RateParams,
    TransactionUnit,
    TUState,
    forwarding_fee,
    split_demand,
)
from .workload import Workload, WorkloadSpec, generate_workload

TRACE_HEADER = ["time", "channel", "direction", "lambda", "mu", "xi", "rate", "queue_len", "window"]
TRACE_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    network: NetworkSpec = field(default_factory=lambda: NetworkSpec(nodes=100, candidates=10))
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    placement: str = "greedy"  # exact | greedy | fixed | none
    hubs: list[int] = field(default_factory=list)  # used when placement == "fixed"
    omega: float = 0.04
    uniform_delta: bool = False
    routing: str = "splicer"  # splicer | waterfill | shortest
    path_kind: str = "edw"
    k: int = 5
    scheduler: str = "fifo"
    min_tu: float = 1.0
    max_tu: float = 4.0
    tau: float = 0.2
    epoch: float | None = None  # defaults to tau
    mark_threshold: float = 0.4
    hop_latency: float = 0.01
    initial_rtt: float = 0.1
    rtt_smoothing: float = 0.1
    kappa: float = 0.002
    eta: float = 0.02
    alpha: float = 0.5
    beta: float = 10.0
    gamma: float = 0.1
    t_fee: float = 0.1
    balance_eps: float = 0.1
    demand_headroom: float = 2.0
    initial_rate: float | None = None
    burst: float = 3.0  # seconds of rate credit a path may bank
    w_init: float = cc.W_INIT
    w_min: float = cc.W_MIN
    queue_limit: float = 8000.0
    timeout: float = 3.0
    duration: float = 60.0
    seed: int = 0
    trace: bool = False

    def validate(self) -> None:
        positive = (
            "tau", "mark_threshold", "hop_latency", "initial_rtt", "kappa", "eta", "alpha", "beta",
            "gamma", "balance_eps", "demand_headroom", "burst", "queue_limit", "timeout", "min_tu", "max_tu",
        )  # fmt: skip
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.duration < 0:
            raise ConfigError("duration must be non-negative")
        if self.min_tu > self.max_tu:
            raise ConfigError("min_tu must not exceed max_tu")
        if not 0 < self.t_fee < 1:
            raise ConfigError("t_fee must lie in (0, 1)")
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.placement not in ("exact", "greedy", "fixed", "none"):
            raise ConfigError(f"unknown placement mode {self.placement!r}")
        if self.routing not in ("splicer", "waterfill", "shortest"):
            raise ConfigError(f"unknown routing mode {self.routing!r}")
        try:
            PathKind(self.path_kind)
            cc.Policy(self.scheduler)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.placement == "fixed" and not self.hubs:
            raise ConfigError("fixed placement needs a hub list")
        if self.omega < 0:
            raise ConfigError("omega must be non-negative")
        ticks = self.tau / self.hop_latency
        if abs(ticks - round(ticks)) > 1e-9:
            raise ConfigError("tau must be a multiple of hop_latency")


@dataclass
class SimMetrics:
    generated: int = 0
    completed: int = 0
    aborted: int = 0
    generated_value: float = 0.0
    completed_value: float = 0.0
    tsr: float = 1.0
    normalized_throughput: float = 0.0
    avg_delay: float = 0.0
    control_messages: int = 0
    control_message_hops: int = 0
    deadlock_events: int = 0
    fees_paid: float = 0.0
    queue_overflows: int = 0
    marked_units: int = 0

    def summary(self) -> str:
        return "".join(f"{k} {_fmt(v)}\n" for k, v in asdict(self).items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


@dataclass
class DeadlockEvent:
    time: float
    node: int
    blocked: list[tuple[int, int]]


def detect_deadlock(net: Network, pending, now: float = 0.0) -> list[DeadlockEvent]:
    """Nodes where every direction some pending unit needs is out of funds.

    ``pending`` holds ``(node, next_node, amount)`` triples.
    """
    need: dict[int, dict[int, int]] = defaultdict(dict)
    for u, v, amount in pending:
        if amount <= 0:
            continue
        prev = need[u].get(v)
        need[u][v] = amount if prev is None else min(prev, amount)
    events = []
    for u in sorted(need):
        dirs = need[u]
        if all(net.balance(u, v) < amt for v, amt in dirs.items()):
            events.append(DeadlockEvent(now, u, sorted((u, v) for v in dirs)))
    return events


@dataclass
class CommCosts:
    avg_delay: float
    management_messages: int
    management_hops: float
    sync_messages: int
    sync_hops: float

    @property
    def total_overhead(self) -> float:
        return self.management_hops + self.sync_hops


def communication_costs(
    net: Network,
    problem: PlacementProblem,
    plan: PlacementPlan,
    assignment: AssignmentPlan,
    demands=(),
    hop_latency: float = 0.01,
) -> CommCosts:
    """Per-epoch control traffic of a hub layout and the routing-request delay.

    Delay of a payment s->e is the hop latency times the hops s->hub(s),
    hub(s)->hub(e) and hub(e)->e.  Every client reports to its hub once per
    epoch; every ordered hub pair exchanges one sync message per epoch.
    """
    hub_of = {c: problem.candidates[i] for c, i in zip(problem.clients, assignment.choice)}
    hubs = plan.hubs(problem)
    for h in hubs:
        hub_of[h] = h
    for n in problem.candidates:
        hub_of.setdefault(n, min(hubs, key=lambda h: (net.hops[net._index[n], net._index[h]], h)))

    def hops(a, b):
        return float(net.hops[net._index[a], net._index[b]])

    mgmt_hops = sum(hops(c, hub_of[c]) for c in problem.clients)
    sync_hops = sum(hops(a, b) for a in hubs for b in hubs if a != b)
    delays = []
    for d in demands:
        s, e = (d.source, d.dest) if isinstance(d, PaymentDemand) else d
        hs, he = hub_of[s], hub_of[e]
        delays.append((hops(s, hs) + hops(hs, he) + hops(he, e)) * hop_latency)
    return CommCosts(
        avg_delay=float(np.mean(delays)) if delays else 0.0,
        management_messages=len(problem.clients),
        management_hops=mgmt_hops,
        sync_messages=len(hubs) * (len(hubs) - 1),
        sync_hops=sync_hops,
    )


@dataclass(eq=False)
class _Parent:
    demand: PaymentDemand
    units: list[TransactionUnit]
    acked: int = 0
    status: str = "active"  # active | completed | aborted


@dataclass
class SimResult:
    metrics: SimMetrics
    config: SimConfig
    completions: list[tuple[float, int, int, float]]  # time, source, dest, tokens
    trace: list[list]
    deadlocks: list[DeadlockEvent]
    hubs: list[int]
    rate_history: list[tuple[float, dict]]
    network: Network
    controller: RateController | None

    def throughput_between(self, pairs, start: float, stop: float) -> float:
        """Completed tokens per second over ``[start, stop)`` for the given pairs."""
        pairs = set(pairs)
        vol = sum(v for t, s, e, v in self.completions if start <= t < stop and (s, e) in pairs)
        return vol / (stop - start)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# pchnet channel trace v{TRACE_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        w.writerows(self.trace)
        return buf.getvalue()

    def throughput_csv(self, bucket: float = 1.0) -> str:
        horizon = self.config.duration + self.config.timeout
        n = int(math.ceil(horizon / bucket))
        vol = [0.0] * max(n, 1)
        for t, _, _, v in self.completions:
            vol[min(int(t // bucket), len(vol) - 1)] += v
        buf = io.StringIO()
        buf.write(f"# pchnet throughput v{TRACE_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "tokens_per_sec"])
        for i, v in enumerate(vol):
            w.writerow([f"{i * bucket:.3f}", f"{v / bucket:.6f}"])
        return buf.getvalue()


class Simulator:
    def __init__(self, cfg: SimConfig, net: Network | None = None, workload: Workload | None = None):
        cfg.validate()
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.net = net if net is not None else build_network(cfg.network)
        self.start_funds = self.net.total_funds()
        self.workload = workload if workload is not None else generate_workload(
            cfg.workload, self.net, cfg.duration, cfg.timeout, cfg.min_tu, self.rng
        )
        self.dt = cfg.hop_latency
        self.tau_ticks = int(round(cfg.tau / self.dt))
        self.epoch_ticks = int(round((cfg.epoch or cfg.tau) / self.dt))
        self.min_tu = to_milli(cfg.min_tu)
        self.max_tu = to_milli(cfg.max_tu)
        self.policy = cc.Policy(cfg.scheduler)
        self.metrics = SimMetrics()
        self.hubs, self.placement = self._place()

        self.paths = self._compute_paths()
        self.delta = cfg.initial_rtt
        params = RateParams(
            cfg.kappa, cfg.eta, cfg.alpha, cfg.t_fee, headroom=cfg.demand_headroom, initial_rate=cfg.initial_rate
        )
        demand = {p: r for p, r in self.workload.rates.items() if p in self.paths}
        self.ctrl = RateController(self.net, self.paths, demand, params, self.delta)
        for states in self.ctrl.flows.values():
            for ps in states:
                ps.window = cfg.w_init
                ps.credit = cfg.max_tu
        self.queues: dict[tuple[int, int], cc.ChannelQueue] = {}
        self.busy_queues: set[tuple[int, int]] = set()
        self.backlog: dict[tuple[int, int], deque] = defaultdict(deque)
        self.active_flows: set[tuple[int, int]] = set()
        self.parents: dict[int, _Parent] = {}
        self.events: dict[int, list] = defaultdict(list)
        self.deadline_at: dict[int, list[int]] = defaultdict(list)
        self.arrived: dict[tuple[int, int], float] = defaultdict(float)
        self.blocked: list[tuple[int, int, int]] = []
        self.completions: list[tuple[float, int, int, float]] = []
        self.trace: list[list] = []
        self.deadlocks: list[DeadlockEvent] = []
        self.rate_history: list[tuple[float, dict]] = []
        self.delays: list[float] = []
        self.credit_tick: dict[int, int] = {}
        self.tick = 0

    # ---- setup -----------------------------------------------------------

    def _place(self) -> tuple[list[int], PlacementResult | None]:
        cfg = self.cfg
        if cfg.placement == "none" or not self.net.candidates:
            return [], None
        problem = PlacementProblem.from_network(self.net, cfg.omega, cfg.uniform_delta)
        if cfg.placement == "exact":
            res = solve_exact(problem)
        elif cfg.placement == "greedy":
            res = PlacementResult.evaluate(problem, double_greedy(problem, np.random.default_rng(cfg.seed)))
        else:
            idx = [problem.candidates.index(h) for h in cfg.hubs]
            res = PlacementResult.evaluate(problem, PlacementPlan.from_set(idx, problem.n_candidates))
        self.problem = problem
        return res.plan.hubs(problem), res

    def _compute_paths(self) -> dict[tuple[int, int], list[tuple[int, ...]]]:
        cfg = self.cfg
        graph = self.net.graph()
        out = {}
        k = 1 if cfg.routing == "shortest" else cfg.k
        kind = PathKind.KSP if cfg.routing == "shortest" else PathKind(cfg.path_kind)
        for pair in sorted(self.workload.rates):
            try:
                out[pair] = compute_paths(self.net, pair[0], pair[1], k, kind, graph)
            except NoPath:
                continue
        return out

    # ---- fund movement ---------------------------------------------------

    def _queue(self, u: int, v: int) -> cc.ChannelQueue:
        q = self.queues.get((u, v))
        if q is None:
            q = self.queues[(u, v)] = cc.ChannelQueue((u, v), limit=to_milli(self.cfg.queue_limit))
        return q

    def _forward(self, tu: TransactionUnit) -> None:
        u, v = tu.next_hop
        self.net.hold(u, v, tu.amount)
        tu.held_hops.append((u, v))
        tu.state = TUState.IN_FLIGHT
        key = (u, v) if u < v else (v, u)
        fee = forwarding_fee(self.ctrl.prices[key], self.cfg.t_fee, 0 if u < v else 1)
        self.metrics.fees_paid += fee
        self.events[self.tick + 1].append(("arrive", tu))

    def _offer(self, tu: TransactionUnit, ps) -> None:
        """A unit shows up at a node wanting to cross the next channel."""
        u, v = tu.next_hop
        self.arrived[(u, v)] += tu.amount / 1000
        ch = self.net.channel(u, v)
        r_process = ch.capacity / 1000 / max(self.delta, 1e-9)
        if self.net.balance(u, v) >= tu.amount and (ps is None or ps.rate <= r_process):
            self._forward(tu)
            return
        try:
            cc.enqueue(self._queue(u, v), tu, self.tick * self.dt)
            self.busy_queues.add((u, v))
        except cc.QueueOverflow:
            self.metrics.queue_overflows += 1
            self._abort(self.parents[tu.parent])

    def _serve(self, u: int, v: int) -> None:
        q = self.queues.get((u, v))
        while q is not None and q.entries:
            tu = cc.dequeue_next(q, self.policy, self.net.balance(u, v))
            if tu is None:
                break
            self._forward(tu)
        if q is not None and not q.entries:
            self.busy_queues.discard((u, v))

    def _release(self, tu: TransactionUnit, settle: bool) -> None:
        touched = []
        for u, v in reversed(tu.held_hops):
            if settle:
                self.net.settle(u, v, tu.amount)
                touched.append((v, u))
            else:
                self.net.refund(u, v, tu.amount)
                touched.append((u, v))
        tu.held_hops = []
        for u, v in touched:
            self._serve(u, v)

    # ---- payment lifecycle -----------------------------------------------

    def _path_state(self, tu: TransactionUnit):
        states = self.ctrl.flows.get((tu.path[0], tu.path[-1]))
        return states[tu.path_index] if states else None

    def _abort(self, parent: _Parent) -> None:
        if parent.status != "active":
            return
        parent.status = "aborted"
        self.metrics.aborted += 1
        for tu in parent.units:
            if tu.state is TUState.QUEUED:
                u, v = tu.next_hop
                self.queues[(u, v)].remove(tu)
                if not self.queues[(u, v)].entries:
                    self.busy_queues.discard((u, v))
            sent = tu.state in (TUState.IN_FLIGHT, TUState.QUEUED, TUState.DELIVERED)
            if sent and self.cfg.routing == "splicer":
                ps = self._path_state(tu)
                ps.outstanding -= 1
                if tu.marked:
                    cc.window_on_abort(ps, self.cfg.beta, self.cfg.w_min)
            tu.state = TUState.ABORTED
        for tu in parent.units:
            self._release(tu, settle=False)

    def _complete(self, parent: _Parent) -> None:
        parent.status = "completed"
        d = parent.demand
        now = self.tick * self.dt
        self.metrics.completed += 1
        self.metrics.completed_value += d.value / 1000
        self.completions.append((now, d.source, d.dest, d.value / 1000))
        self.delays.append(now - d.created_at)
        for tu in parent.units:
            tu.state = TUState.COMPLETED
            self._release(tu, settle=True)

    def _arrive(self, tu: TransactionUnit) -> None:
        if tu.state is TUState.ABORTED:
            return
        tu.hop += 1
        if tu.hop == len(tu.path) - 1:
            tu.state = TUState.DELIVERED
            back = max(1, len(tu.path) - 1)
            self.events[self.tick + back].append(("ack", tu))
            self.metrics.control_messages += 1
            self.metrics.control_message_hops += back
            return
        self._offer(tu, self._path_state(tu) if self.cfg.routing == "splicer" else None)

    def _ack(self, tu: TransactionUnit) -> None:
        if tu.state is TUState.ABORTED:
            return
        parent = self.parents[tu.parent]
        if self.cfg.routing == "splicer":
            ps = self._path_state(tu)
            ps.outstanding -= 1
            if not tu.marked:
                cc.window_on_success(ps, self.ctrl.flows[(tu.path[0], tu.path[-1])], self.cfg.gamma)
            rtt = self.tick * self.dt - tu.sent_at
            a = self.cfg.rtt_smoothing
            self.delta = (1 - a) * self.delta + a * rtt
        parent.acked += 1
        if parent.acked == len(parent.units) and parent.status == "active":
            self._complete(parent)

    def _new_demand(self, d: PaymentDemand) -> None:
        m = self.metrics
        m.generated += 1
        m.generated_value += d.value / 1000
        pair = (d.source, d.dest)
        paths = self.paths.get(pair)
        if not paths:
            m.aborted += 1
            return
        if self.cfg.routing == "shortest":
            self._instant(d, paths[0])
            return
        try:
            units = split_demand(d, self.min_tu, self.max_tu, len(paths))
        except ValueError:
            m.aborted += 1
            return
        parent = _Parent(d, units)
        self.parents[d.id] = parent
        deadline_tick = int(round(d.deadline / self.dt))
        self.deadline_at[max(deadline_tick, self.tick + 1)].append(d.id)
        if self.cfg.routing == "waterfill":
            for tu in units:
                best = max(range(len(paths)), key=lambda i: (self._bottleneck(paths[i]), -i))
                tu.path_index = best
                tu.path = paths[best]
                tu.sent_at = self.tick * self.dt
                self._offer(tu, None)
        else:
            self.backlog[pair].extend(units)
            self.active_flows.add(pair)

    def _bottleneck(self, path) -> int:
        return min(self.net.balance(u, v) for u, v in zip(path[:-1], path[1:]))

    def _instant(self, d: PaymentDemand, path) -> None:
        hops = list(zip(path[:-1], path[1:]))
        for u, v in hops:
            if self.net.balance(u, v) < d.value:
                self.blocked.append((u, v, d.value))
                self.metrics.aborted += 1
                return
        for u, v in hops:
            self.net.transfer(u, v, d.value)
        now = self.tick * self.dt
        self.metrics.completed += 1
        self.metrics.completed_value += d.value / 1000
        self.completions.append((now, d.source, d.dest, d.value / 1000))
        self.delays.append(len(hops) * self.dt)

    def _accrue(self, states) -> None:
        """Bring the rate credit of some paths up to the current tick."""
        for ps in states:
            elapsed = (self.tick - self.credit_tick.get(id(ps), 0)) * self.dt
            if elapsed > 0:
                cap = max(self.cfg.max_tu, ps.rate * self.cfg.burst)
                ps.credit = min(ps.credit + ps.rate * elapsed, cap)
            self.credit_tick[id(ps)] = self.tick

    def _dispatch(self) -> None:
        """Sources release queued units onto paths with window and rate credit.

        Paths are tried in their preference order (widest or shortest
        first); a unit spills onto a later path only once the earlier ones
        have run out of rate credit or window.
        """
        now = self.tick * self.dt
        done = []
        for pair in sorted(self.active_flows):
            queue = self.backlog[pair]
            states = self.ctrl.flows[pair]
            paths = self.paths[pair]
            self._accrue(states)
            while queue:
                if self.parents[queue[0].parent].status != "active":
                    queue.popleft()
                    continue
                i = next((j for j, ps in enumerate(states) if ps.credit > 0 and cc.admit(ps)), None)
                if i is None:
                    break
                ps = states[i]
                tu = queue.popleft()
                tu.path_index = i
                tu.path = paths[i]
                tu.sent_at = now
                ps.credit -= tu.amount / 1000
                ps.outstanding += 1
                self._offer(tu, ps)
            if not queue:
                done.append(pair)
        for pair in done:
            self.active_flows.discard(pair)

    def _update_rates(self) -> None:
        for states in self.ctrl.flows.values():
            self._accrue(states)
        self.ctrl.set_delta(self.delta)
        self.ctrl.update(dict(self.arrived), self.cfg.tau)

    # ---- epochs ----------------------------------------------------------

    def _epoch(self) -> None:
        now = self.tick * self.dt
        cfg = self.cfg
        if cfg.routing == "splicer":
            self._update_rates()
            paths = sum(len(s) for s in self.ctrl.flows.values())
            hops = sum(len(ps.path) - 1 for s in self.ctrl.flows.values() for ps in s)
            self.metrics.control_messages += paths
            self.metrics.control_message_hops += hops
            self.rate_history.append((now, self.ctrl.directional_rates()))
        self.arrived = defaultdict(float)
        if self.hubs:
            h = len(self.hubs)
            self.metrics.control_messages += h * (h - 1)
            cost = self._hub_costs
            self.metrics.control_message_hops += int(cost.sync_hops + cost.management_hops)
            self.metrics.control_messages += cost.management_messages

        pending = list(self.blocked)
        for (u, v) in sorted(self.busy_queues):
            q = self.queues[(u, v)]
            if q.entries:
                pending.append((u, v, min(e.tu.amount for e in q.entries)))
        self.blocked = []
        events = detect_deadlock(self.net, pending, now)
        self.deadlocks.extend(events)
        self.metrics.deadlock_events += len(events)
        if cfg.trace:
            self._trace_rows(now)

    def _trace_rows(self, now: float) -> None:
        windows: dict[tuple[int, int], list[float]] = defaultdict(list)
        for states in self.ctrl.flows.values():
            for ps in states:
                for hop in ps.hops:
                    windows[hop].append(ps.window)
        for (a, b), st in self.ctrl.prices.items():
            for d, (u, v) in enumerate(((a, b), (b, a))):
                q = self.queues.get((u, v))
                w = windows.get((u, v))
                self.trace.append([
                    f"{now:.3f}", f"{a}-{b}", f"{u}->{v}", f"{st.lam:.9g}", f"{st.mu[d]:.9g}",
                    f"{2 * st.lam + st.mu[d] - st.mu[1 - d]:.9g}", f"{st.rate[d]:.9g}",
                    len(q.entries) if q else 0, f"{np.mean(w):.6g}" if w else "",
                ])  # fmt: skip

    # ---- main loop -------------------------------------------------------

    def run(self) -> SimResult:
        cfg = self.cfg
        if self.hubs:
            self._hub_costs = communication_costs(
                self.net, self.problem, self.placement.plan, self.placement.assignment, (), cfg.hop_latency
            )
        arrivals: dict[int, list[PaymentDemand]] = defaultdict(list)
        for d in self.workload.demands:
            arrivals[int(round(d.created_at / self.dt))].append(d)
        horizon = int(round((cfg.duration + cfg.timeout) / self.dt)) + 1
        mark_every = 1
        threshold = cfg.mark_threshold
        for tick in range(horizon + 1):
            self.tick = tick
            now = tick * self.dt
            if tick % self.epoch_ticks == 0 and tick > 0:
                self._epoch()
            elif tick % self.tau_ticks == 0 and tick > 0 and cfg.routing == "splicer":
                self._update_rates()
                self.arrived = defaultdict(float)
            for kind, tu in self.events.pop(tick, ()):
                if kind == "arrive":
                    self._arrive(tu)
                else:
                    self._ack(tu)
            for pid in self.deadline_at.pop(tick, ()):
                parent = self.parents[pid]
                if parent.status == "active":
                    self._abort(parent)
            for d in arrivals.pop(tick, ()):
                self._new_demand(d)
            if cfg.routing == "splicer" and self.active_flows:
                self._dispatch()
            if tick % mark_every == 0 and self.busy_queues:
                for key in sorted(self.busy_queues):
                    fresh = cc.mark_overdue(self.queues[key], now, threshold)
                    self.metrics.marked_units += len(fresh)
        return self._finish()

    def _finish(self) -> SimResult:
        m = self.metrics
        for parent in self.parents.values():
            if parent.status == "active":
                self._abort(parent)
        m.tsr = m.completed / m.generated if m.generated else 1.0
        m.normalized_throughput = m.completed_value / m.generated_value if m.generated_value else 0.0
        m.avg_delay = float(np.mean(self.delays)) if self.delays else 0.0
        if self.net.total_funds() != self.start_funds:
            raise AssertionError("fund conservation violated")
        return SimResult(
            metrics=m,
            config=self.cfg,
            completions=self.completions,
            trace=self.trace,
            deadlocks=self.deadlocks,
            hubs=self.hubs,
            rate_history=self.rate_history,
            network=self.net,
            controller=self.ctrl if self.cfg.routing == "splicer" else None,
        )


def run(cfg: SimConfig, net: Network | None = None, workload: Workload | None = None) -> SimResult:
    return Simulator(cfg, net, workload).run()


def deadlock_config(routing: str = "splicer", duration: float = 60.0, **overrides) -> SimConfig:
    """Three-node A-C-B preset with 10 tokens per channel side.

    Unit payments on a 20-token topology need much stiffer imbalance prices
    and gentler rate steps than the general defaults; paths also start slow
    so the relay is not drained before the prices build up.
    """
    spec = NetworkSpec(nodes=3, candidates=1, candidate_ids=[2], edges=[(0, 2), (2, 1)], capacity=20.0)
    base = dict(
        network=spec,
        workload=WorkloadSpec(kind="deadlock"),
        placement="fixed",
        hubs=[2],
        routing=routing,
        k=1,
        duration=duration,
        eta=1.5,
        alpha=0.007,
        demand_headroom=1.0,
        initial_rate=0.1,
    )
    base.update(overrides)
    return SimConfig(**base)
