"""Hub placement under the management / synchronization cost tradeoff.

Candidates and clients are addressed by position (0-based) in the sorted
``candidates`` / ``clients`` id lists of a :class:`PlacementProblem`, so the
lowest position is also the lowest node id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .network import Network


class PlacementError(Exception):
    pass


class DimensionMismatch(PlacementError, ValueError):
    pass


class NoHubPlaced(PlacementError, ValueError):
    pass


class EmptySet(PlacementError, ValueError):
    pass


class TooLarge(PlacementError):
    pass


# cost coefficients per hop used when costs are derived from a network
MGMT_PER_HOP = 0.02
SYNC_PER_HOP = 0.01
SYNC_CONST_PER_HOP = 0.05


@dataclass
class PlacementProblem:
    zeta: np.ndarray  # clients x candidates, management cost
    delta: np.ndarray  # candidates x candidates, per-client sync cost
    epsilon: np.ndarray  # candidates x candidates, constant sync cost
    omega: float = 1.0
    clients: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.delta = np.asarray(self.delta, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        if self.zeta.ndim != 2:
            raise DimensionMismatch("zeta must be a clients x candidates matrix")
        n_cli, n_snc = self.zeta.shape
        if n_snc == 0:
            raise DimensionMismatch("at least one candidate is required")
        for name in ("delta", "epsilon"):
            mat = getattr(self, name)
            if mat.shape != (n_snc, n_snc):
                raise DimensionMismatch(f"{name} must be {n_snc}x{n_snc}, got {mat.shape}")
            if not np.allclose(mat, mat.T) or np.any(np.diag(mat) != 0):
                raise ValueError(f"{name} must be symmetric with a zero diagonal")
        if min(self.zeta.min(initial=0), self.delta.min(), self.epsilon.min()) < 0:
            raise ValueError("costs must be non-negative")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if not self.clients:
            self.clients = list(range(n_cli))
        if not self.candidates:
            self.candidates = list(range(n_snc))
        if len(self.clients) != n_cli or len(self.candidates) != n_snc:
            raise DimensionMismatch("id lists do not match matrix dimensions")

    @property
    def n_clients(self) -> int:
        return self.zeta.shape[0]

    @property
    def n_candidates(self) -> int:
        return self.zeta.shape[1]

    def with_omega(self, omega: float) -> "PlacementProblem":
        return PlacementProblem(self.zeta, self.delta, self.epsilon, omega, list(self.clients), list(self.candidates))

    @classmethod
    def from_network(
        cls,
        net: Network,
        omega: float = 1.0,
        uniform_delta: bool = False,
        mgmt_per_hop: float = MGMT_PER_HOP,
        sync_per_hop: float = SYNC_PER_HOP,
        sync_const_per_hop: float = SYNC_CONST_PER_HOP,
    ) -> "PlacementProblem":
        """Hop-count based costs.  ``uniform_delta`` replaces the per-pair
        sync cost with its off-diagonal mean (the setting in which the set
        function is supermodular)."""
        clients, cands = net.clients, net.candidates
        if not cands:
            raise NoHubPlaced("network has no candidate hubs")
        h_mc = net.hop_matrix(clients, cands)
        h_cc = net.hop_matrix(cands, cands)
        if not (np.isfinite(h_mc).all() and np.isfinite(h_cc).all()):
            raise ValueError("network is disconnected")
        delta = sync_per_hop * h_cc
        if uniform_delta:
            delta = uniform(delta)
        return cls(mgmt_per_hop * h_mc, delta, sync_const_per_hop * h_cc, omega, clients, cands)


def uniform(mat: np.ndarray) -> np.ndarray:
    """Off-diagonal mean broadcast to every off-diagonal cell."""
    n = mat.shape[0]
    off = ~np.eye(n, dtype=bool)
    out = np.zeros_like(mat, dtype=float)
    if n > 1:
        out[off] = mat[off].mean()
    return out


@dataclass(frozen=True)
class PlacementPlan:
    x: np.ndarray  # bool, one entry per candidate

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=bool))
        if not self.x.any():
            raise NoHubPlaced("a placement plan needs at least one hub")

    @classmethod
    def from_set(cls, members: Iterable[int], size: int) -> "PlacementPlan":
        x = np.zeros(size, dtype=bool)
        x[list(members)] = True
        return cls(x)

    @property
    def members(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.x)]

    def hubs(self, problem: PlacementProblem) -> list[int]:
        return [problem.candidates[i] for i in self.members]

    def __eq__(self, other):
        return isinstance(other, PlacementPlan) and np.array_equal(self.x, other.x)

    def __hash__(self):
        return hash(self.x.tobytes())


@dataclass(frozen=True)
class AssignmentPlan:
    y: np.ndarray  # bool, clients x candidates, one True per row

    def __post_init__(self):
        y = np.asarray(self.y, dtype=bool)
        object.__setattr__(self, "y", y)
        if y.ndim != 2 or np.any(y.sum(axis=1) != 1):
            raise ValueError("every client must be assigned to exactly one hub")

    @classmethod
    def from_choice(cls, choice: Sequence[int], n_candidates: int) -> "AssignmentPlan":
        y = np.zeros((len(choice), n_candidates), dtype=bool)
        y[np.arange(len(choice)), list(choice)] = True
        return cls(y)

    @property
    def choice(self) -> np.ndarray:
        return self.y.argmax(axis=1)

    def respects(self, plan: PlacementPlan) -> bool:
        return not np.any(self.y & ~plan.x[None, :])


def _check_plans(problem: PlacementProblem, x: PlacementPlan | None, y: AssignmentPlan) -> None:
    if y.y.shape != problem.zeta.shape:
        raise DimensionMismatch(f"assignment shape {y.y.shape} != {problem.zeta.shape}")
    if x is not None:
        if x.x.shape != (problem.n_candidates,):
            raise DimensionMismatch("placement length does not match candidates")
        if not y.respects(x):
            raise ValueError("client assigned to a candidate that is not placed")


def management_cost(problem: PlacementProblem, y: AssignmentPlan) -> float:
    _check_plans(problem, None, y)
    return float(np.sum(problem.zeta * y.y))


def synchronization_cost(problem: PlacementProblem, x: PlacementPlan, y: AssignmentPlan) -> float:
    """Ordered-pair double sum over placed hubs; diagonal terms vanish."""
    _check_plans(problem, x, y)
    load = y.y.sum(axis=0).astype(float)
    xf = x.x.astype(float)
    pair = np.outer(xf, xf)
    return float(np.sum(pair * (problem.delta * load[:, None] + problem.epsilon)))


def balance_cost(problem: PlacementProblem, x: PlacementPlan, y: AssignmentPlan) -> float:
    return management_cost(problem, y) + problem.omega * synchronization_cost(problem, x, y)


def assignment_scores(problem: PlacementProblem, x: PlacementPlan) -> np.ndarray:
    """Per client/candidate cost of serving the client from that hub; inf if unplaced."""
    sync_load = problem.delta[:, x.x].sum(axis=1)
    scores = problem.zeta + problem.omega * sync_load[None, :]
    return np.where(x.x[None, :], scores, np.inf)


def optimal_assignment(problem: PlacementProblem, x: PlacementPlan) -> AssignmentPlan:
    if x.x.shape != (problem.n_candidates,):
        raise DimensionMismatch("placement length does not match candidates")
    if not x.x.any():
        raise NoHubPlaced("no hub placed")
    # argmin returns the first (lowest-id) minimizer on ties
    choice = assignment_scores(problem, x).argmin(axis=1)
    return AssignmentPlan.from_choice(choice, problem.n_candidates)


def set_function_f(problem: PlacementProblem, members: Iterable[int]) -> float:
    """Balance cost of placing exactly ``members`` with the optimal assignment."""
    members = list(members)
    if not members:
        raise EmptySet("f is undefined on the empty placement")
    plan = PlacementPlan.from_set(members, problem.n_candidates)
    return balance_cost(problem, plan, optimal_assignment(problem, plan))


def f_upper_bound(problem: PlacementProblem) -> float:
    n_cli = problem.n_clients
    mgmt = problem.zeta.max(axis=1).sum() if n_cli else 0.0
    sync = np.sum(problem.delta * n_cli + problem.epsilon)
    return float(mgmt + problem.omega * sync)


@dataclass
class PlacementResult:
    plan: PlacementPlan
    assignment: AssignmentPlan
    management: float
    synchronization: float
    balance: float

    @classmethod
    def evaluate(cls, problem: PlacementProblem, plan: PlacementPlan) -> "PlacementResult":
        y = optimal_assignment(problem, plan)
        cm = management_cost(problem, y)
        cs = synchronization_cost(problem, plan, y)
        return cls(plan, y, cm, cs, cm + problem.omega * cs)

    def report(self, problem: PlacementProblem) -> str:
        lines = [
            "hubs " + " ".join(str(h) for h in self.plan.hubs(problem)),
            f"management_cost {self.management:.12g}",
            f"synchronization_cost {self.synchronization:.12g}",
            f"balance_cost {self.balance:.12g}",
        ]
        for client, idx in zip(problem.clients, self.assignment.choice):
            lines.append(f"assign {client} {problem.candidates[idx]}")
        return "\n".join(lines) + "\n"


def _subset_masks(z: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(z)) & 1).astype(bool)


def subset_costs(problem: PlacementProblem, masks: np.ndarray) -> np.ndarray:
    """f for a batch of placements (rows of ``masks``), vectorized."""
    om = problem.omega
    maskf = masks.astype(float)
    sync_load = maskf @ problem.delta  # (batch, z): sum over placed l of delta[n, l]
    # per client best hub score
    scores = problem.zeta[None, :, :] + om * sync_load[:, None, :]
    scores = np.where(masks[:, None, :], scores, np.inf)
    mgmt_plus_sync = scores.min(axis=2).sum(axis=1)
    const = np.einsum("bn,nl,bl->b", maskf, problem.epsilon, maskf)
    return mgmt_plus_sync + om * const


def solve_exact(problem: PlacementProblem, limit: int = 20, chunk: int = 4096) -> PlacementResult:
    """Global minimizer of the balance cost by enumerating placements.

    The optimal assignment is a closed-form function of the placement, so
    enumerating the ``2^z - 1`` nonempty placements is exhaustive.  Ties are
    broken toward the lexicographically smallest placement vector.
    """
    z = problem.n_candidates
    if z > limit:
        raise TooLarge(f"{z} candidates exceeds the exact-solve limit of {limit}")
    total = 1 << z
    best = np.inf
    contenders: list[int] = []
    for start in range(1, total, chunk):
        stop = min(total, start + chunk)
        costs = subset_costs(problem, _subset_masks(z, start, stop))
        low = costs.min()
        tol = 1e-9 * max(1.0, abs(low))
        if low < best - tol:
            best = low
            contenders = []
        if low <= best + tol:
            best = min(best, low)
            contenders.extend(int(c) + start for c in np.flatnonzero(costs <= best + tol))
    # rescore near-ties exactly with the scalar cost path
    scored = []
    for code in contenders:
        plan = PlacementPlan(_subset_masks(z, code, code + 1)[0])
        res = PlacementResult.evaluate(problem, plan)
        scored.append((res.balance, tuple(int(v) for v in plan.x), res))
    exact_best = min(s[0] for s in scored)
    ties = [s for s in scored if s[0] == exact_best]
    return min(ties, key=lambda s: s[1])[2]


def brute_force(problem: PlacementProblem) -> PlacementResult:
    """Reference solver: loop over every nonempty subset."""
    best = None
    z = problem.n_candidates
    for r in range(1, z + 1):
        for members in itertools.combinations(range(z), r):
            res = PlacementResult.evaluate(problem, PlacementPlan.from_set(members, z))
            key = (res.balance, tuple(int(v) for v in res.plan.x))
            if best is None or key < best[0]:
                best = (key, res)
    return best[1]


@dataclass
class GreedyTrace:
    """What happened inside one double-greedy run."""

    plan: PlacementPlan
    grown: frozenset[int]  # X_z
    shrunk: frozenset[int]  # Y_z
    repaired: bool
    order: list[int]


def _f_hat(problem: PlacementProblem, members: frozenset[int], f_ub: float) -> float:
    if not members:
        return 0.0  # f(empty) := f_ub
    return f_ub - set_function_f(problem, members)


def double_greedy(
    problem: PlacementProblem,
    rng: np.random.Generator,
    shuffle: bool = False,
    return_trace: bool = False,
) -> PlacementPlan | GreedyTrace:
    """Randomized double greedy on ``f_ub - f``.

    Elements are visited in ascending id order unless ``shuffle``.  An empty
    final set is repaired to the best single hub.
    """
    z = problem.n_candidates
    f_ub = f_upper_bound(problem)
    order = list(range(z))
    if shuffle:
        order = [int(i) for i in rng.permutation(z)]
    grown: frozenset[int] = frozenset()
    shrunk: frozenset[int] = frozenset(range(z))
    g_val = _f_hat(problem, grown, f_ub)
    s_val = _f_hat(problem, shrunk, f_ub)
    for u in order:
        g_next = _f_hat(problem, grown | {u}, f_ub)
        s_next = _f_hat(problem, shrunk - {u}, f_ub)
        a = max(g_next - g_val, 0.0)
        b = max(s_next - s_val, 0.0)
        p = 1.0 if a + b == 0 else a / (a + b)
        if rng.random() < p:
            grown, g_val = grown | {u}, g_next
        else:
            shrunk, s_val = shrunk - {u}, s_next
    repaired = False
    members = grown
    if not members:
        single = [set_function_f(problem, [i]) for i in range(z)]
        members = frozenset([int(np.argmin(single))])
        repaired = True
    plan = PlacementPlan.from_set(members, z)
    if return_trace:
        return GreedyTrace(plan, grown, shrunk, repaired, order)
    return plan


def omega_sweep(problem: PlacementProblem, omegas: Sequence[float], solver: str = "exact", seed: int = 0) -> list[dict]:
    """Hub count and costs per weight value."""
    rows = []
    for om in omegas:
        prob = problem.with_omega(om)
        if solver == "exact":
            res = solve_exact(prob)
        elif solver == "greedy":
            res = PlacementResult.evaluate(prob, double_greedy(prob, np.random.default_rng(seed)))
        else:
            raise ValueError(f"unknown solver {solver!r}")
        rows.append(
            {
                "omega": om,
                "hubs": len(res.plan.members),
                "management_cost": float(res.management),
                "synchronization_cost": float(res.synchronization),
                "balance_cost": float(res.balance),
            }
        )
    return rows
