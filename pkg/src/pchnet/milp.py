"""Linearized placement model.

Products of binaries in the synchronization cost are replaced by auxiliary
binaries: ``pair[n,l] = x[n] * x[l]`` and ``link[n,l,m] = pair[n,l] * y[m,n]``,
each pinned by three linear rows.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .placement import AssignmentPlan, PlacementPlan, PlacementProblem


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str  # "<=", ">=", "="
    rhs: float
    name: str = ""

    def satisfied(self, values) -> bool:
        lhs = sum(c * values[i] for i, c in self.coeffs.items())
        if self.sense == "<=":
            return lhs <= self.rhs + 1e-9
        if self.sense == ">=":
            return lhs >= self.rhs - 1e-9
        return abs(lhs - self.rhs) <= 1e-9


@dataclass
class MilpModel:
    names: list[str]
    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)
    n_candidates: int = 0
    n_clients: int = 0

    @property
    def n_vars(self) -> int:
        return len(self.names)

    # variable layout ------------------------------------------------------
    def x_index(self, n: int) -> int:
        return n

    def y_index(self, m: int, n: int) -> int:
        return self.n_candidates + m * self.n_candidates + n

    def pair_index(self, n: int, l: int) -> int:
        z = self.n_candidates
        return z + self.n_clients * z + n * z + l

    def link_index(self, n: int, l: int, m: int) -> int:
        z, c = self.n_candidates, self.n_clients
        return z + c * z + z * z + (n * z + l) * c + m

    def point(self, x: PlacementPlan, y: AssignmentPlan) -> np.ndarray:
        """Consistent binary vector for a placement/assignment pair."""
        z, c = self.n_candidates, self.n_clients
        v = np.zeros(self.n_vars)
        xf = x.x.astype(float)
        v[:z] = xf
        v[z : z + c * z] = y.y.astype(float).ravel()
        pair = np.outer(xf, xf)
        for n in range(z):
            for l in range(z):
                v[self.pair_index(n, l)] = pair[n, l]
                for m in range(c):
                    v[self.link_index(n, l, m)] = pair[n, l] * y.y[m, n]
        return v

    def feasible(self, values) -> bool:
        return all(con.satisfied(values) for con in self.constraints)

    def objective_value(self, values) -> float:
        return float(np.dot(self.objective, values))

    def to_lp(self) -> str:
        buf = io.StringIO()
        buf.write("\\ hub placement, linearized\nMinimize\n obj:")
        buf.write(_expr({i: c for i, c in enumerate(self.objective) if c != 0}, self.names))
        buf.write("\nSubject To\n")
        for k, con in enumerate(self.constraints):
            sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
            name = con.name or f"c{k}"
            buf.write(f" {name}:{_expr(con.coeffs, self.names)} {sense} {_num(con.rhs)}\n")
        buf.write("Binary\n")
        for i in range(0, self.n_vars, 8):
            buf.write(" " + " ".join(self.names[i : i + 8]) + "\n")
        buf.write("End\n")
        return buf.getvalue()


def _num(v: float) -> str:
    # shortest text that round-trips the float exactly
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def _expr(coeffs: dict[int, float], names: list[str], per_line: int = 6) -> str:
    if not coeffs:
        return " 0 " + names[0]
    parts = []
    for k, i in enumerate(sorted(coeffs)):
        c = coeffs[i]
        sign = "-" if c < 0 else "+"
        if k and k % per_line == 0:
            parts.append("\n  ")
        parts.append(f" {sign} {_num(abs(c))} {names[i]}")
    return "".join(parts)


def build_milp(problem: PlacementProblem) -> MilpModel:
    z, c = problem.n_candidates, problem.n_clients
    names = [f"x_{n}" for n in range(z)]
    names += [f"y_{m}_{n}" for m in range(c) for n in range(z)]
    names += [f"pair_{n}_{l}" for n in range(z) for l in range(z)]
    names += [f"link_{n}_{l}_{m}" for n in range(z) for l in range(z) for m in range(c)]
    model = MilpModel(names, np.zeros(len(names)), [], z, c)

    om = problem.omega
    obj = model.objective
    for m in range(c):
        for n in range(z):
            obj[model.y_index(m, n)] = problem.zeta[m, n]
    for n in range(z):
        for l in range(z):
            obj[model.pair_index(n, l)] = om * problem.epsilon[n, l]
            for m in range(c):
                obj[model.link_index(n, l, m)] = om * problem.delta[n, l]

    rows = model.constraints
    for m in range(c):
        rows.append(Constraint({model.y_index(m, n): 1.0 for n in range(z)}, "=", 1.0, f"assign_{m}"))
        for n in range(z):
            rows.append(Constraint({model.y_index(m, n): 1.0, model.x_index(n): -1.0}, "<=", 0.0, f"open_{m}_{n}"))
    for n in range(z):
        for l in range(z):
            p = model.pair_index(n, l)
            xn, xl = model.x_index(n), model.x_index(l)
            if n == l:
                # the three rows collapse onto one variable; keep them literal
                rows.append(Constraint({p: 1.0, xn: -1.0}, "<=", 0.0, f"pa_{n}_{l}"))
                rows.append(Constraint({p: 1.0, xl: -1.0}, "<=", 0.0, f"pb_{n}_{l}"))
                rows.append(Constraint({p: 1.0, xn: -2.0}, ">=", -1.0, f"pc_{n}_{l}"))
            else:
                rows.append(Constraint({p: 1.0, xn: -1.0}, "<=", 0.0, f"pa_{n}_{l}"))
                rows.append(Constraint({p: 1.0, xl: -1.0}, "<=", 0.0, f"pb_{n}_{l}"))
                rows.append(Constraint({p: 1.0, xn: -1.0, xl: -1.0}, ">=", -1.0, f"pc_{n}_{l}"))
            for m in range(c):
                k = model.link_index(n, l, m)
                ymn = model.y_index(m, n)
                rows.append(Constraint({k: 1.0, p: -1.0}, "<=", 0.0, f"la_{n}_{l}_{m}"))
                rows.append(Constraint({k: 1.0, ymn: -1.0}, "<=", 0.0, f"lb_{n}_{l}_{m}"))
                rows.append(Constraint({k: 1.0, p: -1.0, ymn: -1.0}, ">=", -1.0, f"lc_{n}_{l}_{m}"))
    return model


def enumerate_feasible(model: MilpModel, chunk_bits: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """All feasible binary points of ``model`` by brute force.

    Returns ``(codes, objective)`` where bit ``i`` of each code is variable
    ``i``.  Only practical for ~24 variables.
    """
    nv = model.n_vars
    if nv > 30:
        raise ValueError(f"{nv} variables is too many to enumerate")
    total = 1 << nv
    step = 1 << min(chunk_bits, nv)
    # equalities prune hardest, so filter with them first
    rows = sorted(model.constraints, key=lambda con: con.sense != "=")
    found_codes, found_obj = [], []
    for start in range(0, total, step):
        hits = np.arange(start, min(total, start + step), dtype=np.int64)
        for con in rows:
            lhs = np.zeros(hits.shape)
            for i, coef in con.coeffs.items():
                lhs += coef * ((hits >> i) & 1)
            if con.sense == "<=":
                hits = hits[lhs <= con.rhs + 1e-9]
            elif con.sense == ">=":
                hits = hits[lhs >= con.rhs - 1e-9]
            else:
                hits = hits[np.abs(lhs - con.rhs) <= 1e-9]
            if not hits.size:
                break
        if hits.size:
            bits = ((hits[:, None] >> np.arange(nv)) & 1).astype(float)
            found_codes.append(hits)
            found_obj.append(bits @ model.objective)
    if not found_codes:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate(found_codes), np.concatenate(found_obj)


def decode(model: MilpModel, code: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a binary point code into its (x, y) blocks."""
    z, c = model.n_candidates, model.n_clients
    bits = np.array([(code >> i) & 1 for i in range(model.n_vars)], dtype=bool)
    return bits[:z], bits[z : z + c * z].reshape(c, z)


def solve_milp(model: MilpModel):
    """Solve with scipy's HiGHS backend; returns ``(values, objective)``."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    a = np.zeros((len(model.constraints), model.n_vars))
    lo = np.full(len(model.constraints), -np.inf)
    hi = np.full(len(model.constraints), np.inf)
    for k, con in enumerate(model.constraints):
        for i, coef in con.coeffs.items():
            a[k, i] = coef
        if con.sense in ("<=", "="):
            hi[k] = con.rhs
        if con.sense in (">=", "="):
            lo[k] = con.rhs
    res = milp(
        model.objective,
        constraints=LinearConstraint(a, lo, hi),
        integrality=np.ones(model.n_vars),
        bounds=Bounds(0, 1),
    )
    if not res.success:
        raise RuntimeError(f"MILP solve failed: {res.message}")
    return np.round(res.x), float(res.fun)
