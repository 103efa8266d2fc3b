import itertools

import numpy as np
import pytest

from conftest import random_problem
from pchnet.milp import build_milp, decode, enumerate_feasible, solve_milp
from pchnet.placement import AssignmentPlan, PlacementPlan, balance_cost, solve_exact


def consistent_points(model, p):
    """Codes of every (x, y) pair with y assigning clients to placed hubs."""
    z, c = p.n_candidates, p.n_clients
    out = {}
    for bits in itertools.product([False, True], repeat=z):
        if not any(bits):
            continue
        x = PlacementPlan(np.array(bits))
        placed = x.members
        for choice in itertools.product(placed, repeat=c):
            y = AssignmentPlan.from_choice(choice, z)
            v = model.point(x, y)
            code = int(sum(1 << i for i, b in enumerate(v) if b))
            out[code] = balance_cost(p, x, y)
    return out


@pytest.mark.parametrize("z,c", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_feasible_set_is_exactly_the_consistent_points(z, c, rng):
    p = random_problem(rng, c, z)
    model = build_milp(p)
    codes, obj = enumerate_feasible(model)
    want = consistent_points(model, p)
    assert sorted(int(k) for k in codes) == sorted(want)
    for code, value in zip(codes, obj):
        assert abs(value - want[int(code)]) <= 1e-9


def test_variable_count():
    for z, c in [(1, 1), (3, 4), (5, 2)]:
        p = random_problem(np.random.default_rng(0), c, z)
        assert build_milp(p).n_vars == z + c * z + z * z + z * z * c


def test_pair_variable_logic(rng):
    p = random_problem(rng, 1, 2)
    model = build_milp(p)
    y = AssignmentPlan.from_choice([0], 2)
    both = model.point(PlacementPlan.from_set([0, 1], 2), y)
    assert both[model.pair_index(0, 1)] == 1 and model.feasible(both)
    wrong = both.copy()
    wrong[model.pair_index(0, 1)] = 0
    assert not model.feasible(wrong)
    one = model.point(PlacementPlan.from_set([0], 2), y)
    assert one[model.pair_index(0, 1)] == 0
    wrong = one.copy()
    wrong[model.pair_index(0, 1)] = 1
    assert not model.feasible(wrong)


def test_decode_inverts_point(rng):
    p = random_problem(rng, 2, 2)
    model = build_milp(p)
    x, y = PlacementPlan.from_set([1], 2), AssignmentPlan.from_choice([1, 1], 2)
    v = model.point(x, y)
    code = int(sum(1 << i for i, b in enumerate(v) if b))
    dx, dy = decode(model, code)
    assert (dx == x.x).all() and (dy == y.y).all()


def test_highs_agrees_with_exact(rng):
    for _ in range(3):
        p = random_problem(rng, 5, 4)
        _, obj = solve_milp(build_milp(p))
        assert obj == pytest.approx(solve_exact(p).balance, rel=1e-7, abs=1e-9)


def test_lp_export_deterministic(rng):
    p = random_problem(rng, 3, 3)
    text = build_milp(p).to_lp()
    assert text == build_milp(p).to_lp()
    assert text.startswith("\\") and text.rstrip().endswith("End")
    assert "Binary" in text and "Subject To" in text
