import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roofcut.errors import InputError
from roofcut.lp import FEASIBILITY, OBJECTIVE, LinearCut, MasterProgram, append_cut, solve

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def brute_force_y(mp):
    """Best y over all feasible vertices: solve every (n+1)-subset of constraints."""
    R, b = mp.rows()
    n, big = mp.dim, mp.box_bound
    rows, rhs = list(R), list(b)
    for j in range(n):
        e = np.zeros(n + 1)
        e[j] = 1.0
        rows += [e, -e]
        rhs += [big, big]
    rows, rhs = np.array(rows), np.array(rhs)
    best = -np.inf
    for subset in itertools.combinations(range(len(rows)), n + 1):
        A = rows[list(subset)]
        if abs(np.linalg.det(A)) < 1e-10:
            continue
        z = np.linalg.solve(A, rhs[list(subset)])
        if np.all(rows @ z <= rhs + 1e-9):
            best = max(best, z[-1])
    return best


def random_program(rng, max_dim=4, max_cuts=6):
    n = int(rng.integers(1, max_dim + 1))
    mp = MasterProgram.initial(rng.normal(size=n), rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0))
    for _ in range(int(rng.integers(0, max_cuts + 1))):
        mp = append_cut(mp, LinearCut.feasibility(rng.normal(size=n), rng.uniform(0.0, 1.0)))
    return mp


def test_step_zero_program():
    mp = MasterProgram.initial(np.array([1.0, 0, 0, 0]), 2.0, 1.0)
    sol = solve(mp)
    assert sol.status == "optimal"
    assert sol.y == pytest.approx(3.0)
    assert np.allclose(sol.x, [-2, 0, 0, 0])


def test_two_constraint_intersection():
    c = np.array([1.0, 0.0])
    mp = append_cut(MasterProgram.initial(c, 5.0, 1.0), LinearCut.feasibility(c, 0.0))
    sol = solve(mp)
    assert sol.y == pytest.approx(0.5)
    assert sol.x[0] == pytest.approx(0.5)


def test_zero_box():
    c = np.array([0.6, 0.8])
    sol = solve(MasterProgram.initial(c, 0.0, 1.5))
    assert np.allclose(sol.x, 0)
    assert sol.y == pytest.approx(1.5)


@given(seeds)
def test_matches_vertex_enumeration(seed):
    mp = random_program(np.random.default_rng(seed))
    assert solve(mp).y == pytest.approx(brute_force_y(mp), abs=1e-8)


@given(seeds)
def test_solution_satisfies_every_cut(seed):
    rng = np.random.default_rng(seed)
    mp = random_program(rng, max_dim=9, max_cuts=30)
    sol = solve(mp)
    for cut in mp.cuts:
        assert cut.slack(sol.x, sol.y) >= -1e-9
    assert np.all(np.abs(sol.x) <= mp.box_bound + 1e-9)


@given(seeds)
def test_appending_never_increases_y(seed):
    rng = np.random.default_rng(seed)
    n = 5
    mp = MasterProgram.initial(rng.normal(size=n), 10.0, 2.0)
    ys = [solve(mp).y]
    for _ in range(12):
        mp = append_cut(mp, LinearCut.feasibility(rng.normal(size=n), rng.uniform(0, 1)))
        ys.append(solve(mp).y)
    assert all(b <= a + 1e-12 for a, b in zip(ys, ys[1:]))


def test_duplicate_cut_is_harmless(rng):
    mp = random_program(rng, max_cuts=3)
    before = solve(mp)
    again = solve(append_cut(mp, mp.cuts[-1]))
    assert again.y == pytest.approx(before.y, abs=1e-12)


def test_objective_cut_removes_previous_point(rng):
    c = rng.normal(size=3)
    mp = MasterProgram.initial(c, 4.0, 1.0)
    mp = append_cut(mp, LinearCut.feasibility(rng.normal(size=3), 0.2))
    sol = solve(mp)
    assert sol.y > 0
    cut = LinearCut.objective(c, float(c @ sol.x))
    assert cut.slack(sol.x, sol.y) < 0
    assert solve(append_cut(mp, cut)).y < sol.y


def test_deterministic(rng):
    mp = random_program(rng, max_dim=6, max_cuts=20)
    a, b = solve(mp), solve(mp)
    assert a.y == b.y and np.array_equal(a.x, b.x)


def test_cut_encoding():
    c = np.array([3.0, 4.0])
    obj = LinearCut.objective(c, 2.0)
    assert obj.kind == OBJECTIVE and obj.y_coeff == pytest.approx(5.0)
    feas = LinearCut.feasibility(c, 0.25)
    assert feas.kind == FEASIBILITY and feas.y_coeff == pytest.approx(-5.0)
    assert feas.offset == pytest.approx(-0.25)
    # <psi, x> - y |psi| >= -E  at x = 0, y = 0 holds with slack E
    assert feas.slack(np.zeros(2), 0.0) == pytest.approx(0.25)


def test_bad_inputs():
    mp = MasterProgram.initial(np.ones(2), 1.0, 1.0)
    with pytest.raises(InputError):
        append_cut(mp, LinearCut.feasibility(np.ones(3), 0.0))
    with pytest.raises(InputError):
        LinearCut("other", np.ones(2), 0.0, 1.0)
    with pytest.raises(InputError):
        solve(MasterProgram(2, 1.0))


def test_large_program_runs(rng):
    # the shape of a rank-8 master: 65 variables, hundreds of cuts
    n = 64
    mp = MasterProgram.initial(rng.normal(size=n), 500.0, 2.0)
    for _ in range(300):
        v = rng.normal(size=n)
        mp = append_cut(mp, LinearCut.feasibility(v / np.linalg.norm(v), rng.uniform(0, 1)))
    sol = solve(mp)
    R, b = mp.rows()
    assert np.all(R @ np.append(sol.x, sol.y) <= b + 1e-8)
    assert sol.multipliers and all(v >= -1e-9 for v in sol.multipliers.values())


def test_large_box_y_is_monotone_to_round_off(rng):
    # box and y of the size seen on rank-8 instances; the returned vertex must not drift
    n = 64
    mp = MasterProgram.initial(rng.normal(size=n) * 0.1, 1848.0, 1.6)
    prev = solve(mp).y
    for _ in range(40):
        for _ in range(8):
            v = rng.normal(size=n)
            mp = append_cut(mp, LinearCut.feasibility(v / np.linalg.norm(v), rng.uniform(0, 1)))
        sol = solve(mp)
        assert sol.y <= prev + 1e-9
        prev = sol.y
