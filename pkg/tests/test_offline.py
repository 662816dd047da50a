import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewardsched.bigm import bigm_sum
from rewardsched.feasibility import check_feasibility, integer_points
from rewardsched.generators import random_system
from rewardsched.model import TaskSpec, TaskSystem
from rewardsched.offline import (
    ConvexDecomposition,
    InfeasibleSystemError,
    OfflinePolicy,
    decompose,
    edf_schedule,
    edf_trace,
    in_polytope,
    prefix_dominates,
    round_robin_order,
    weighted_round_robin,
)
from rewardsched.schedule import frame_rewards, mandatory_misses, schedule_violations

from conftest import two_task_system, seeds


def two_by_two():
    return TaskSystem((TaskSpec("A", 2, (2, 1), 0), TaskSpec("B", 2, (2, 1), 0)))


def two_task_with(qa, qb):
    sys = two_task_system()
    return sys.with_requirements({"A": qa, "B": qb})


# decompose -----------------------------------------------------------------------


def test_integral_allocation_single_part():
    sys = two_by_two()
    f = {("A", 1): 1.0, ("A", 2): 0.0, ("B", 1): 1.0, ("B", 2): 0.0}
    dec = decompose(f, sys)
    assert dec.weights == [1]
    assert dec.parts[0][1] == {k: int(v) for k, v in f.items()}


def test_half_half_example():
    sys = two_by_two()
    f = {("A", 1): 0.5, ("A", 2): 0.0, ("B", 1): 1.0, ("B", 2): 0.5}
    dec = decompose(f, sys)
    assert sorted(dec.weights) == [Fraction(1, 2), Fraction(1, 2)]
    points = sorted(tuple(sorted(p.items())) for _, p in dec.parts)
    expected = sorted(
        tuple(sorted(p.items()))
        for p in (
            {("A", 1): 1, ("A", 2): 0, ("B", 1): 1, ("B", 2): 0},
            {("A", 1): 0, ("A", 2): 0, ("B", 1): 1, ("B", 2): 1},
        )
    )
    assert points == expected
    assert dec.max_error(f) == 0


def test_two_task_targets_402_10_infeasible():
    # A needs all six slots for 402 and B one more
    assert not check_feasibility(two_task_with(402, 10)).feasible


def test_two_task_allocation_reconstructs():
    sys = two_task_with(401, 10)
    v = check_feasibility(sys)
    assert v.feasible
    dec = decompose(v.allocation, sys)
    assert dec.max_error(v.allocation) <= 1e-9
    assert sum(dec.weights) == 1


def test_decompose_rejects_outside_polytope():
    sys = two_by_two()
    with pytest.raises(ValueError):
        decompose({("A", 1): 1.0, ("A", 2): 1.0, ("B", 1): 0.5}, sys)
    with pytest.raises(ValueError):
        decompose({("A", 1): 1.5}, sys)


@st.composite
def polytope_points(draw):
    sys = random_system(random.Random(draw(seeds)), max_frame=12)
    T = sys.frame_length
    keys = [(t.id, i) for t in sys.tasks for i in range(1, t.period + 1)]
    caps = {(t.id, i): sys.periods_per_frame(t) for t in sys.tasks for i in range(1, t.period + 1)}
    raw = draw(st.lists(st.floats(0, 1), min_size=len(keys), max_size=len(keys)))
    f = {k: caps[k] * x for k, x in zip(keys, raw)}
    total = sum(f.values())
    if total > T:
        f = {k: v * T / total for k, v in f.items()}
    return sys, f


@given(polytope_points())
def test_decomposition_sound(case):
    sys, f = case
    dec = decompose(f, sys)
    assert sum(dec.weights) == 1
    assert all(w > 0 for w in dec.weights)
    for _, p in dec.parts:
        assert in_polytope(sys, p)
        assert all(isinstance(v, int) for v in p.values())
    assert dec.max_error(f) <= 1e-9
    n_frac = sum(1 for v in f.values() if abs(v - round(v)) > 1e-12)
    assert len(dec.parts) <= n_frac + 1


# EDF -------------------------------------------------------------------------------


def test_edf_pair_example(edf_pair):
    n = {("A", 1): 1, ("A", 2): 2, ("A", 3): 0, ("B", 1): 2, ("B", 2): 1}
    slots, n_bar = edf_schedule(n, edf_pair)
    assert n_bar == {("A", 1): 2, ("A", 2): 1, ("A", 3): 0, ("B", 1): 3, ("B", 2): 0}
    assert edf_trace(n, edf_pair)[1] == 0
    assert schedule_violations(edf_pair, slots) == []
    assert prefix_dominates(edf_pair, n_bar, n)


def test_edf_all_zero(edf_pair):
    slots, n_bar = edf_schedule({}, edf_pair)
    assert slots == [None] * 6
    assert all(v == 0 for v in n_bar.values())


def test_edf_single_task():
    sys = TaskSystem((TaskSpec("A", 5, (5, 4, 3, 2, 1), 0),))
    n = {("A", i): 1 for i in range(1, 4)}
    slots, n_bar = edf_schedule(n, sys)
    assert sum(a is not None for a in slots) == 3
    assert {k: v for k, v in n_bar.items() if v} == n


def test_edf_rejects_outside_polytope(edf_pair):
    with pytest.raises(ValueError):
        edf_schedule({("A", 1): 3}, edf_pair)


def _check_point(sys, n):
    slots, n_bar = edf_schedule(n, sys)
    assert schedule_violations(sys, slots) == []
    assert prefix_dominates(sys, n_bar, n)
    for t in sys.tasks:
        got = bigm_sum(r * n_bar[(t.id, i)] for i, r in enumerate(t.rewards, 1))
        want = bigm_sum(r * n.get((t.id, i), 0) for i, r in enumerate(t.rewards, 1))
        assert got >= want


def test_edf_exhaustive_small():
    rng = random.Random(3)
    for _ in range(8):
        sys = random_system(rng, max_frame=6)
        for n in integer_points(sys):
            _check_point(sys, n)


@given(polytope_points())
def test_edf_rounded_points(case):
    sys, f = case
    for _, p in decompose(f, sys).parts:
        _check_point(sys, p)


# round robin ---------------------------------------------------------------------


def test_round_robin_single_part(edf_pair):
    p = {("A", 1): 2, ("B", 1): 3}
    frames = weighted_round_robin(ConvexDecomposition(((Fraction(1), p),)), 5, edf_pair)
    assert all(f == frames[0] for f in frames)


def test_round_robin_halves():
    order = round_robin_order([Fraction(1, 2), Fraction(1, 2)])
    assert Counter(next(order) for _ in range(4)) == {0: 2, 1: 2}


def test_round_robin_thirds():
    order = round_robin_order([Fraction(1, 3), Fraction(2, 3)])
    assert Counter(next(order) for _ in range(300)) == {0: 100, 1: 200}


@given(st.lists(st.integers(1, 20), min_size=1, max_size=6), st.integers(1, 200))
def test_round_robin_tracks_weights(raw, K):
    w = [Fraction(x, sum(raw)) for x in raw]
    order = round_robin_order(w)
    counts = Counter(next(order) for _ in range(K))
    for u, x in enumerate(w):
        assert abs(counts[u] - x * K) < 1


def test_round_robin_rejects_zero_frames(edf_pair):
    dec = ConvexDecomposition(((Fraction(1), {}),))
    with pytest.raises(ValueError):
        weighted_round_robin(dec, 0, edf_pair)


def test_thirds_average_reward_within_one_frame():
    sys = TaskSystem((TaskSpec("A", 3, (6, 3, 0), 0),))
    p1, p2 = {("A", 1): 1}, {("A", 1): 1, ("A", 2): 1}
    dec = ConvexDecomposition(((Fraction(1, 3), p1), (Fraction(2, 3), p2)))
    frames = weighted_round_robin(dec, 300, sys)
    avg = sum(frame_rewards(sys, s)["A"].c for s in frames) / 300
    # one frame earns at most 9
    assert abs(avg - (6 / 3 + 9 * 2 / 3)) <= 9 / 300


# offline policy ------------------------------------------------------------------


def test_offline_mandatory_only(mandatory_only):
    pol = OfflinePolicy(mandatory_only)
    for slots in pol.frames(20):
        assert mandatory_misses(mandatory_only, slots) == 0


def test_offline_two_task_targets():
    sys = two_task_with(401, 10)
    pol = OfflinePolicy(sys)
    tot = {"A": 0.0, "B": 0.0}
    for slots in pol.frames(500):
        for x, q in frame_rewards(sys, slots).items():
            tot[x] += q.c
    assert tot["A"] / 500 >= 401 - 1e-9
    assert tot["B"] / 500 >= 10 - 1e-9


def test_offline_infeasible():
    with pytest.raises(InfeasibleSystemError):
        OfflinePolicy(two_task_with(500, 10))


def test_offline_table2_point():
    from rewardsched.experiments import build_table_system

    sys = build_table_system(2, "exp", 1.0, 1.0)
    pol = OfflinePolicy(sys)
    tot = {x: 0.0 for x in sys.ids}
    for slots in pol.frames(200):
        for x, q in frame_rewards(sys, slots).items():
            tot[x] += q.c
    for t in sys.tasks:
        assert tot[t.id] / 200 >= t.requirement.c - t.max_frame_reward(sys.frame_length).c / 200
