import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewardsched.bigm import M, BigM
from rewardsched.feasibility import (
    InstanceTooLarge,
    allocation_rewards,
    brute_force_feasible,
    check_feasibility,
    integer_points,
    multiset_feasible,
    satisfies_conditions,
    strictly_feasible,
)
from rewardsched.generators import random_system
from rewardsched.model import InvalidSystemError, TaskSpec, TaskSystem

from conftest import systems


def one_task(q):
    return TaskSystem((TaskSpec("A", 2, (3, 1), q),))


def two_tasks(qa, qb):
    return TaskSystem((TaskSpec("A", 2, (3, 1), qa), TaskSpec("B", 2, (2, 2), qb)))


def test_requirement_at_capacity():
    v = check_feasibility(one_task(4))
    assert v.feasible
    assert v.allocation == {("A", 1): 1.0, ("A", 2): 1.0}
    assert v.slack == pytest.approx(0.0, abs=1e-9)


def test_requirement_above_capacity():
    v = check_feasibility(one_task(4.5))
    assert not v.feasible
    assert v.allocation is None
    assert "capacity" in v.reason


def test_two_task_example():
    sys = two_tasks(3, 2)
    v = check_feasibility(sys)
    assert v.feasible
    assert v.allocation[("A", 1)] == 1.0 and v.allocation[("B", 1)] == 1.0
    assert sum(v.allocation.values()) == pytest.approx(2.0)
    assert brute_force_feasible(sys).feasible


def test_two_task_example_infeasible():
    sys = two_tasks(4, 2)
    assert not check_feasibility(sys).feasible
    assert not brute_force_feasible(sys).feasible


def test_mandatory_only_feasible(mandatory_only):
    v = check_feasibility(mandatory_only)
    assert v.feasible
    assert brute_force_feasible(mandatory_only).feasible
    assert v.slack == pytest.approx(0.0)


def test_mandatory_overload_infeasible():
    sys = TaskSystem((TaskSpec("A", 2, (M, M), BigM(2, 0)), TaskSpec("B", 2, (M, 0), BigM(1, 0))))
    assert not check_feasibility(sys).feasible
    assert not brute_force_feasible(sys).feasible


def test_finite_reward_on_mandatory_slots_counts():
    # M + 2 on the first slot: the finite part rides along with the mandatory run
    sys = TaskSystem((TaskSpec("A", 2, (BigM(1, 2), BigM(0, 1)), BigM(1, 2)),))
    v = check_feasibility(sys)
    assert v.feasible
    assert v.allocation[("A", 2)] == 0.0


def test_invalid_system_rejected():
    with pytest.raises(InvalidSystemError):
        check_feasibility(TaskSystem((TaskSpec("A", 2, (1, 2), 1),)))


def test_strictly_feasible():
    assert strictly_feasible(one_task(3.5), eps=0.01) is True
    assert strictly_feasible(one_task(4), eps=0.01) is False


def test_brute_force_guard():
    sys = TaskSystem((TaskSpec("A", 13, (1,) * 13, 1),))
    with pytest.raises(InstanceTooLarge):
        brute_force_feasible(sys)


def test_grain_t_is_one_sided():
    # an extreme point of the feasible region needs weights finer than 1/T
    a = TaskSpec("A", 2, (8, 7), 9.07)
    b = TaskSpec("B", 1, (4,), 2.18)
    sys = TaskSystem((a, b))
    v = check_feasibility(sys)
    assert v.feasible and v.slack == pytest.approx(2 - 1 - 1.07 / 7 - 2.18 / 4, abs=1e-9)
    assert brute_force_feasible(sys).feasible
    assert not brute_force_feasible(sys, grain=sys.frame_length).feasible
    assert brute_force_feasible(sys, grain=200).feasible


def test_integer_points_small():
    pts = list(integer_points(two_tasks(0, 0)))
    # four coordinates each 0/1 with sum <= 2
    assert len(pts) == 1 + 4 + 6


@given(systems(max_frame=4, max_tasks=2))
def test_grain_oracle_never_overclaims(sys):
    exact = brute_force_feasible(sys).feasible
    if brute_force_feasible(sys, grain=sys.frame_length).feasible:
        assert exact


@given(systems(max_frame=3, max_tasks=2, reward_max=4))
def test_multiset_matches_grain(sys):
    g = sys.frame_length
    try:
        lit = multiset_feasible(sys, g, max_points=200)
    except InstanceTooLarge:
        return
    assert lit == brute_force_feasible(sys, grain=g).feasible


@given(systems(max_frame=8))
def test_agrees_with_oracle(sys):
    assert check_feasibility(sys).feasible == brute_force_feasible(sys).feasible


@given(systems(max_frame=12, load=(0.0, 1.0)))
def test_allocation_satisfies_conditions(sys):
    v = check_feasibility(sys)
    if not v.feasible:
        return
    assert satisfies_conditions(sys, v.allocation)
    assert v.slack == pytest.approx(sys.frame_length - sum(v.allocation.values()))
    got = allocation_rewards(sys, v.allocation)
    for t in sys.tasks:
        assert got[t.id].m >= t.requirement.m - 1e-7
        assert got[t.id].c >= t.requirement.c - 1e-7


@given(systems(max_frame=12, load=(0.0, 1.0)))
def test_greedy_allocation_is_exchange_fixed_point(sys):
    # among indices with the same reward tier pattern, lower indices fill first
    v = check_feasibility(sys)
    if not v.feasible:
        return
    for t in sys.tasks:
        per = sys.periods_per_frame(t)
        f = [v.allocation[(t.id, i)] for i in range(1, t.period + 1)]
        for j in range(t.period):
            for k in range(j + 1, t.period):
                same = t.rewards[j] == t.rewards[k] or (
                    t.rewards[j].m == 0 and t.rewards[k].m == 0
                )
                if same and f[k] > 1e-9:
                    assert f[j] >= per - 1e-9


@given(systems(max_frame=12), st.integers(0, 2), st.floats(0.0, 1.0))
def test_monotone_in_requirements(sys, k, shrink):
    if not check_feasibility(sys).feasible:
        return
    k = k % len(sys.tasks)
    t = sys.tasks[k]
    reqs = {x.id: x.requirement for x in sys.tasks}
    reqs[t.id] = BigM(t.requirement.m, t.requirement.c * shrink)
    assert check_feasibility(sys.with_requirements(reqs)).feasible


@given(systems(max_frame=12), st.integers(0, 2), st.floats(0.0, 5.0))
def test_monotone_in_rewards(sys, k, bump):
    if not check_feasibility(sys).feasible:
        return
    t = sys.tasks[k % len(sys.tasks)]
    # raising the first finite reward keeps the sequence nonincreasing
    rewards = list(t.rewards)
    j = t.mandatory
    if j >= len(rewards):
        return
    rewards[j] = rewards[j] + BigM(0, bump)
    tasks = tuple(TaskSpec(x.id, x.period, tuple(rewards), x.requirement) if x is t else x for x in sys.tasks)
    assert check_feasibility(TaskSystem(tasks, sys.frame_length)).feasible


def test_step_count_is_linear():
    rng = random.Random(7)
    for _ in range(200):
        sys = random_system(rng, max_tasks=4, max_frame=40)
        v = check_feasibility(sys)
        work = sum(t.period for t in sys.tasks)
        assert v.steps <= 3 * work + len(sys.tasks)
