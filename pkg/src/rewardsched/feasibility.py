"""Feasibility of a task system.

A system is feasible iff some allocation ``f[(X, i)]`` (average number of
periods per frame in which ``X`` runs its ``i``-th slot) satisfies

    (1) sum_i f[X, i] * r[X, i] >= q*[X]       for every X
    (2) 0 <= f[X, i] <= T / tau[X]
    (3) sum over all (X, i) of f[X, i] <= T

``check_feasibility`` finds the cheapest allocation greedily in linear time.
``brute_force_feasible`` is an independent exhaustive oracle for tiny systems.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterator

from .bigm import TOL, BigM
from .model import TaskSpec, TaskSystem, ensure_valid

Allocation = dict[tuple[str, int], float]


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    allocation: Allocation | None
    slack: float
    steps: int = 0
    reason: str = ""

    def to_json(self) -> dict:
        alloc = None
        if self.allocation is not None:
            alloc = {f"{x}:{i}": v for (x, i), v in self.allocation.items()}
        return {"feasible": self.feasible, "allocation": alloc, "slack": self.slack}


def _fill_task(task: TaskSpec, per: int, tol: float) -> tuple[list[float], int]:
    """Cheapest per-index allocation meeting one task's requirement.

    The M part is covered first, by the leading M-valued increments; the
    finite remainder then goes to whatever spare capacity earns the most
    finite reward per slot. For all-finite rewards this reduces to filling
    indices 1, 2, ... in order.
    """
    rewards = task.rewards
    f = [0.0] * len(rewards)
    steps = 0
    need_m, need_c = task.requirement.m, task.requirement.c

    n_mand = 0
    while n_mand < len(rewards) and rewards[n_mand].m > 0:
        n_mand += 1

    for i in range(n_mand):
        if need_m <= tol:
            break
        steps += 1
        r = rewards[i]
        if need_m > per * r.m:
            f[i] = float(per)
            need_m -= per * r.m
        else:
            f[i] = need_m / r.m
            need_m = 0.0
        need_c -= f[i] * r.c

    # both runs are already sorted by finite reward, so a merge keeps this linear
    leftover = (i for i in range(n_mand) if f[i] < per)
    rest = range(n_mand, len(rewards))
    for i in heapq.merge(leftover, rest, key=lambda j: -rewards[j].c):
        if need_c <= tol:
            break
        steps += 1
        r = rewards[i].c
        if r <= 0:
            break
        cap = per - f[i]
        if need_c > cap * r:
            f[i] = float(per)
            need_c -= cap * r
        else:
            f[i] += need_c / r
            need_c = 0.0
    return f, steps


def check_feasibility(sys: TaskSystem, tol: float = TOL) -> FeasibilityVerdict:
    ensure_valid(sys)
    T = sys.frame_length
    steps = 0
    for task in sys.tasks:
        steps += 1
        cap = task.max_frame_reward(T)
        q = task.requirement
        if q.m > cap.m + tol or q.c > cap.c + tol:
            return FeasibilityVerdict(
                False, None, float("-inf"), steps, f"{task.id} exceeds its capacity"
            )

    alloc: Allocation = {}
    total = 0.0
    for task in sys.tasks:
        per = sys.periods_per_frame(task)
        f, s = _fill_task(task, per, tol)
        steps += s + len(f)
        for i, v in enumerate(f, 1):
            alloc[(task.id, i)] = v
            total += v
    slack = T - total
    if slack >= -tol:
        return FeasibilityVerdict(True, alloc, slack, steps)
    return FeasibilityVerdict(False, None, slack, steps, "allocation exceeds frame")


def strictly_feasible(sys: TaskSystem, eps: float = 0.01, tol: float = TOL) -> bool:
    """Feasible with at least ``eps * T`` slots to spare."""
    v = check_feasibility(sys, tol)
    return v.feasible and v.slack >= eps * sys.frame_length - tol


def allocation_rewards(sys: TaskSystem, f: Allocation) -> dict[str, BigM]:
    out = {}
    for task in sys.tasks:
        m = c = 0.0
        for i, r in enumerate(task.rewards, 1):
            v = f.get((task.id, i), 0.0)
            m += v * r.m
            c += v * r.c
        out[task.id] = BigM(m, c)
    return out


def satisfies_conditions(sys: TaskSystem, f: Allocation, tol: float = 1e-7) -> bool:
    """Check ``f`` against the per-action caps, the frame capacity and the requirements, requirements compared tier by tier."""
    T = sys.frame_length
    total = 0.0
    for task in sys.tasks:
        per = sys.periods_per_frame(task)
        for i in range(1, task.period + 1):
            v = f.get((task.id, i), 0.0)
            if v < -tol or v > per + tol:
                return False
            total += v
    if total > T + tol:
        return False
    got = allocation_rewards(sys, f)
    for task in sys.tasks:
        q = task.requirement
        if got[task.id].m < q.m - tol or got[task.id].c < q.c - tol:
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive oracle


class InstanceTooLarge(ValueError):
    pass


def _pareto(points: set[tuple[float, ...]]) -> list[tuple[float, ...]]:
    """Maximal elements under componentwise >=."""
    pts = sorted(points, reverse=True)
    keep: list[tuple[float, ...]] = []
    for p in pts:
        if not any(all(k >= x for k, x in zip(q, p)) for q in keep):
            keep.append(p)
    return keep


def _task_vectors(task: TaskSpec, per: int) -> dict[int, set[tuple[float, float]]]:
    """slots used -> reward vectors over every integer ``n`` with 0 <= n_i <= per."""
    by_slots: dict[int, set[tuple[float, float]]] = {}
    for n in itertools.product(range(per + 1), repeat=task.period):
        m = sum(k * r.m for k, r in zip(n, task.rewards))
        c = sum(k * r.c for k, r in zip(n, task.rewards))
        by_slots.setdefault(sum(n), set()).add((m, c))
    return by_slots


def integer_points(sys: TaskSystem) -> Iterator[dict[tuple[str, int], int]]:
    """Every integer point of the polytope given by the per-action caps and the frame capacity."""
    T = sys.frame_length
    keys = [(t.id, i) for t in sys.tasks for i in range(1, t.period + 1)]
    bounds = [sys.periods_per_frame(t) for t in sys.tasks for _ in range(t.period)]

    def rec(j: int, used: int, acc: list[int]):
        if j == len(keys):
            yield dict(zip(keys, acc))
            return
        for v in range(min(bounds[j], T - used) + 1):
            acc.append(v)
            yield from rec(j + 1, used + v, acc)
            acc.pop()

    yield from rec(0, 0, [])


def _min_slots(task: TaskSpec, per: int, grain: int, limit: int, tol: float) -> int | None:
    """Fewest slots with which integer counts ``0 <= N_i <= grain*per`` reach
    ``grain * q*`` in both tiers, by exhaustive DP over the counts."""
    tm, tc = grain * task.requirement.m, grain * task.requirement.c

    def cap(m: float, c: float) -> tuple[float, float]:
        return (round(min(m, tm), 9), round(min(c, tc), 9))

    states: dict[int, list[tuple[float, float]]] = {0: [(0.0, 0.0)]}
    for r in task.rewards:
        nxt: dict[int, set[tuple[float, float]]] = {}
        for used, pts in states.items():
            for k in range(min(grain * per, limit - used) + 1):
                bucket = nxt.setdefault(used + k, set())
                for m, c in pts:
                    bucket.add(cap(m + k * r.m, c + k * r.c))
        states = {s: _pareto(v) for s, v in nxt.items()}
    ok = [
        s for s, pts in states.items()
        if any(m >= tm - tol * max(1.0, tm) and c >= tc - tol * max(1.0, tc) for m, c in pts)
    ]
    return min(ok) if ok else None


def _joint_reward_points(sys: TaskSystem) -> list[tuple[float, ...]]:
    """Maximal per-task reward vectors over all integer points of (2)-(3).

    Points are enumerated per task (every count vector), grouped by slots
    used, and joined across tasks under the shared budget ``T``.
    """
    T = sys.frame_length
    joint: dict[int, set[tuple[float, ...]]] = {0: {()}}
    for task in sys.tasks:
        per = sys.periods_per_frame(task)
        vecs = {s: _pareto(v) for s, v in _task_vectors(task, per).items()}
        nxt: dict[int, set[tuple[float, ...]]] = {}
        for used, pts in joint.items():
            for s, tv in vecs.items():
                if used + s > T:
                    continue
                bucket = nxt.setdefault(used + s, set())
                for p in pts:
                    for v in tv:
                        bucket.add(p + v)
        joint = {s: set(_pareto(v)) for s, v in nxt.items()}
    everything: set[tuple[float, ...]] = set()
    for pts in joint.values():
        everything |= pts
    return _pareto(everything)


def _hull_dominates(points: list[tuple[float, ...]], target: list[float], tol: float) -> bool:
    """Is some convex combination of ``points`` >= ``target`` componentwise?"""
    import numpy as np
    from scipy.optimize import linprog

    V = np.array(points, dtype=float)
    t = np.array(target, dtype=float)
    scale = np.maximum(1.0, np.abs(t))
    # maximise the worst normalised surplus; feasible iff it is >= -tol
    n, d = V.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-(V / scale).T, np.ones((d, 1))])
    b_ub = -t / scale
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)], method="highs",
    )
    return bool(res.status == 0 and -res.fun >= -tol)


def brute_force_feasible(
    sys: TaskSystem,
    grain: int | None = None,
    max_frame: int = 12,
    tol: float = 1e-9,
) -> FeasibilityVerdict:
    """Exhaustive feasibility oracle for small systems.

    With ``grain=None`` every integer point of the polytope (2)-(3) is
    enumerated and a linear program looks for convex weights under which the
    per-task rewards meet the requirements (tier by tier).

    With an integer ``grain`` the weights are restricted to multiples of
    ``1/grain``. A combination of ``grain`` integer points is ``N / grain``
    for an integer ``N`` with ``0 <= N <= grain * T/tau`` and
    ``sum(N) <= grain * T``, so that search runs per task over all integer
    count vectors and then checks the shared slot budget. It can only
    under-report feasibility. ``multiset_feasible`` is the literal version.
    """
    ensure_valid(sys)
    T = sys.frame_length
    if T > max_frame:
        raise InstanceTooLarge(f"frame length {T} > {max_frame}")
    if grain is None:
        points = _joint_reward_points(sys)
        target: list[float] = []
        for task in sys.tasks:
            target += [task.requirement.m, task.requirement.c]
        ok = _hull_dominates(points, target, tol)
        return FeasibilityVerdict(ok, None, float("nan"), len(points))
    if grain < 1:
        raise ValueError("grain must be positive")
    budget = grain * T
    used = 0
    for task in sys.tasks:
        need = _min_slots(task, sys.periods_per_frame(task), grain, budget, tol)
        if need is None:
            return FeasibilityVerdict(False, None, float("-inf"), used, f"{task.id} unreachable")
        used += need
    slack = (budget - used) / grain
    return FeasibilityVerdict(used <= budget, None, slack, used)


def multiset_feasible(sys: TaskSystem, grain: int, max_points: int = 5000) -> bool:
    """Literal oracle: try every multiset of ``grain`` integer points."""
    pts = []
    for n in integer_points(sys):
        vec = []
        for task in sys.tasks:
            m = sum(n[(task.id, i)] * r.m for i, r in enumerate(task.rewards, 1))
            c = sum(n[(task.id, i)] * r.c for i, r in enumerate(task.rewards, 1))
            vec += [m, c]
        pts.append(tuple(vec))
    pts = _pareto(set(pts))
    if len(pts) > max_points:
        raise InstanceTooLarge(f"{len(pts)} maximal points")
    target = []
    for task in sys.tasks:
        target += [grain * task.requirement.m, grain * task.requirement.c]
    for combo in itertools.combinations_with_replacement(pts, grain):
        sums = [sum(col) for col in zip(*combo)]
        if all(s >= t - 1e-9 * max(1.0, t) for s, t in zip(sums, target)):
            return True
    return False
