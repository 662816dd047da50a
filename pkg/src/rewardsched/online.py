"""Debt-driven online scheduling.

Each task carries a debt ``d_X`` (its unmet requirement so far). Within a
frame the Greedy Maximizer runs, every slot, the task whose next increment
has the largest ``r * d``. Weighting is tier by tier (see
``bigm.tier_product``), and all per-slot work here runs on plain floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .bigm import BigM, BigMLike, bigm_sum, positive_part, tier_product
from .model import TaskSystem
from .schedule import Action, FrameSchedule, renumber

Debts = Mapping[str, BigMLike]


class InstanceTooLarge(ValueError):
    pass


class MandatoryOverload(ValueError):
    pass


def debt_update(d: BigMLike, q_star: BigMLike, q_tilde: BigMLike) -> BigM:
    """``[d + q* - q~]^+`` with each tier clamped at zero on its own."""
    return positive_part(BigM.coerce(d) + q_star - BigM.coerce(q_tilde))


def weighted_value(debts: Debts, q_tilde: Mapping[str, BigMLike]) -> BigM:
    """``sum_X d_X * q~_X``."""
    return bigm_sum(tier_product(debts[x], q) for x, q in q_tilde.items())


@dataclass
class PolicyState:
    debts: dict[str, BigM]
    counters: dict[str, int] = field(default_factory=dict)
    q_tilde: dict[str, BigM] = field(default_factory=dict)

    @classmethod
    def start(cls, sys: TaskSystem, debts: Debts) -> "PolicyState":
        return cls(
            {t.id: BigM.coerce(debts[t.id]) for t in sys.tasks},
            {t.id: 0 for t in sys.tasks},
            {t.id: BigM() for t in sys.tasks},
        )

    def new_period(self, task_id: str) -> None:
        self.counters[task_id] = 0


def _greedy_pick(scores, debts, open_) -> int:
    """Index of the best open candidate; ties to higher debt, then list order.

    When no open candidate earns weighted reward the first open task runs,
    which keeps the policy work-conserving.
    """
    best, best_key = -1, None
    for k in range(len(scores)):
        if not open_[k]:
            continue
        key = (scores[k], debts[k])
        if best_key is None or key > best_key:
            best, best_key = k, key
    if best < 0:
        raise ValueError("every task has used up its period")
    if best_key[0] == (0.0, 0.0):
        return open_.index(True)
    return best


def greedy_step(state: PolicyState, sys: TaskSystem) -> Action:
    """Pick, run and account one slot of the Greedy Maximizer."""
    scores, debts, open_ = [], [], []
    for t in sys.tasks:
        i = state.counters[t.id]
        d = state.debts[t.id]
        open_.append(i < t.period)
        r = t.rewards[min(i, t.period - 1)]
        scores.append((r.m * d.m, r.c * d.c))
        debts.append((d.m, d.c))
    task = sys.tasks[_greedy_pick(scores, debts, open_)]
    state.counters[task.id] += 1
    i = state.counters[task.id]
    state.q_tilde[task.id] = state.q_tilde[task.id] + task.rewards[i - 1]
    return Action(task.id, i)


class _Compiled:
    """Float views of a system for the per-slot loops."""

    def __init__(self, sys: TaskSystem):
        self.sys = sys
        self.T = sys.frame_length
        self.ids = [t.id for t in sys.tasks]
        self.periods = [t.period for t in sys.tasks]
        self.rm = [[r.m for r in t.rewards] for t in sys.tasks]
        self.rc = [[r.c for r in t.rewards] for t in sys.tasks]
        self.mand = [t.mandatory for t in sys.tasks]
        self.req = [(t.requirement.m, t.requirement.c) for t in sys.tasks]


def _greedy_frame_fast(cs: _Compiled, dm: list[float], dc: list[float], record: bool = False):
    """One frame of the Greedy Maximizer on floats.

    Returns per-task reward tiers, mandatory misses and (optionally) the
    chosen task index per slot.
    """
    n = len(cs.ids)
    periods, rm, rc, mand = cs.periods, cs.rm, cs.rc, cs.mand
    cnt = [0] * n
    qm = [0.0] * n
    qc = [0.0] * n
    dkey = [(dm[k], dc[k]) for k in range(n)]
    score = [(0.0, 0.0)] * n
    misses = 0
    trace = [] if record else None
    for t in range(cs.T):
        for k in range(n):
            if t % periods[k] == 0:
                if t and cnt[k] < mand[k]:
                    misses += 1
                cnt[k] = 0
                score[k] = (rm[k][0] * dm[k], rc[k][0] * dc[k])
        best = 0
        bkey = (score[0], dkey[0])
        for k in range(1, n):
            key = (score[k], dkey[k])
            if key > bkey:
                best, bkey = k, key
        if bkey[0] == (0.0, 0.0):
            best = next(k for k in range(n) if cnt[k] < periods[k])
        i = cnt[best]
        qm[best] += rm[best][i]
        qc[best] += rc[best][i]
        i += 1
        cnt[best] = i
        if i < periods[best]:
            score[best] = (rm[best][i] * dm[best], rc[best][i] * dc[best])
        else:
            score[best] = (float("-inf"), float("-inf"))
        if record:
            trace.append(best)
    for k in range(n):
        if cnt[k] < mand[k]:
            misses += 1
    return qm, qc, misses, trace


def greedy_frame(debts: Debts, sys: TaskSystem) -> tuple[FrameSchedule, dict[str, BigM]]:
    """Run the Greedy Maximizer over one frame with the debts held fixed."""
    cs = _Compiled(sys)
    d = [BigM.coerce(debts[x]) for x in cs.ids]
    qm, qc, _, trace = _greedy_frame_fast(cs, [x.m for x in d], [x.c for x in d], record=True)
    slots = renumber(sys, [Action(cs.ids[k], 0) for k in trace])
    return slots, {x: BigM(qm[k], qc[k]) for k, x in enumerate(cs.ids)}


def greedy_frame_reference(debts: Debts, sys: TaskSystem) -> tuple[FrameSchedule, dict[str, BigM]]:
    """``greedy_frame`` spelled out with ``greedy_step`` on BigM values."""
    state = PolicyState.start(sys, debts)
    slots: FrameSchedule = []
    for t in range(sys.frame_length):
        for task in sys.tasks:
            if t % task.period == 0:
                state.new_period(task.id)
        slots.append(greedy_step(state, sys))
    return slots, state.q_tilde


def exhaustive_frame_opt(
    debts: Debts, sys: TaskSystem, max_frame: int = 8
) -> tuple[FrameSchedule, BigM]:
    """Maximise ``sum_X d_X * q~_X`` over every schedule of one frame.

    Dynamic programming over (slot, executions so far in each task's current
    period) visits every reachable state, so it is an exact search; idling is
    allowed.
    """
    T = sys.frame_length
    if T > max_frame:
        raise InstanceTooLarge(f"frame length {T} > {max_frame}")
    tasks = sys.tasks
    gains = []
    for t in tasks:
        d = BigM.coerce(debts[t.id])
        gains.append([(r.m * d.m, r.c * d.c) for r in t.rewards])

    @lru_cache(maxsize=None)
    def best(slot: int, counts: tuple[int, ...]) -> tuple[tuple[float, float], int]:
        if slot == T:
            return (0.0, 0.0), -1
        counts = tuple(0 if slot % t.period == 0 else c for t, c in zip(tasks, counts))
        (vm, vc), _ = best(slot + 1, counts)
        choice = ((vm, vc), -1)
        for k, c in enumerate(counts):
            if c >= tasks[k].period:
                continue
            gm, gc = gains[k][c]
            nxt = counts[:k] + (c + 1,) + counts[k + 1:]
            (vm, vc), _ = best(slot + 1, nxt)
            cand = (vm + gm, vc + gc)
            if cand > choice[0]:
                choice = (cand, k)
        return choice

    counts = tuple(0 for _ in tasks)
    (vm, vc), _ = best(0, counts)
    slots: FrameSchedule = []
    for slot in range(T):
        counts = tuple(0 if slot % t.period == 0 else c for t, c in zip(tasks, counts))
        _, k = best(slot, counts)
        if k < 0:
            slots.append(None)
        else:
            slots.append(Action(tasks[k].id, counts[k] + 1))
            counts = counts[:k] + (counts[k] + 1,) + counts[k + 1:]
    return slots, BigM(vm, vc)


def per_period_weights(sys: TaskSystem) -> dict[str, BigM]:
    """Debts under which ``sum d_X q~_X`` is the total per-period reward."""
    T = sys.frame_length
    return {t.id: BigM(t.period / T, t.period / T) for t in sys.tasks}


def opt_total_reward_frame(sys: TaskSystem) -> FrameSchedule:
    """Frame schedule maximising total per-period reward ``sum_X q~_X tau_X / T``.

    Every unit execution ``(X, period p, i-th slot)`` is an element weighted
    ``r_X^i * tau_X / T``; sets of executions that fit into the frame form a
    transversal matroid (unit jobs, one per slot, windows = periods), so
    taking elements in weight order whenever they still fit is optimal.
    Mandatory executions carry M weight and therefore go first.
    """
    T = sys.frame_length
    tasks = sys.tasks
    bounds = sorted({0, T} | {k * t.period for t in tasks for k in range(T // t.period)})
    idx = {b: j for j, b in enumerate(bounds)}
    nb = len(bounds)
    # load[a][b]: executions whose period lies inside [bounds[a], bounds[b])
    load = [[0] * nb for _ in range(nb)]

    elems = []
    for k, t in enumerate(tasks):
        scale = t.period / T
        for p in range(T // t.period):
            for i, r in enumerate(t.rewards):
                if r.m > 0 or r.c > 0:
                    elems.append(((r.m * scale, r.c * scale), k, p, i))
    elems.sort(key=lambda e: (-e[0][0], -e[0][1], e[1], e[2], e[3]))

    counts = {(k, p): 0 for k, t in enumerate(tasks) for p in range(T // t.period)}
    for (wm, _), k, p, _i in elems:
        tau = tasks[k].period
        s, e = idx[p * tau], idx[(p + 1) * tau]
        fits = all(
            load[a][b] + 1 <= bounds[b] - bounds[a]
            for a in range(s + 1) for b in range(e, nb)
        )
        if not fits:
            if wm > 0:
                raise MandatoryOverload(f"mandatory slots of {tasks[k].id} do not fit")
            continue
        counts[(k, p)] += 1
        for a in range(s + 1):
            row = load[a]
            for b in range(e, nb):
                row[b] += 1

    # earliest period end first; the interval loads above guarantee success
    left = dict(counts)
    slots: FrameSchedule = []
    for t in range(T):
        pick = None
        for k, task in enumerate(tasks):
            p = t // task.period
            if left[(k, p)]:
                key = ((p + 1) * task.period, k)
                if pick is None or key < pick[0]:
                    pick = (key, k)
        if pick is None:
            slots.append(None)
        else:
            k = pick[1]
            left[(k, t // tasks[k].period)] -= 1
            slots.append(Action(tasks[k].id, 0))
    if any(left.values()):
        raise AssertionError("EDF failed on an interval-feasible load")
    return renumber(sys, slots)
