"""Frame schedules and the per-period bookkeeping shared by all policies."""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from .bigm import BigM
from .model import TaskSystem


class Action(NamedTuple):
    """Run ``task``'s current job for the ``index``-th time in its period."""

    task: str
    index: int

    def __str__(self) -> str:
        return f"({self.task},{self.index})"


FrameSchedule = list[Optional[Action]]


def period_counts(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> dict[str, list[int]]:
    """Executions of each task in each of its periods within the frame."""
    out = {t.id: [0] * sys.periods_per_frame(t) for t in sys.tasks}
    period = {t.id: t.period for t in sys.tasks}
    for t, a in enumerate(slots):
        if a is not None:
            out[a.task][t // period[a.task]] += 1
    return out


def renumber(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> FrameSchedule:
    """Relabel every action with its actual execution count in its period."""
    period = {t.id: t.period for t in sys.tasks}
    seen: dict[tuple[str, int], int] = {}
    out: FrameSchedule = []
    for t, a in enumerate(slots):
        if a is None:
            out.append(None)
            continue
        key = (a.task, t // period[a.task])
        seen[key] = seen.get(key, 0) + 1
        out.append(Action(a.task, seen[key]))
    return out


def executed_counts(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> dict[tuple[str, int], int]:
    """``n_bar[(X, i)]``: how often ``X`` actually ran an ``i``-th slot."""
    counts = {(t.id, i): 0 for t in sys.tasks for i in range(1, t.period + 1)}
    for a in renumber(sys, slots):
        if a is not None:
            counts[(a.task, a.index)] += 1
    return counts


def frame_rewards(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> dict[str, BigM]:
    """Per-task reward earned by one frame (after renumbering)."""
    out = {}
    counts = period_counts(sys, slots)
    for task in sys.tasks:
        m = c = 0.0
        for n in counts[task.id]:
            for r in task.rewards[:n]:
                m += r.m
                c += r.c
        out[task.id] = BigM(m, c)
    return out


def mandatory_misses(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> int:
    counts = period_counts(sys, slots)
    return sum(1 for t in sys.tasks for n in counts[t.id] if n < t.mandatory)


def schedule_violations(sys: TaskSystem, slots: Sequence[Optional[Action]]) -> list[str]:
    """Structural checks: frame length, known tasks, no repeated index per period."""
    out = []
    if len(slots) != sys.frame_length:
        out.append(f"schedule has {len(slots)} slots, frame is {sys.frame_length}")
    period = {t.id: t.period for t in sys.tasks}
    seen: set[tuple[str, int, int]] = set()
    for t, a in enumerate(slots):
        if a is None:
            continue
        if a.task not in period:
            out.append(f"slot {t}: unknown task {a.task}")
            continue
        if not 1 <= a.index <= period[a.task]:
            out.append(f"slot {t}: index {a.index} out of range")
        key = (a.task, t // period[a.task], a.index)
        if key in seen:
            out.append(f"slot {t}: {a} repeated within one period")
        seen.add(key)
    return out


def format_schedule(slots: Sequence[Optional[Action]]) -> str:
    return " ".join("-" if a is None else str(a) for a in slots)


def schedule_to_json(slots: Sequence[Optional[Action]]) -> list:
    return [None if a is None else [a.task, a.index] for a in slots]
