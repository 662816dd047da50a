"""Offline feasibility-optimal scheduling.

Pipeline: a feasible allocation ``f`` is written as a convex combination of
integer points ``n[u]`` of the polytope; each integer point is realised by a
deadline-marking EDF schedule of one frame; frames cycle through the parts
in proportion to their weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .bigm import TOL
from .feasibility import Allocation, check_feasibility
from .model import TaskSystem
from .schedule import Action, FrameSchedule, executed_counts, renumber

IntegerPoint = dict[tuple[str, int], int]


class InfeasibleSystemError(ValueError):
    pass


class DeadlineMiss(AssertionError):
    """EDF left a marked action unexecuted past its deadline."""


@dataclass(frozen=True)
class ConvexDecomposition:
    parts: tuple[tuple[Fraction, IntegerPoint], ...]

    @property
    def weights(self) -> list[Fraction]:
        return [w for w, _ in self.parts]

    def reconstruct(self) -> dict[tuple[str, int], float]:
        keys = {k for _, p in self.parts for k in p}
        return {k: float(sum(w * p.get(k, 0) for w, p in self.parts)) for k in keys}

    def max_error(self, f: Mapping[tuple[str, int], float]) -> float:
        keys = set(f) | {k for _, p in self.parts for k in p}
        err = 0.0
        for k in keys:
            got = sum(w * p.get(k, 0) for w, p in self.parts)
            err = max(err, abs(float(got - Fraction(f.get(k, 0.0)))))
        return err


def in_polytope(sys: TaskSystem, point: Mapping[tuple[str, int], float], tol: float = TOL) -> bool:
    total = 0.0
    for task in sys.tasks:
        per = sys.periods_per_frame(task)
        for i in range(1, task.period + 1):
            v = point.get((task.id, i), 0)
            if v < -tol or v > per + tol:
                return False
            total += v
    return total <= sys.frame_length + tol


def decompose(f: Allocation, sys: TaskSystem, tol: float = TOL) -> ConvexDecomposition:
    """Convex combination of integer points reproducing ``f``.

    Systematic rounding: lay the fractional parts end to end on a line of
    length ``S``, shift a unit comb by an offset ``theta`` and round up every
    coordinate whose segment catches a tooth. Each offset rounds up
    ``floor(S)`` or ``ceil(S)`` coordinates, so the budget and box constraints
    survive; coordinate ``j`` is rounded up for a ``frac_j`` share of offsets.
    The distinct outcomes are the parts, at most (fractional coords + 1).
    """
    if not in_polytope(sys, f, tol):
        raise ValueError("allocation lies outside the polytope")
    keys = [(t.id, i) for t in sys.tasks for i in range(1, t.period + 1)]
    exact = {}
    for k in keys:
        v = Fraction(max(0.0, f.get(k, 0.0)))
        nearest = round(v)
        if abs(v - nearest) <= Fraction(tol) / 1000:
            v = Fraction(nearest)
        exact[k] = v
    per = {(t.id, i): sys.periods_per_frame(t) for t in sys.tasks for i in range(1, t.period + 1)}
    for k in keys:
        exact[k] = min(exact[k], Fraction(per[k]))

    base = {k: math.floor(v) for k, v in exact.items()}
    frac_keys = [k for k in keys if exact[k] != base[k]]
    fracs = [exact[k] - base[k] for k in frac_keys]
    # absorb float overshoot of the budget into the largest fraction
    excess = sum(base.values()) + sum(fracs) - sys.frame_length
    if excess > 0:
        j = max(range(len(fracs)), key=lambda a: fracs[a])
        fracs[j] -= excess
        if fracs[j] <= 0:
            raise ValueError("allocation lies outside the polytope")

    if not frac_keys:
        return ConvexDecomposition(((Fraction(1), dict(base)),))

    cum = [Fraction(0)]
    for x in fracs:
        cum.append(cum[-1] + x)
    cuts = sorted({c - math.floor(c) for c in cum} | {Fraction(0), Fraction(1)})
    parts = []
    for lo, hi in zip(cuts, cuts[1:]):
        theta = (lo + hi) / 2
        point = dict(base)
        for j, k in enumerate(frac_keys):
            # a tooth k' + theta lies in [cum[j], cum[j+1])
            if math.ceil(cum[j] - theta) < cum[j + 1] - theta:
                point[k] += 1
        parts.append((hi - lo, point))
    return ConvexDecomposition(tuple(parts))


def _edf(n: Mapping[tuple[str, int], int], sys: TaskSystem):
    T = sys.frame_length
    order = {t.id: k for k, t in enumerate(sys.tasks)}
    period = {t.id: t.period for t in sys.tasks}
    pending: dict[tuple[str, int], list[int]] = {}
    for (x, i), cnt in n.items():
        if cnt:
            # copies are interchangeable apart from deadline; keep them sorted
            pending[(x, i)] = sorted(T - j * period[x] for j in range(cnt))

    marked: FrameSchedule = []
    ran: dict[str, set[int]] = {t.id: set() for t in sys.tasks}
    misses = 0
    for t in range(T):
        for task in sys.tasks:
            if t % task.period == 0:
                ran[task.id] = set()
        best = None
        for (x, i), dl in pending.items():
            if dl and i not in ran[x]:
                key = (dl[0], i, order[x])
                if best is None or key < best[0]:
                    best = (key, (x, i))
        if best is None:
            marked.append(None)
        else:
            x, i = best[1]
            pending[(x, i)].pop(0)
            ran[x].add(i)
            marked.append(Action(x, i))
        # slot t occupies time (t, t+1]; anything due by t+1 and still pending missed
        for dl in pending.values():
            while dl and dl[0] <= t + 1:
                dl.pop(0)
                misses += 1
    return marked, misses


def edf_trace(n: Mapping[tuple[str, int], int], sys: TaskSystem) -> tuple[FrameSchedule, int]:
    """Marked actions per slot (before renumbering) and the number of misses."""
    return _edf(n, sys)


def edf_schedule(
    n: Mapping[tuple[str, int], int], sys: TaskSystem
) -> tuple[FrameSchedule, dict[tuple[str, int], int]]:
    """Realise integer point ``n`` within one frame.

    The copies of ``(X, i)`` get deadlines ``T, T - tau, ..., T - (n-1)*tau``.
    Each slot runs the pending copy with the earliest deadline whose action has
    not yet run in the current period of its task; ties go to the smaller
    action index, then to the task listed first. Returns the renumbered
    schedule and the executed counts ``n_bar``.
    """
    if not in_polytope(sys, n):
        raise ValueError("integer point lies outside the polytope")
    marked, misses = _edf(n, sys)
    if misses:
        raise DeadlineMiss(f"{misses} marked actions missed their deadlines")
    return renumber(sys, marked), executed_counts(sys, marked)


def prefix_dominates(
    sys: TaskSystem, n_bar: Mapping[tuple[str, int], int], n: Mapping[tuple[str, int], int]
) -> bool:
    for task in sys.tasks:
        a = b = 0
        for i in range(1, task.period + 1):
            a += n_bar.get((task.id, i), 0)
            b += n.get((task.id, i), 0)
            if a < b:
                return False
    return True


def round_robin_order(weights: Sequence[Fraction]) -> Iterator[int]:
    """Endless part indices whose usage frequencies track ``weights``.

    Every frame each part is credited its weight and the part with the most
    credit (first on ties) is used and debited one frame, which keeps every
    cumulative count within one of ``weight * frames``.
    """
    w = [Fraction(x) for x in weights]
    total = sum(w)
    w = [x / total for x in w]
    credit = [Fraction(0)] * len(w)
    while True:
        for u, x in enumerate(w):
            credit[u] += x
        u = max(range(len(w)), key=lambda j: (credit[j], -j))
        credit[u] -= 1
        yield u


def weighted_round_robin(
    dec: ConvexDecomposition, frames: int, sys: TaskSystem
) -> list[FrameSchedule]:
    if frames < 1:
        raise ValueError("frames must be >= 1")
    schedules = [edf_schedule(p, sys)[0] for _, p in dec.parts]
    order = round_robin_order(dec.weights)
    return [schedules[next(order)] for _ in range(frames)]


class OfflinePolicy:
    """Endless frame schedules for a feasible system."""

    def __init__(self, sys: TaskSystem, tol: float = TOL):
        verdict = check_feasibility(sys, tol)
        if not verdict.feasible:
            raise InfeasibleSystemError(verdict.reason or "system is infeasible")
        self.sys = sys
        self.verdict = verdict
        self.decomposition = decompose(verdict.allocation, sys, tol)
        self.schedules = [edf_schedule(p, sys)[0] for _, p in self.decomposition.parts]

    def __iter__(self) -> Iterator[FrameSchedule]:
        for u in round_robin_order(self.decomposition.weights):
            yield self.schedules[u]

    def frames(self, k: int) -> list[FrameSchedule]:
        it = iter(self)
        return [next(it) for _ in range(k)]


def offline_policy(sys: TaskSystem) -> Iterator[FrameSchedule]:
    return iter(OfflinePolicy(sys))
