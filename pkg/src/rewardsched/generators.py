"""Random task systems for property tests and experiments."""

from __future__ import annotations

import math
import random

from .bigm import M, BigM
from .model import TaskSpec, TaskSystem


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def random_system(
    rng: random.Random,
    max_tasks: int = 3,
    max_frame: int = 8,
    reward_max: int = 9,
    mandatory_prob: float = 0.3,
    equal_periods: bool = False,
    load: tuple[float, float] = (0.0, 1.2),
    integer_requirements: bool = False,
) -> TaskSystem:
    """Draw a small valid system.

    ``load`` bounds the finite requirement of each task as a fraction of the
    most that task could earn alone in one frame; with several tasks the
    upper end makes many draws infeasible.
    """
    n = rng.randint(1, max_tasks)
    top = rng.randint(1, max_frame)
    if equal_periods:
        periods = [top] * n
    else:
        periods = [rng.choice(_divisors(top)) for _ in range(n)]
    T = 1
    for p in periods:
        T = T * p // math.gcd(T, p)
    tasks = []
    for k, tau in enumerate(periods):
        m = 0
        if rng.random() < mandatory_prob:
            m = rng.randint(1, min(2, tau))
        finite = sorted((rng.randint(0, reward_max) for _ in range(tau - m)), reverse=True)
        rewards = [M] * m + [BigM(0, v) for v in finite]
        per = T // tau
        cap_c = per * sum(finite)
        frac = rng.uniform(*load)
        qc = frac * cap_c
        qc = float(round(qc)) if integer_requirements else round(qc, 3)
        tasks.append(TaskSpec(chr(ord("A") + k), tau, tuple(rewards), BigM(per * m, qc)))
    return TaskSystem(tuple(tasks), T)


def random_debts(rng: random.Random, sys: TaskSystem, scale: int = 5) -> dict[str, BigM]:
    """Integer finite debts, with unit M debt on tasks that have mandatory slots."""
    out = {}
    for t in sys.tasks:
        m = 1.0 if t.mandatory else 0.0
        out[t.id] = BigM(m, float(rng.randint(0, scale)))
    return out
