"""Frame-by-frame simulation of a policy with debt accounting.

Protocol: every task starts with debt ``initial_debt`` (``M + 1`` by default),
the policy runs ``warmup_frames`` unmeasured frames and then
``measured_frames`` measured ones. The run fulfils the system when no
mandatory part misses its period in the measured frames and every task's
measured total reaches ``measured_frames * q*``, less a relative allowance
of ``reward_tolerance`` (0 by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .bigm import BigM
from .model import TaskSystem, ensure_valid
from .offline import OfflinePolicy, round_robin_order
from .online import _Compiled, _greedy_frame_fast, opt_total_reward_frame
from .schedule import FrameSchedule, frame_rewards, mandatory_misses

POLICIES = ("greedy", "offline", "opt")


@dataclass(frozen=True)
class SimConfig:
    warmup_frames: int = 20
    measured_frames: int = 500
    initial_debt: BigM = BigM(1.0, 1.0)
    reward_tolerance: float = 0.0

    def __post_init__(self):
        if self.warmup_frames < 0 or self.measured_frames < 0:
            raise ValueError("frame counts must be nonnegative")
        if self.reward_tolerance < 0:
            raise ValueError("reward_tolerance must be nonnegative")
        object.__setattr__(self, "initial_debt", BigM.coerce(self.initial_debt))


@dataclass
class SimResult:
    policy: str
    totals: dict[str, BigM]
    averages: dict[str, BigM]
    final_debts: dict[str, BigM]
    mandatory_miss_count: int
    fulfilled: bool
    measured_frames: int
    # largest (K q* - total) / (K q*) over tiers and tasks with q* > 0
    max_relative_shortfall: float = 0.0
    debt_history: list[dict[str, BigM]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "fulfilled": self.fulfilled,
            "mandatory_miss_count": self.mandatory_miss_count,
            "measured_frames": self.measured_frames,
            "max_relative_shortfall": self.max_relative_shortfall,
            "totals": {k: v.as_pair() for k, v in self.totals.items()},
            "averages": {k: v.as_pair() for k, v in self.averages.items()},
            "final_debts": {k: v.as_pair() for k, v in self.final_debts.items()},
        }


FrameFn = Callable[[list, list], tuple[list, list, int]]


def _static_frame(sys: TaskSystem, slots: FrameSchedule):
    q = frame_rewards(sys, slots)
    return [q[x].m for x in sys.ids], [q[x].c for x in sys.ids], mandatory_misses(sys, slots)


def _frame_source(sys: TaskSystem, policy: str) -> FrameFn:
    if policy == "greedy":
        cs = _Compiled(sys)

        def run(dm, dc):
            qm, qc, miss, _ = _greedy_frame_fast(cs, dm, dc)
            return qm, qc, miss

        return run
    if policy == "opt":
        frame = _static_frame(sys, opt_total_reward_frame(sys))
        return lambda dm, dc: frame
    if policy == "offline":
        pol = OfflinePolicy(sys)
        frames = [_static_frame(sys, s) for s in pol.schedules]
        order: Iterator[int] = round_robin_order(pol.decomposition.weights)
        return lambda dm, dc: frames[next(order)]
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def simulate(
    sys: TaskSystem,
    policy: str = "greedy",
    cfg: SimConfig = SimConfig(),
    seed: Optional[int] = None,
    record_debts: bool = False,
) -> SimResult:
    """Run ``policy`` on ``sys``; ``seed`` is accepted for interface stability."""
    del seed  # every shipped policy is deterministic
    ensure_valid(sys)
    run = _frame_source(sys, policy)
    n = len(sys.tasks)
    req = [(t.requirement.m, t.requirement.c) for t in sys.tasks]
    d0 = cfg.initial_debt
    dm = [d0.m] * n
    dc = [d0.c] * n
    tot_m = [0.0] * n
    tot_c = [0.0] * n
    misses = 0
    history = []
    if record_debts:
        history.append({x: BigM(dm[k], dc[k]) for k, x in enumerate(sys.ids)})

    for frame in range(cfg.warmup_frames + cfg.measured_frames):
        qm, qc, miss = run(dm, dc)
        if frame >= cfg.warmup_frames:
            misses += miss
            for k in range(n):
                tot_m[k] += qm[k]
                tot_c[k] += qc[k]
        for k in range(n):
            dm[k] = max(dm[k] + req[k][0] - qm[k], 0.0)
            dc[k] = max(dc[k] + req[k][1] - qc[k], 0.0)
        if record_debts:
            history.append({x: BigM(dm[k], dc[k]) for k, x in enumerate(sys.ids)})

    K = cfg.measured_frames
    ok = misses == 0
    worst = 0.0
    for k in range(n):
        for got, need in ((tot_m[k], req[k][0]), (tot_c[k], req[k][1])):
            target = K * need
            if target > 0:
                worst = max(worst, (target - got) / target)
            # 1e-9 absorbs float accumulation over many frames
            if got < target - cfg.reward_tolerance * target - 1e-9 * max(1.0, target):
                ok = False
    totals = {x: BigM(tot_m[k], tot_c[k]) for k, x in enumerate(sys.ids)}
    averages = {x: v / K if K else BigM() for x, v in totals.items()}
    return SimResult(
        policy,
        totals,
        averages,
        {x: BigM(dm[k], dc[k]) for k, x in enumerate(sys.ids)},
        misses,
        ok,
        K,
        max(worst, 0.0),
        history,
    )


def debt_trajectory(
    sys: TaskSystem, policy: str = "greedy", cfg: SimConfig = SimConfig()
) -> list[dict[str, BigM]]:
    """Debts at the start and after every frame (warm-up included)."""
    return simulate(sys, policy, cfg, record_debts=True).debt_history
