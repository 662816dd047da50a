"""Task-system data model.

A task ``X`` releases a job every ``period`` slots; the job may run any number
of slots before the next release, and its ``i``-th slot within one period earns
``rewards[i-1]``. A frame is the lcm of all periods.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .bigm import TOL, BigM, BigMLike, M, ZERO, bigm_sum, is_integral

# a frame this long would make every per-slot routine useless anyway
MAX_FRAME_LENGTH = 2**63 - 1


class InvalidSystemError(ValueError):
    """Raised when a task system breaks one or more model invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def frame_length(periods: Iterable[int]) -> int:
    periods = list(periods)
    if not periods:
        raise ValueError("frame_length needs at least one period")
    if any(int(p) != p or p <= 0 for p in periods):
        raise ValueError(f"periods must be positive integers, got {periods}")
    T = math.lcm(*(int(p) for p in periods))
    if T > MAX_FRAME_LENGTH:
        raise OverflowError(f"frame length {T} exceeds {MAX_FRAME_LENGTH}")
    return T


@dataclass(frozen=True)
class TaskSpec:
    id: str
    period: int
    rewards: tuple[BigM, ...]
    requirement: BigM

    def __post_init__(self):
        rewards = [BigM.coerce(r) for r in self.rewards]
        if len(rewards) < self.period:
            rewards += [ZERO] * (self.period - len(rewards))
        object.__setattr__(self, "rewards", tuple(rewards))
        object.__setattr__(self, "requirement", BigM.coerce(self.requirement))

    @property
    def mandatory(self) -> int:
        """Number of leading increments carrying an M part."""
        return sum(1 for r in self.rewards if r.m > 0)

    def cumulative(self, n: int) -> BigM:
        """Reward of one period in which the job ran ``n`` slots."""
        return bigm_sum(self.rewards[:n])

    def max_frame_reward(self, T: int) -> BigM:
        return bigm_sum(self.rewards) * (T // self.period)


@dataclass(frozen=True)
class TaskSystem:
    tasks: tuple[TaskSpec, ...]
    frame_length: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.frame_length and self.tasks:
            object.__setattr__(
                self, "frame_length", frame_length(t.period for t in self.tasks)
            )

    @property
    def T(self) -> int:
        return self.frame_length

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    def periods_per_frame(self, task: TaskSpec) -> int:
        return self.frame_length // task.period

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def with_requirements(self, reqs: Mapping[str, BigMLike]) -> "TaskSystem":
        tasks = [
            TaskSpec(t.id, t.period, t.rewards, reqs.get(t.id, t.requirement))
            for t in self.tasks
        ]
        return TaskSystem(tuple(tasks), self.frame_length)


# ---------------------------------------------------------------------------
# imprecise-computation mapping


@dataclass(frozen=True)
class Curve:
    """Optional-part reward curve ``f(t)`` from one of three families.

    exp:    a * (1 - exp(-t / b))
    log:    a * ln(b * t + 1)
    linear: a * t
    """

    kind: str
    a: float
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "log", "linear"):
            raise ValueError(f"unknown curve kind {self.kind!r}")

    def __call__(self, t: float) -> float:
        if self.kind == "exp":
            return self.a * (1.0 - math.exp(-t / self.b))
        if self.kind == "log":
            return self.a * math.log(self.b * t + 1.0)
        return self.a * t

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "a": self.a}
        if self.kind != "linear":
            out["b"] = self.b
        return out


@dataclass(frozen=True)
class ImpreciseTaskParams:
    mandatory: int
    optional: int
    reward_fn: Callable[[int], float]
    frame_requirement_extra: float = 0.0


def build_imprecise_task(
    task_id: str,
    params: ImpreciseTaskParams,
    period: int,
    frame: int,
    tol: float = TOL,
) -> TaskSpec:
    """Map a mandatory/optional task onto per-slot rewards.

    The first ``mandatory`` slots earn ``M``; optional slot ``j`` (1-based)
    earns ``f(j) - f(j-1)``; everything past ``mandatory + optional`` earns 0.
    The requirement is ``(frame/period) * mandatory * M + q_hat``.
    """
    m, o = params.mandatory, params.optional
    if m < 0 or o < 0:
        raise ValueError("mandatory and optional lengths must be nonnegative")
    if m + o > period:
        raise ValueError(f"mandatory + optional = {m + o} exceeds period {period}")
    if frame % period:
        raise ValueError(f"period {period} does not divide frame {frame}")
    if params.frame_requirement_extra < 0:
        raise ValueError("q_hat must be nonnegative")
    f = params.reward_fn
    samples = [f(t) for t in range(o + 1)]
    if abs(samples[0]) > tol:
        raise ValueError(f"reward curve must satisfy f(0) = 0, got {samples[0]}")
    diffs = [samples[j] - samples[j - 1] for j in range(1, o + 1)]
    for j in range(1, len(diffs)):
        if diffs[j] > diffs[j - 1] + tol:
            raise ValueError(f"reward curve is not concave at t={j}")
    if any(d < -tol for d in diffs):
        raise ValueError("reward curve must be nondecreasing")
    rewards = [M] * m + [BigM(0.0, max(d, 0.0)) for d in diffs]
    rewards += [ZERO] * (period - len(rewards))
    requirement = BigM((frame // period) * m, params.frame_requirement_extra)
    return TaskSpec(task_id, period, tuple(rewards), requirement)


# ---------------------------------------------------------------------------
# validation


def validate_system(sys: TaskSystem, tol: float = TOL) -> list[str]:
    """Return every invariant violation found; an empty list means valid."""
    out: list[str] = []
    if not sys.tasks:
        return ["system has no tasks"]
    ids = [t.id for t in sys.tasks]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        out.append(f"duplicate task ids: {dupes}")
    periods_ok = True
    for t in sys.tasks:
        if not isinstance(t.period, int) or t.period <= 0:
            out.append(f"{t.id}: period must be a positive integer")
            periods_ok = False
            continue
        if len(t.rewards) != t.period:
            out.append(f"{t.id}: {len(t.rewards)} rewards for period {t.period}")
        for i, r in enumerate(t.rewards, 1):
            if r.m < -tol or r.c < -tol:
                out.append(f"{t.id}: reward {i} is negative")
            if not (is_integral(r.m, tol) and -tol <= r.m <= 1 + tol):
                out.append(f"{t.id}: reward {i} has M part {r.m} not in {{0, 1}}")
        for i in range(1, len(t.rewards)):
            if t.rewards[i] > t.rewards[i - 1]:
                out.append(f"{t.id}: rewards not nonincreasing at index {i + 1}")
                break
        # zero requirements are allowed so that requirement sweeps can start at 0
        if t.requirement.m < -tol or t.requirement.c < -tol:
            out.append(f"{t.id}: requirement must be nonnegative")
    if periods_ok:
        T = frame_length(t.period for t in sys.tasks)
        if sys.frame_length != T:
            out.append(f"frame_length {sys.frame_length} != lcm of periods {T}")
    return out


def ensure_valid(sys: TaskSystem) -> None:
    violations = validate_system(sys)
    if violations:
        raise InvalidSystemError(violations)


# ---------------------------------------------------------------------------
# JSON


def _task_from_json(obj: Mapping[str, Any], T: int) -> TaskSpec:
    tid = str(obj["id"])
    period = int(obj["period"])
    if "rewards" in obj:
        return TaskSpec(
            tid,
            period,
            tuple(BigM.coerce(r) for r in obj["rewards"]),
            BigM.coerce(obj.get("requirement", 0.0)),
        )
    curve = obj["curve"]
    kind = curve["kind"]
    fn = Curve(kind, float(curve["a"]), float(curve.get("b", 1.0)))
    params = ImpreciseTaskParams(
        int(obj.get("mandatory", 0)),
        int(obj.get("optional", 0)),
        fn,
        float(obj.get("q_hat", 0.0)),
    )
    return build_imprecise_task(tid, params, period, T)


def system_from_json(doc: Mapping[str, Any]) -> TaskSystem:
    entries = doc["tasks"]
    T = int(doc.get("frame_length") or frame_length(int(e["period"]) for e in entries))
    return TaskSystem(tuple(_task_from_json(e, T) for e in entries), T)


def system_to_json(sys: TaskSystem) -> dict[str, Any]:
    return {
        "frame_length": sys.frame_length,
        "tasks": [
            {
                "id": t.id,
                "period": t.period,
                "rewards": [r.as_pair() for r in t.rewards],
                "requirement": t.requirement.as_pair(),
            }
            for t in sys.tasks
        ],
    }


def load_system(path: str | Path) -> TaskSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))


def debts_from_json(doc: Any, sys: TaskSystem) -> dict[str, BigM]:
    """Accept ``{"A": [m, c], ...}`` or a list ordered like the tasks."""
    if isinstance(doc, Mapping):
        return {t.id: BigM.coerce(doc.get(t.id, 0.0)) for t in sys.tasks}
    values = list(doc)
    if len(values) != len(sys.tasks):
        raise ValueError(f"expected {len(sys.tasks)} debts, got {len(values)}")
    return {t.id: BigM.coerce(v) for t, v in zip(sys.tasks, values)}
