"""Requirement sweeps over the two six-task benchmark systems.

Every task's finite requirement is ``c_X * alpha`` (tasks A-C) or
``c_X * beta`` (tasks D-F). A sweep marks each grid point feasible or not and
records which policies fulfil it in simulation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .feasibility import check_feasibility
from .model import Curve, ImpreciseTaskParams, TaskSystem, build_imprecise_task, frame_length
from .simulator import POLICIES, SimConfig, simulate

FAMILIES = ("exp", "log", "linear")

# (id, period, mandatory, optional, {family: (a, b)}, coefficient, axis)
TABLE1 = (
    ("A", 20, 1, 10, {"exp": (15, 2), "log": (7, 20), "linear": (5, 1)}, 5, "alpha"),
    ("B", 30, 1, 15, {"exp": (20, 2 / 3), "log": (10, 50), "linear": (7, 1)}, 7, "alpha"),
    ("C", 40, 2, 20, {"exp": (4, 2), "log": (2, 10), "linear": (1, 1)}, 1, "alpha"),
    ("D", 60, 3, 30, {"exp": (10, 10), "log": (5, 25), "linear": (4, 1)}, 4, "beta"),
    ("E", 80, 4, 40, {"exp": (5, 2), "log": (3, 30), "linear": (2, 1)}, 2, "beta"),
    ("F", 120, 6, 60, {"exp": (8, 20), "log": (4, 6), "linear": (3, 1)}, 3, "beta"),
)

TABLE2 = (
    ("A", 120, 0, 120, {"exp": (15, 15), "log": (7, 3), "linear": (5, 1)}, 5, "alpha"),
    ("B", 120, 0, 120, {"exp": (20, 8 / 3), "log": (10, 10), "linear": (7, 1)}, 7, "alpha"),
    ("C", 120, 0, 120, {"exp": (4, 5), "log": (2, 3), "linear": (1, 1)}, 1, "alpha"),
    ("D", 120, 0, 120, {"exp": (10, 30), "log": (5, 15), "linear": (4, 1)}, 4, "beta"),
    ("E", 120, 0, 120, {"exp": (5, 5), "log": (3, 20), "linear": (2, 1)}, 2, "beta"),
    ("F", 120, 0, 120, {"exp": (8, 20), "log": (4, 6), "linear": (3, 1)}, 3, "beta"),
)

TABLES = {1: TABLE1, 2: TABLE2}


def table_rows(table: int):
    try:
        return TABLES[table]
    except KeyError:
        raise ValueError(f"table must be 1 or 2, got {table}") from None


def table_curve(table: int, family: str, task_id: str) -> Curve:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    for row in table_rows(table):
        if row[0] == task_id:
            a, b = row[4][family]
            return Curve(family, a, b)
    raise KeyError(task_id)


def build_table_system(table: int, family: str, alpha: float, beta: float) -> TaskSystem:
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    rows = table_rows(table)
    T = frame_length(r[1] for r in rows)
    tasks = []
    for tid, period, m, o, _, coef, axis in rows:
        q_hat = coef * (alpha if axis == "alpha" else beta)
        params = ImpreciseTaskParams(m, o, table_curve(table, family, tid), q_hat)
        tasks.append(build_imprecise_task(tid, params, period, T))
    return TaskSystem(tuple(tasks), T)


# ---------------------------------------------------------------------------
# sweeps


def grid_values(lo: float, hi: float, step: float) -> list[float]:
    """``lo, lo+step, ...`` up to ``hi`` inclusive, rounded against drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("empty range")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 10) for k in range(n + 1)]


def parse_range(text: str) -> tuple[float, float, float]:
    """``a0:a1:step`` -> floats."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must look like a0:a1:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    grid_values(lo, hi, step)
    return lo, hi, step


def feasible_corner(table: int, family: str, axis: str, hi: float = 1e3, iters: int = 50) -> float:
    """Largest alpha (beta = 0) or beta (alpha = 0) that is still feasible."""

    def ok(v: float) -> bool:
        a, b = (v, 0.0) if axis == "alpha" else (0.0, v)
        return check_feasibility(build_table_system(table, family, a, b)).feasible

    lo = 0.0
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def default_range(table: int, family: str, axis: str, points: int = 20) -> tuple[float, float, float]:
    """``[0, 2 * corner]`` with at most ``points`` grid values per axis.

    The step is 0.05 unless that would exceed ``points`` values, in which case
    it is coarsened to a round multiple of 0.05.
    """
    top = 2 * feasible_corner(table, family, axis)
    step = 0.05
    if top / step + 1 > points:
        step = 0.05 * math.ceil(top / (0.05 * (points - 1)))
    hi = step * math.floor(top / step + 1e-9)
    return 0.0, round(hi, 10), round(step, 10)


@dataclass
class SweepSpec:
    table: int
    family: str
    alpha: tuple[float, float, float]
    beta: tuple[float, float, float]
    policies: tuple[str, ...] = ("greedy", "opt")

    def __post_init__(self):
        table_rows(self.table)
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        for p in self.policies:
            if p not in POLICIES:
                raise ValueError(f"unknown policy {p!r}")
        self.alphas = grid_values(*self.alpha)
        self.betas = grid_values(*self.beta)


@dataclass
class GridPoint:
    alpha: float
    beta: float
    feasible: bool
    fulfilled: dict[str, bool] = field(default_factory=dict)
    error: str = ""


@dataclass
class RegionResult:
    policies: tuple[str, ...]
    points: list[GridPoint]

    def region(self, name: str) -> set[tuple[float, float]]:
        """Grid points marked true for ``feasible`` or a policy name."""
        if name == "feasible":
            return {(p.alpha, p.beta) for p in self.points if p.feasible}
        return {(p.alpha, p.beta) for p in self.points if p.fulfilled.get(name)}

    @property
    def alphas(self) -> list[float]:
        return sorted({p.alpha for p in self.points})

    @property
    def betas(self) -> list[float]:
        return sorted({p.beta for p in self.points})

    def columns(self) -> list[str]:
        return ["alpha", "beta", "feasible"] + [f"fulfilled_{p}" for p in self.policies] + ["error"]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for p in self.points:
                w.writerow(
                    [p.alpha, p.beta, int(p.feasible)]
                    + [int(p.fulfilled.get(x, False)) for x in self.policies]
                    + [p.error]
                )

    @classmethod
    def read_csv(cls, path: str | Path) -> "RegionResult":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            return cls((), [])
        policies = tuple(k[len("fulfilled_"):] for k in rows[0] if k.startswith("fulfilled_"))
        points = [
            GridPoint(
                float(r["alpha"]),
                float(r["beta"]),
                r["feasible"] == "1",
                {x: r[f"fulfilled_{x}"] == "1" for x in policies},
                r.get("error", "") or "",
            )
            for r in rows
        ]
        return cls(policies, points)


def sweep(spec: SweepSpec, cfg: SimConfig = SimConfig(), skip_infeasible: bool = True) -> RegionResult:
    """Evaluate every grid point in alpha-major order.

    With ``skip_infeasible`` a policy is not simulated at infeasible points:
    no policy can fulfil them, and the finite-horizon test could only report
    a false positive there.
    """
    points = []
    for a in spec.alphas:
        for b in spec.betas:
            pt = GridPoint(a, b, False)
            try:
                sys = build_table_system(spec.table, spec.family, a, b)
                pt.feasible = check_feasibility(sys).feasible
                for pol in spec.policies:
                    if skip_infeasible and not pt.feasible:
                        pt.fulfilled[pol] = False
                        continue
                    pt.fulfilled[pol] = simulate(sys, pol, cfg).fulfilled
            except Exception as exc:  # recorded per point, sweep goes on
                pt.error = f"{type(exc).__name__}: {exc}"
            points.append(pt)
    return RegionResult(tuple(spec.policies), points)


@dataclass
class Boundary:
    region: str
    alpha: float
    beta: Optional[float]


def region_boundary(result: RegionResult, regions: Optional[Sequence[str]] = None):
    """Largest true beta per alpha column, plus any non-monotone columns.

    Returns ``(boundaries, flags)``; ``beta`` is None for an empty column. A
    column is flagged when its true points are not a prefix of the betas
    (holes) or when its boundary rises above the previous column's.
    """
    names = list(regions) if regions is not None else ["feasible", *result.policies]
    betas = result.betas
    out: list[Boundary] = []
    flags: list[str] = []
    for name in names:
        marked = result.region(name)
        prev = math.inf
        for a in result.alphas:
            col = [b for b in betas if (a, b) in marked]
            top = max(col) if col else None
            if col and col != betas[: len(col)]:
                flags.append(f"{name}: column alpha={a} has holes")
            level = top if top is not None else -math.inf
            if level > prev + 1e-12:
                flags.append(f"{name}: boundary rises at alpha={a}")
            prev = level
            out.append(Boundary(name, a, top))
    return out, flags


def write_boundary_csv(boundaries: Iterable[Boundary], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "alpha", "boundary_beta"])
        for bd in boundaries:
            w.writerow([bd.region, bd.alpha, "" if bd.beta is None else bd.beta])


def regions_match(result: RegionResult, a: str, b: str, steps: int = 1) -> list[tuple[float, float]]:
    """Points of one region lying more than ``steps`` grid steps (Chebyshev
    distance in grid indices) from every point of the other region. An empty
    list means the two regions agree within that tolerance.
    """
    ra, rb = result.region(a), result.region(b)
    ai = {x: k for k, x in enumerate(result.alphas)}
    bi = {x: k for k, x in enumerate(result.betas)}

    def near(pt, other) -> bool:
        i, j = ai[pt[0]], bi[pt[1]]
        return any(abs(ai[q[0]] - i) <= steps and abs(bi[q[1]] - j) <= steps for q in other)

    bad = []
    for pt in sorted(ra ^ rb):
        other = rb if pt in ra else ra
        if not near(pt, other):
            bad.append(pt)
    return bad
