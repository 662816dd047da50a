"""Command line entry point: ``rewardsched <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .feasibility import check_feasibility
from .model import InvalidSystemError, debts_from_json, load_system
from .offline import InfeasibleSystemError, OfflinePolicy
from .online import exhaustive_frame_opt, greedy_frame, opt_total_reward_frame, weighted_value
from .schedule import frame_rewards, schedule_to_json
from .simulator import POLICIES, SimConfig, simulate
from .experiments import (
    FAMILIES,
    RegionResult,
    SweepSpec,
    default_range,
    parse_range,
    region_boundary,
    sweep,
    write_boundary_csv,
)


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_check(args) -> int:
    verdict = check_feasibility(load_system(args.system))
    _dump(verdict.to_json())
    return 0 if verdict.feasible else 1


def cmd_offline(args) -> int:
    sys_ = load_system(args.system)
    pol = OfflinePolicy(sys_)
    totals = {x: [0.0, 0.0] for x in sys_.ids}
    frames = []
    for k, slots in enumerate(pol.frames(args.frames)):
        for x, q in frame_rewards(sys_, slots).items():
            totals[x][0] += q.m
            totals[x][1] += q.c
        frames.append({
            "frame": k,
            "schedule": schedule_to_json(slots),
            "cumulative": {x: list(v) for x, v in totals.items()},
        })
    _dump({
        "decomposition": [
            {"weight": str(w), "point": {f"{x}:{i}": n for (x, i), n in p.items() if n}}
            for w, p in pol.decomposition.parts
        ],
        "frames": frames,
    })
    return 0


def cmd_frame(args) -> int:
    sys_ = load_system(args.system)
    debts = debts_from_json(json.loads(Path(args.debts).read_text()), sys_)
    if args.policy == "greedy":
        slots, _ = greedy_frame(debts, sys_)
    elif args.policy == "exhaustive":
        slots, _ = exhaustive_frame_opt(debts, sys_, max_frame=args.max_frame)
    else:
        slots = opt_total_reward_frame(sys_)
    q = frame_rewards(sys_, slots)
    _dump({
        "schedule": schedule_to_json(slots),
        "frame_rewards": {x: v.as_pair() for x, v in q.items()},
        "weighted_value": weighted_value(debts, q).as_pair(),
    })
    return 0


def cmd_simulate(args) -> int:
    sys_ = load_system(args.system)
    cfg = SimConfig(args.warmup, args.frames, reward_tolerance=args.tolerance)
    res = simulate(sys_, args.policy, cfg, record_debts=bool(args.trace))
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "task", "m_part", "c_part"])
            for k, debts in enumerate(res.debt_history):
                for x, d in debts.items():
                    w.writerow([k, x, d.m, d.c])
    _dump(res.to_json())
    return 0


def cmd_sweep(args) -> int:
    policies = tuple(p for p in args.policies.split(",") if p)
    alpha = parse_range(args.alpha) if args.alpha else default_range(args.table, args.family, "alpha")
    beta = parse_range(args.beta) if args.beta else default_range(args.table, args.family, "beta")
    spec = SweepSpec(args.table, args.family, alpha, beta, policies)
    cfg = SimConfig(args.warmup, args.frames, reward_tolerance=args.tolerance)
    result = sweep(spec, cfg)
    result.write_csv(args.out)
    print(f"wrote {len(result.points)} grid points to {args.out}", file=sys.stderr)
    return 0


def cmd_boundary(args) -> int:
    result = RegionResult.read_csv(args.region)
    bounds, flags = region_boundary(result)
    if args.out:
        write_boundary_csv(bounds, args.out)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["region", "alpha", "boundary_beta"])
        for b in bounds:
            w.writerow([b.region, b.alpha, "" if b.beta is None else b.beta])
    for f in flags:
        print(f"warning: {f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rewardsched", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("check", help="feasibility verdict for a system file")
    s.add_argument("system")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("offline", help="frames of the offline feasibility-optimal policy")
    s.add_argument("system")
    s.add_argument("--frames", type=int, default=10)
    s.set_defaults(fn=cmd_offline)

    s = sub.add_parser("frame", help="one frame under fixed debts")
    s.add_argument("system")
    s.add_argument("--debts", required=True)
    s.add_argument("--policy", choices=("greedy", "opt", "exhaustive"), default="greedy")
    s.add_argument("--max-frame", type=int, default=8, help="size guard for exhaustive search")
    s.set_defaults(fn=cmd_frame)

    s = sub.add_parser("simulate", help="run a policy with debt accounting")
    s.add_argument("system")
    s.add_argument("--policy", choices=POLICIES, default="greedy")
    s.add_argument("--frames", type=int, default=500)
    s.add_argument("--warmup", type=int, default=20)
    s.add_argument("--tolerance", type=float, default=0.0, help="relative reward allowance")
    s.add_argument("--trace", help="write per-frame debts to this CSV")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("sweep", help="(alpha, beta) requirement grid for a benchmark table")
    s.add_argument("--table", type=int, choices=(1, 2), required=True)
    s.add_argument("--family", choices=FAMILIES, required=True)
    s.add_argument("--policies", default="greedy,opt")
    s.add_argument("--alpha", help="a0:a1:step (default: 0 to twice the feasible corner)")
    s.add_argument("--beta", help="b0:b1:step")
    s.add_argument("--frames", type=int, default=500)
    s.add_argument("--warmup", type=int, default=20)
    s.add_argument("--tolerance", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("boundary", help="per-region boundary of a sweep CSV")
    s.add_argument("region")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_boundary)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InvalidSystemError, InfeasibleSystemError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
