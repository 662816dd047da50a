"""Compare check_feasibility against the brute-force oracle on random systems."""

import argparse
import random
import time

from rewardsched.feasibility import brute_force_feasible, check_feasibility
from rewardsched.generators import random_system


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--max-frame", type=int, default=12)
    ap.add_argument("--grain", type=int, default=None,
                    help="use the multiset oracle with this grain instead of the LP")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    disagree = feasible = 0
    for _ in range(args.n):
        sys_ = random_system(rng, max_tasks=3, max_frame=args.max_frame, load=(0.0, 1.0))
        a = check_feasibility(sys_)
        b = brute_force_feasible(sys_, grain=args.grain, max_frame=args.max_frame)
        feasible += a.feasible
        if a.feasible != b.feasible:
            disagree += 1
            print("disagree:", sys_, "slack", a.slack)
    print(f"{args.n} systems, {feasible} feasible, {disagree} disagreements, "
          f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
