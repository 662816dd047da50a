"""Walk through the two-task frame example and the EDF realisation example."""

from rewardsched.bigm import BigM
from rewardsched.model import TaskSpec, TaskSystem
from rewardsched.offline import edf_schedule
from rewardsched.online import exhaustive_frame_opt, greedy_frame, weighted_value
from rewardsched.schedule import format_schedule


def main():
    sys_ = TaskSystem((
        TaskSpec("A", 6, (100, 100, 100, 100, 1, 1), BigM()),
        TaskSpec("B", 3, (10, 0, 0), BigM()),
    ))
    debts = {"A": 1, "B": 1}
    slots, q = greedy_frame(debts, sys_)
    print("greedy    ", format_schedule(slots), "value", weighted_value(debts, q))
    best_slots, best = exhaustive_frame_opt(debts, sys_)
    print("exhaustive", format_schedule(best_slots), "value", best)

    fig = TaskSystem((TaskSpec("A", 3, (3, 2, 1), BigM()), TaskSpec("B", 2, (2, 1), BigM())))
    n = {("A", 1): 1, ("A", 2): 2, ("B", 1): 2, ("B", 2): 1}
    slots, n_bar = edf_schedule(n, fig)
    print("edf       ", format_schedule(slots))
    print("n_bar     ", {f"{x}{i}": v for (x, i), v in sorted(n_bar.items())})


if __name__ == "__main__":
    main()
