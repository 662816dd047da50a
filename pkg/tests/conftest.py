import random

import hypothesis
import pytest
from hypothesis import strategies as st

from rewardsched.bigm import M, BigM
from rewardsched.generators import random_debts, random_system
from rewardsched.model import TaskSpec, TaskSystem

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile("default")


def two_task_system() -> TaskSystem:
    a = TaskSpec("A", 6, (100, 100, 100, 100, 1, 1), BigM(0, 0))
    b = TaskSpec("B", 3, (10, 0, 0), BigM(0, 0))
    return TaskSystem((a, b))


def edf_pair_system() -> TaskSystem:
    a = TaskSpec("A", 3, (3, 2, 1), BigM(0, 0))
    b = TaskSpec("B", 2, (2, 1), BigM(0, 0))
    return TaskSystem((a, b))


@pytest.fixture
def two_task():
    return two_task_system()


@pytest.fixture
def edf_pair():
    return edf_pair_system()


@pytest.fixture
def mandatory_only():
    a = TaskSpec("A", 2, (M, 0), BigM(2, 0))
    b = TaskSpec("B", 4, (M, M, 0, 0), BigM(2, 0))
    return TaskSystem((a, b))


# strategies ------------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def systems(draw, **kw):
    return random_system(random.Random(draw(seeds)), **kw)


@st.composite
def systems_with_debts(draw, **kw):
    rng = random.Random(draw(seeds))
    sys = random_system(rng, **kw)
    return sys, random_debts(rng, sys)


# acceptance summary ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
