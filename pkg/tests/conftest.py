import pathlib

import pytest

from mixinterp.frontend import parse_problem, problem_from_script

DATA = pathlib.Path(__file__).parent / "data"

# filled by test_acceptance; echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def load(name: str):
    return problem_from_script(parse_problem((DATA / name).read_text()))


@pytest.fixture
def eq_chain():
    """(~q | a=s1) & (q | a=s2) & f(a)=t  versus  (~q | b=s1) & (q | b=s2) & f(b)!=t."""
    return load("eq_chain.smt2")


@pytest.fixture
def parity():
    """t <= 2a <= r  versus  r <= 2b+1 <= t over Int."""
    return load("parity.smt2")


@pytest.fixture
def combined():
    """t <= 2a <= s & f(a)=q  versus  s <= 2b <= t+1 & f(b)!=q."""
    return load("combined.smt2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
