import pytest

from borelpde.problems import Ex1, Ex2, Ex3
from borelpde.solver import ProblemSpec, picard_solve

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def ex1_run():
    problem = ProblemSpec(Ex1(0.5), T=0.05, theta=0.0, nu_run=8.0, n_nodes=256, time_steps=16)
    return problem, picard_solve(problem)


@pytest.fixture(scope="session")
def ex2_run():
    problem = ProblemSpec(Ex2(), T=0.05, theta=0.0, nu_run=8.0, n_nodes=256, time_steps=16)
    return problem, picard_solve(problem)


@pytest.fixture(scope="session")
def ex3_run():
    problem = ProblemSpec(Ex3(1.0), T=0.05, theta=0.0, nu_run=10.0, n_nodes=256, time_steps=16)
    return problem, picard_solve(problem)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
