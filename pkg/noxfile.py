from __future__ import annotations

import nox

TESTS_PATH = "./tests"


@nox.session(
    python=["3.10"],
    # python=["3.10", "3.11", "3.12"],
    reuse_venv=False,
)
def tests(session: nox.Session):
    session.install(".[test]")

    session.run("pytest", "-m", "not slow", TESTS_PATH, env={"PYTHONPATH": ""})


@nox.session(python=["3.10"], reuse_venv=False)
def acceptance(session: nox.Session):
    session.install(".[test]")

    session.run("pytest", "-m", "slow", TESTS_PATH, env={"PYTHONPATH": ""})
