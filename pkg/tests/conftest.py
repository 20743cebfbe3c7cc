from __future__ import annotations

import numpy as np
import pytest

from regret2cause.cbn import make_cbn
from regret2cause.cid import Cid


def env_a_cbn():
    return make_cbn(
        [("X", 2), ("Y", 2)],
        {"X": ((), [[0.7, 0.3]]), "Y": (("X",), [[0.8, 0.2], [0.2, 0.8]])},
    )


def env_a_cid() -> Cid:
    # U(d=0) = 0.5 everywhere; U(d=1) = y
    table = np.zeros((2, 2, 2))
    table[..., 0] = 0.5
    table[:, 1, 1] = 1.0
    return Cid.build(env_a_cbn(), "D", (), ("X", "Y", "D"), table.reshape(-1))


@pytest.fixture
def env_a():
    return env_a_cid()


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
