import numpy as np
import pytest

from indefpencil.builtins import paper5x5
from indefpencil.continuation import classify_asymptotics, make_grid, sweep

SQRT29 = np.sqrt(29.0)
LAM1 = (1.0 + SQRT29) / 14.0
LAM_NEG1 = (1.0 - SQRT29) / 14.0


@pytest.fixture(scope="session")
def p5():
    return paper5x5()


@pytest.fixture(scope="session")
def p5_report(p5):
    rep = sweep(p5, make_grid(-1e6, 1e6, 400, p5))
    classify_asymptotics(rep)
    return rep


def diag_pencil(b, c, mode="fixed"):
    from indefpencil.pencil import Pencil

    n = len(b)
    return Pencil(np.eye(n), np.diag(b), np.diag(c), mode=mode)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
