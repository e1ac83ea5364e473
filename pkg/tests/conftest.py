import math

import numpy as np
import pytest

from sbcoeff.functions import FunctionSpec

BUILTINS = ["exp", "expi", "sin", "cos"]
COHERENT = FunctionSpec.coherent(0.5 * np.exp(1j * math.pi / 3))


@pytest.fixture(params=BUILTINS + ["coherent"])
def builtin(request):
    if request.param == "coherent":
        return COHERENT
    return FunctionSpec(request.param)


def wrap(x):
    """Map an angle difference to (-pi, pi]."""
    return (x + math.pi) % (2 * math.pi) - math.pi


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str):
    """Record and print one acceptance verdict line."""
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
