import numpy as np
import pytest

from symcap import bodies as B


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def disk():
    return B.Ball(1.0, 2)


@pytest.fixture(scope="session")
def square():
    return B.square(1.0)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def accept():
    """Record one acceptance line: accept(number, title, passed, detail)."""

    def record(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'} {title}: {detail}"
        _ACCEPTANCE.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
