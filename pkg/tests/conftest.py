import contextlib

import pytest

_ACCEPTANCE: list[str] = []


class _Criterion:
    def __init__(self, label):
        self.label = label
        self.detail = ""


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion.

    Usage::

        with criterion("3 intrinsic equilibrium") as c:
            c.detail = "max |r - sqrt(lam)| = ..."
            assert ...
    """

    @contextlib.contextmanager
    def run(label):
        c = _Criterion(label)
        try:
            yield c
        except BaseException:
            _ACCEPTANCE.append(f"FAIL  criterion {label}: {c.detail}")
            raise
        _ACCEPTANCE.append(f"PASS  criterion {label}: {c.detail}")

    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
