import pytest

from sparse_upa import SystemConfig

LAMBDA = 0.01
FOCUS = 4000 * LAMBDA


@pytest.fixture
def lam():
    return LAMBDA


@pytest.fixture
def focus():
    return FOCUS


@pytest.fixture
def collected():
    """35x35 half-wavelength array."""
    return SystemConfig(LAMBDA, 35, 0.5 * LAMBDA, 1.0)


@pytest.fixture
def sparse():
    """35x35 array with 10-wavelength spacing."""
    return SystemConfig(LAMBDA, 35, 10 * LAMBDA, 1.0)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line, then assert it.

    Lines are also collected for the terminal summary so they appear
    without ``-s``.
    """
    store = request.config.stash.setdefault(_CRITERIA, {})

    def check(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if store:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(store):
            terminalreporter.write_line(store[number])
