import numpy as np
import pytest

from mddest import Sample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sample(rng, n, k=2, q=1):
    z = rng.standard_normal((n, k))
    x = rng.standard_normal((n, q))
    return Sample(z, x)


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Record one PASS/FAIL line per acceptance criterion (printed in the terminal summary)."""
    lines = request.config._acceptance_lines

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config._acceptance_lines
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
