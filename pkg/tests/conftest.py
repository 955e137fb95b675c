import pytest

from automaticity.membership import build_prime_oracle, build_square_oracle

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def primes_2_20():
    return build_prime_oracle(2**20)


@pytest.fixture(scope="session")
def primes_1e6():
    return build_prime_oracle(10**6)


@pytest.fixture(scope="session")
def squares_3_12():
    return build_square_oracle(3**12)


@pytest.fixture
def record():
    """Record a one-line acceptance verdict that is echoed in the terminal summary."""
    def _record(criterion: str, passed: bool, detail: str = ""):
        line = f"{criterion}: {'PASS' if passed else 'FAIL'}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
