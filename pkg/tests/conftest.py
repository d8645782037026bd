import pytest
from hypothesis import HealthCheck, settings

from extremal_lab.precision import ZetaContext
from extremal_lab.roy import best_approx_polys, extract_roy_sequence

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def gamma_ctx():
    """[0; 1, 1, 1, ...] = (sqrt5 - 1)/2."""
    return ZetaContext.from_quotients("gamma", lambda i: 0 if i == 0 else 1)


@pytest.fixture(scope="session")
def nu_ctx():
    return ZetaContext.from_quotients("nu", lambda i: 1)


@pytest.fixture(scope="session")
def fib_ctx():
    return ZetaContext.from_spec("fib:1,2", bits=2048)


@pytest.fixture(scope="session")
def fib_roy(fib_ctx):
    return extract_roy_sequence(fib_ctx, 10**120)


@pytest.fixture(scope="session")
def fib_best(fib_ctx):
    return best_approx_polys(fib_ctx, 10**120)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.acceptance_lines


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)
