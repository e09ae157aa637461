import functools

import pytest
from hypothesis import HealthCheck, settings

from heatpath.fixtures import worked_example_bundle, three_stop_bundle

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def _example(with_hot_walks):
    return worked_example_bundle(with_hot_walks)


@pytest.fixture
def example():
    return _example(False)


@pytest.fixture
def example_batch():
    return _example(True)


@pytest.fixture
def three_stop():
    return three_stop_bundle()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
