import numpy as np
import pytest
from hypothesis import settings

from pairtune.space import ConfigSpace, ParamSpec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def mixed_space():
    return ConfigSpace((
        ParamSpec("buffer_mb", "integer", 16, 1024, default=128),
        ParamSpec("ratio", "continuous", 0.0, 1.0),
        ParamSpec("mode", "categorical", levels=("fast", "safe", "balanced", "off")),
    ))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""

    def record(number, title, passed, detail):
        _ACCEPTANCE.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number}: "
                                    f"{title} ({detail})"))
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
