import numpy as np
import pytest

from eventaug import EventStream, SensorGeometry, canonicalize

# lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def random_stream(rng, n=None, width=None, height=None, t_max=None, sort=True) -> EventStream:
    width = int(rng.integers(1, 65)) if width is None else width
    height = int(rng.integers(1, 65)) if height is None else height
    n = int(rng.integers(0, 200)) if n is None else n
    t_max = int(rng.integers(1, 10**6)) if t_max is None else t_max
    s = EventStream(
        rng.integers(0, height, n),
        rng.integers(0, width, n),
        rng.integers(0, t_max + 1, n),
        rng.choice(np.array([-1, 1]), n),
        SensorGeometry(width, height),
    )
    return canonicalize(s) if sort else s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
