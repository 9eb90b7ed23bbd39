import numpy as np
import pytest
from hypothesis import settings, strategies as st

from orlicz_lorentz.funcspace import StepFunction

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def step_functions(draw, max_slabs=12, decreasing=False):
    n = draw(st.integers(1, max_slabs))
    widths = draw(st.lists(st.floats(0.01, 3.0), min_size=n, max_size=n))
    values = draw(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 10.0)), min_size=n, max_size=n))
    if decreasing:
        values = sorted(values, reverse=True)
    return StepFunction.from_slabs(widths, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def chi(a=0.0, b=1.0):
    return StepFunction.indicator(a, b)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects acceptance lines; they are printed in the terminal summary."""
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
