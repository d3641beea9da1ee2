import numpy as np
import pytest
from hypothesis import strategies as st

from kahlerq.core import KahlerState


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def kahler_states(draw, n=None):
    if n is None:
        n = draw(st.integers(min_value=1, max_value=8))
    q = draw(st.lists(finite, min_size=n, max_size=n))
    p = draw(st.lists(finite, min_size=n, max_size=n))
    return KahlerState(q, p)


@st.composite
def state_pairs(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    return draw(kahler_states(n)), draw(kahler_states(n))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
