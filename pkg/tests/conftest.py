import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mmflow.algebra import make_torus_rep

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def complex_vectors(draw, d):
    re = draw(st.lists(finite, min_size=d, max_size=d))
    im = draw(st.lists(finite, min_size=d, max_size=d))
    return np.array(re) + 1j * np.array(im)


@st.composite
def torus_instances(draw, d_max=5, r_max=3, w_max=4, zeros=True):
    """(rep, x) with random integer weights; coordinates may be zeroed."""
    d = draw(st.integers(1, d_max))
    r = draw(st.integers(1, r_max))
    w = draw(st.lists(st.lists(st.integers(-w_max, w_max), min_size=r, max_size=r), min_size=d, max_size=d))
    x = draw(complex_vectors(d))
    if zeros:
        mask = draw(st.lists(st.booleans(), min_size=d, max_size=d))
        x = np.where(mask, 0, x)
    return make_torus_rep(r, w), x


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
