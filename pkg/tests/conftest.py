import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def states(draw, support=6):
    """Points on the 6-level probability simplex, optionally restricted to the first `support` levels."""
    w = draw(st.lists(st.floats(0, 1), min_size=support, max_size=support))
    w = np.array(w)
    if w.sum() == 0:
        w[0] = 1.0
    p = np.zeros(6)
    p[:support] = w / w.sum()
    return p


@st.composite
def rate_sets(draw):
    from nvpump import RateConstants
    from oracles import NOMINAL_RATES

    return RateConstants(**{k: v * draw(st.floats(0.2, 5.0)) for k, v in NOMINAL_RATES.items()})


@pytest.fixture
def rng():
    return np.random.default_rng(20201016)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
