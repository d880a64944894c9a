import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from tightspan.random_instances import random_metric, random_tree

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def metrics(draw, min_n=2, max_n=6):
    seed = draw(seeds)
    n = draw(st.integers(min_n, max_n))
    return random_metric(np.random.default_rng(seed), n)


@st.composite
def trees(draw, min_leaves=2, max_leaves=7):
    seed = draw(seeds)
    k = draw(st.integers(min_leaves, max_leaves))
    return random_tree(np.random.default_rng(seed), k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
