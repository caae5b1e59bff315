import sys
import os

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # Pay the kernel compilation cost before any timed assertion runs.
    from tllreach import simplex

    simplex.warmup()
