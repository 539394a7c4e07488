import numpy as np
import pytest
from hypothesis import settings

from ljoint.characters import enumerate_characters, equivalent, make_tuple

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_inequivalent(rng, q_max, r, tries=200):
    """r pairwise inequivalent characters with moduli <= q_max, or None."""
    for _ in range(tries):
        chars = []
        for _ in range(r):
            q = int(rng.integers(3, q_max + 1))
            cs = enumerate_characters(q)
            chars.append(cs[int(rng.integers(len(cs)))])
        if all(not equivalent(a, b) for i, a in enumerate(chars) for b in chars[i + 1:]):
            return chars
    return None


@pytest.fixture
def mod5_pair():
    cs = enumerate_characters(5)
    return make_tuple([cs[1], cs[2]])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
