"""Shared fixtures: small prime fields and a text-to-polynomial helper."""

import pytest

from sparsefactor.cli import parse_poly
from sparsefactor.ff import build_extension


@pytest.fixture(scope="session")
def F2():
    return build_extension(2, 1)


@pytest.fixture(scope="session")
def F5():
    return build_extension(5, 1)


@pytest.fixture(scope="session")
def F7():
    return build_extension(7, 1)


@pytest.fixture(scope="session")
def F11():
    return build_extension(11, 1)


@pytest.fixture(scope="session")
def P():
    """Parse `text` into a SparsePoly over `field` with `n` variables.

    Exponent of the largest variable mentioned decides n when not given.
    """

    def make(field, text, n=None):
        if n is None:
            import re

            idx = [int(m) for m in re.findall(r"x(\d+)", text)]
            n = max(idx) if idx else 1
        return parse_poly(text, n, field)

    return make
