import pytest

from conormal_verify.half_space_core import HalfSpaceGrid
from conormal_verify.mollified_calculus import build_cutoff


@pytest.fixture(scope="session")
def grid():
    return HalfSpaceGrid()


@pytest.fixture(scope="session")
def small_grid():
    # coarse but valid box; enough for exact algebraic identities
    return HalfSpaceGrid(sizes=(256, 64))


@pytest.fixture(scope="session")
def cut():
    return build_cutoff(0.5)
