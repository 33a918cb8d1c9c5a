"""Shared meshes and solver outputs.

Everything here is read-only for the tests, so session scope is safe and
keeps the suite fast: the h = 1/64 disk and its Green function are reused
by most of the acceptance criteria.
"""

import pytest

from singtm import (
    DomainSpec,
    TMParams,
    build_mesh,
    eigenpairs,
    maximize_subcritical,
    solve_green,
)


@pytest.fixture(scope="session")
def disk16():
    return build_mesh(DomainSpec.disk(1.0), 1.0 / 16.0)


@pytest.fixture(scope="session")
def disk32():
    return build_mesh(DomainSpec.disk(1.0), 1.0 / 32.0)


@pytest.fixture(scope="session")
def disk64():
    return build_mesh(DomainSpec.disk(1.0), 1.0 / 64.0)


@pytest.fixture(scope="session")
def eigs32(disk32):
    return eigenpairs(disk32, 8)


@pytest.fixture(scope="session")
def green32(disk32):
    return solve_green(disk32, 0.0)


@pytest.fixture(scope="session")
def green64(disk64):
    return solve_green(disk64, 0.0)


@pytest.fixture(scope="session")
def max16(disk16):
    """A cheap converged maximizer (beta 1/2, eps 0.1) shared across tests."""
    res = maximize_subcritical(disk16, TMParams(0.5, alpha=0.0, eps=0.1))
    assert res.converged
    return res
