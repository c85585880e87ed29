import numpy as np
import pytest

from steklov import build_disk_mesh, catenoid_mesh
from steklov.mesh import embed_in_dimension


@pytest.fixture(scope="session")
def catenoid_default():
    return catenoid_mesh(0.0, 24, 96)


@pytest.fixture(scope="session")
def catenoid_coarse():
    return catenoid_mesh(0.0, 12, 48)


@pytest.fixture(scope="session")
def catenoid_fine():
    return catenoid_mesh(0.0, 48, 192)


@pytest.fixture(scope="session")
def disk_default():
    return build_disk_mesh(16, 64)


@pytest.fixture(scope="session")
def disk_in_ball3():
    return embed_in_dimension(build_disk_mesh(16, 64), 3)


def bisection_root(f, lo, hi, iters=200):
    """Plain bisection; the independent root oracle used across the tests."""
    flo = f(lo)
    assert flo * f(hi) < 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
    return 0.5 * (lo + hi)


@pytest.fixture(scope="session")
def t_star():
    """Root of t = coth(t), found by bisection on [1.1, 1.3]."""
    return bisection_root(lambda t: t - (np.cosh(t) / np.sinh(t)), 1.1, 1.3)
