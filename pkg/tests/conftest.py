import numpy as np
import pytest

import fiberpert as fp

RS = 64e9
BETA2 = -21e-27          # s^2/m
GAMMA = 1.1e-3           # 1/(W m)
ALPHA_SSMF = fp.alpha_from_db_km(0.2)


@pytest.fixture(scope="session")
def lossless_link():
    return fp.homogeneous_link(1, 21.71e3, 0.0, BETA2, GAMMA,
                               amplification="lossless")


@pytest.fixture(scope="session")
def ssmf_link():
    return fp.homogeneous_link(1, 100e3, ALPHA_SSMF, BETA2, GAMMA)


@pytest.fixture(scope="session")
def probe_plan():
    return fp.ChannelPlan((fp.ChannelSpec(RS, 0.2, 1e-3),), probe=0)


@pytest.fixture(scope="session")
def probe_plan_rho0():
    return fp.ChannelPlan((fp.ChannelSpec(RS, 0.0, 1e-3),), probe=0)


@pytest.fixture(scope="session")
def small_kernel(lossless_link, probe_plan):
    """16-point unclipped kernel pair, small enough for loop oracles."""
    grid = fp.alias_kernel(lossless_link, probe_plan, 0, 16)
    return grid, fp.kernel_time_domain(grid, 0.0)


@pytest.fixture(scope="session")
def kernel64(lossless_link, probe_plan):
    """Production-sized kernel pair at the default grid."""
    grid = fp.alias_kernel(lossless_link, probe_plan, 0, 64)
    return grid, fp.kernel_time_domain(grid, 0.0)


def random_jones(rng, n):
    """Unit-variance complex symbol-like sequence, shape (n, 2)."""
    return (rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))) / 2.0
