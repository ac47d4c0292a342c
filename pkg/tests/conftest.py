import numpy as np
import pytest

from berglab.domain import ellipsoid, unit_ball


@pytest.fixture(scope="session")
def disc():
    """Unit disc with the certified near-boundary threshold."""
    return unit_ball(1, theta=0.25)


@pytest.fixture(scope="session")
def disc_global():
    """Unit disc with theta=1: the log(1/-r) metric holds globally."""
    return unit_ball(1, theta=1.0)


@pytest.fixture(scope="session")
def ball2():
    return unit_ball(2, theta=0.25)


@pytest.fixture(scope="session")
def ball2_global():
    return unit_ball(2, theta=1.0)


@pytest.fixture(scope="session")
def egg():
    return ellipsoid([1.0, 2.0])


def cpoint(*vals):
    return np.asarray(vals, dtype=complex)
