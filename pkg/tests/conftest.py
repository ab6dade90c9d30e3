import numpy as np
import pytest

import blowlab as bl


@pytest.fixture(scope="session")
def kg_small():
    """Klein-Gordon on (0, 2pi), modest grid; shared across tests."""
    return bl.make_klein_gordon(2 * np.pi, 63, mass_m=1.0, p=2.0)


@pytest.fixture(scope="session")
def scalar_ode():
    return bl.make_scalar_ode(1.0, 2.0)


@pytest.fixture(scope="session")
def boussinesq_small():
    return bl.make_boussinesq(np.pi, 31, a=1.0, nu=1.0, m=2)


@pytest.fixture(scope="session")
def nb_small():
    return bl.make_nonlinear_boundary(np.pi, 51, b=1.0, f=bl.power_nl(2))


def bump_profile(space, amplitude=1.0, center=0.5, width=0.15):
    x = space.coords
    L = space.lengths[0]
    r = np.abs(x - center * L) / (width * L)
    return amplitude * np.where(r < 1.0,
                                np.cos(0.5 * np.pi * np.minimum(r, 1.0))**2,
                                0.0)
