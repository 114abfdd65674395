import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncsg.group import GroupDescriptor, quadrature_grid

settings.register_profile("ncsg", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ncsg")


@pytest.fixture(scope="session")
def t1_grid():
    return quadrature_grid(GroupDescriptor("torus", (64,), 1))


@pytest.fixture(scope="session")
def t2_grid():
    return quadrature_grid(GroupDescriptor("torus", (16,), 2))


@pytest.fixture(scope="session")
def su2_grid():
    return quadrature_grid(GroupDescriptor("su2", (16, 8, 32)))


def random_quaternions(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_coefficients(rng, irreps):
    return [rng.normal(size=(ir.dim, ir.dim)) + 1j * rng.normal(size=(ir.dim, ir.dim)) for ir in irreps]
