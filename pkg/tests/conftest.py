import numpy as np
import pytest

from randmean.measures import build_atomic_measure, discretize_density
from randmean.models import DirichletGamma, ExtendedGamma, GeneralizedGamma, StepFunction


@pytest.fixture
def two_atom_base():
    """alpha(A) = alpha(Ac) = 1 with A = {x < 0.5}."""
    return build_atomic_measure([(0.25, 1.0), (0.75, 1.0)])


@pytest.fixture
def indicator_g():
    return lambda x: (np.asarray(x) < 0.5).astype(float)


@pytest.fixture
def dirichlet_two_atoms(two_atom_base):
    return DirichletGamma(two_atom_base)


@pytest.fixture
def eg_two_rates(two_atom_base):
    """Extended gamma with rate 2 on A = {x < 0.5} and rate 1 elsewhere."""
    return ExtendedGamma(two_atom_base, StepFunction((-1e9, 0.5), (2.0, 1.0)))


@pytest.fixture
def uniform_base_8():
    return discretize_density(lambda x: np.ones_like(x), (0.0, 1.0), 8, 2.0)


@pytest.fixture
def gg_half():
    p0 = build_atomic_measure([(0.0, 0.5), (1.0, 0.5)])
    return GeneralizedGamma(0.5, 1.0, p0)
