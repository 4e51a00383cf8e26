"""Test configuration and fixtures."""
import numpy as np
import pytest

from tze_dynsys.config import settings
from tze_dynsys.io import write_tensor
from tze_dynsys.tensor import (
    make_alternating,
    make_diagonal,
    make_kolda_mayo,
    make_random_transition,
)

# Z-eigenvalues of the Kolda-Mayo tensor, canonicalized to lambda >= 0
KOLDA_MAYO_EIGENVALUES = (0.8730, 0.4306, 0.0180, 0.0006, 0.0018, 0.0033, 0.2294)
KOLDA_MAYO_UNSTABLE = (0.0018, 0.0033, 0.2294)
CUI_EIGENVALUES = (0.0, 4.2876, 9.9779)


@pytest.fixture
def kolda_mayo():
    """The 3x3x3 symmetric tensor with seven eigenvalues."""
    return make_kolda_mayo()


@pytest.fixture
def diag_521():
    """Diagonal tensor with d = (5, 2, 1), order 3."""
    return make_diagonal([5.0, 2.0, 1.0], 3)


@pytest.fixture
def cui_tensor():
    """Order-3, dimension-5 alternating-reciprocal tensor."""
    return make_alternating(3, 5)


@pytest.fixture
def transition_tensor():
    """Strictly positive 4-state transition tensor."""
    return make_random_transition(4, seed=7)


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def tensor_file(tmp_path, kolda_mayo):
    """Kolda-Mayo tensor written as a tenz v1 file."""
    path = tmp_path / "kolda_mayo.tenz"
    write_tensor(kolda_mayo, path)
    return path


@pytest.fixture
def metrics_disabled():
    """Run with metrics collection switched off."""
    original = settings.metrics_enabled
    settings.metrics_enabled = False
    yield
    settings.metrics_enabled = original
