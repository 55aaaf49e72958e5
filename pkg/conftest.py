import numpy as np
import pytest

from app.models.suite_models import SuiteConfig
from app.numerics.grid import GridSpec
from app.numerics.linalg import scalar_system, validate_system

PLANAR_S = [[0.0, 1.0], [-1.0, 0.0]]
ZERO_S = [[0.0, 0.0], [0.0, 0.0]]


@pytest.fixture
def heat():
    """A = 1, B = 0, S = 0 in two dimensions."""
    return scalar_system(1.0, 0.0, ZERO_S, name="heat")


@pytest.fixture
def rotating():
    return scalar_system(1.0 + 0.5j, 2.0, PLANAR_S, name="rotating")


@pytest.fixture
def damped_rotating():
    return scalar_system(1.0, 0.5, PLANAR_S, name="damped_rotating")


@pytest.fixture
def pair():
    return validate_system(np.diag([1.0, 1.5 + 0.5j]), np.diag([3.0, 5.0]), ZERO_S, name="pair")


@pytest.fixture
def shared():
    """Non-diagonal A and B sharing eigenvectors, with a slow rotation."""
    return validate_system(
        [[1.0, 1.0], [0.0, 2.0]],
        [[3.0, 2.0], [0.0, 5.0]],
        [[0.0, 0.5], [-0.5, 0.0]],
        name="shared",
    )


@pytest.fixture
def coarse_grid():
    return GridSpec.parse("-4:4:17").with_dimension(2)


@pytest.fixture
def quick_config(tmp_path):
    return SuiteConfig.build({"suites": ["riccati"], "out": str(tmp_path / "reports")})
