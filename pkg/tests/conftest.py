import numpy as np
import pytest

import elastic_uc as uc


@pytest.fixture(scope="session")
def convex_geometry():
    return uc.make_geometry("convex")


@pytest.fixture(scope="session")
def split_geom():
    return uc.make_geometry("split")


@pytest.fixture(scope="session")
def two_cell_mesh():
    return uc.build_fitted_mesh([0.0, 1.0], [0.0, 1.0])


@pytest.fixture(scope="session")
def coarse_convex_mesh(convex_geometry):
    return uc.mesh_at_level(convex_geometry, 0)


@pytest.fixture(scope="session")
def convex_mesh_l1(convex_geometry):
    return uc.mesh_at_level(convex_geometry, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
