import numpy as np
import pytest

from latent_chain.estimation import FitOptions, em_fit
from latent_chain.inference import g_squared
from latent_chain.replication import (
    REPLICATION_BOUNDARY_TOL,
    REPLICATION_SEED,
    load_bundled_table,
    main_model_spec,
)


@pytest.fixture(scope="session")
def bif_table():
    return load_bundled_table()


@pytest.fixture(scope="session")
def main_spec():
    return main_model_spec()


@pytest.fixture(scope="session")
def main_fit(bif_table, main_spec):
    """The headline two-group fit, shared across test modules."""
    fit = em_fit(
        main_spec,
        bif_table,
        FitOptions(starts=32, seed=REPLICATION_SEED, boundary_tol=REPLICATION_BOUNDARY_TOL),
    )
    fit.g_squared = g_squared(bif_table, fit.params)
    return fit


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
