import numpy as np
import pytest

from qball.flow import FlowConfig, minimize
from qball.grid import make_grid
from qball.potentials import builtin_potential


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical runs")


@pytest.fixture(scope="session")
def gamma():
    return builtin_potential("gamma")


@pytest.fixture(scope="session")
def quadratic():
    return builtin_potential("quadratic")


@pytest.fixture(scope="session")
def coarse_grid():
    return make_grid(2, 40, 1000)


@pytest.fixture(scope="session")
def gamma300(gamma, coarse_grid):
    """Type-gamma soliton at charge 300 on a coarse grid (a few seconds)."""
    sol = minimize(FlowConfig(), gamma, 300.0, coarse_grid)
    assert sol.converged
    return sol


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# reference runs at the production resolution (n=2, r_max=40, M=2000),
# shared by the acceptance and reproduction suites


@pytest.fixture(scope="session")
def prod_grid():
    return make_grid(2, 40, 2000)


@pytest.fixture(scope="session")
def gamma_sweep(gamma, prod_grid):
    from qball.analysis import FIG2_CHARGES, sweep_charges

    return sweep_charges(gamma, FIG2_CHARGES, FlowConfig(), prod_grid)


@pytest.fixture(scope="session")
def nonalpha_beta_sweep(prod_grid):
    from qball.analysis import FIG2_CHARGES, sweep_charges

    return sweep_charges(builtin_potential("nonalpha_beta", {"a": 1}), FIG2_CHARGES, FlowConfig(), prod_grid)


@pytest.fixture(scope="session")
def alpha_beta_sweep(prod_grid):
    from qball.analysis import FIG2_CHARGES, sweep_charges

    return sweep_charges(builtin_potential("alpha_beta", {"a": 2.5}), FIG2_CHARGES, FlowConfig(), prod_grid)


@pytest.fixture(scope="session")
def all_sweeps(gamma_sweep, nonalpha_beta_sweep, alpha_beta_sweep):
    return {"gamma": gamma_sweep, "nonalpha_beta": nonalpha_beta_sweep, "alpha_beta": alpha_beta_sweep}


@pytest.fixture(scope="session")
def gamma300_prod(gamma_sweep):
    return dict(gamma_sweep.entries)[300.0]
