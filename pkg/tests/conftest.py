import numpy as np
import pytest

from fspd_risk_neutral import mu_series
from fspd_types import MarketQuote, ModelParams

# Terms (n, m), n = 0..7 down, m = 1..7 across, for S=3800, K=4000, r=1%,
# sigma=20%, tau=1, alpha=1.7, gamma=0.9, printed to three decimals.
# The (2, 5) cell is printed as "0.0.028" in the source table; read as 0.028.
TABLE1_TERMS = np.array([
    [429.751, 60.850, 7.216, 0.749, 0.070, 0.006, 0.000],
    [-203.666, -37.572, -5.320, -0.6315, -0.065, -0.006, -0.000],
    [28.893, 8.903, 1.642, 0.233, 0.028, 0.003, 0.000],
    [0.549, -0.842, -0.259, -0.048, -0.007, -0.000, -0.000],
    [-0.352, -0.012, 0.018, 0.006, 0.001, 0.000, 0.000],
    [-0.016, 0.006, 0.000, -0.000, -0.000, -0.000, -0.000],
    [0.005, 0.000, -0.000, -0.000, 0.000, 0.000, 0.000],
    [0.000, -0.000, -0.000, 0.000, 0.000, -0.000, -0.000],
])

# Cumulative price over m <= 1..7. The m = 4 cell is printed as 290.090 in the
# source table, but its own terms add up to 290.1025 there; read as 290.100.
TABLE1_CALL = np.array([255.162, 286.495, 289.792, 290.100, 290.126, 290.128, 290.128])

TABLE1_PRICE = 290.128


@pytest.fixture(scope="session")
def table1_params():
    return ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)


@pytest.fixture(scope="session")
def table1_quote():
    return MarketQuote(spot=3800, strike=4000, rate=0.01, maturity=1)


@pytest.fixture(scope="session")
def table1_mu(table1_params):
    return mu_series(table1_params).mu


@pytest.fixture
def table1_flags():
    return ["--alpha", "1.7", "--gamma", "0.9", "--sigma", "0.2",
            "--spot", "3800", "--strike", "4000", "--rate", "0.01", "--maturity", "1"]


@pytest.fixture(scope="session")
def table1_terms():
    return TABLE1_TERMS


@pytest.fixture(scope="session")
def table1_call():
    return TABLE1_CALL
