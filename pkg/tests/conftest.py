import numpy as np
import pytest

from relaysec.analytic import Scenario


def fig2_scenario(eta_db=10.0, r0=1.0, rs=0.125, lam=0.1, **kw):
    return Scenario.build(eta_db, r0=r0, rs=rs, lam=lam, n_t=3, k_r=3, fd_td=0.1, **kw)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(2024))


def within_3se(estimate, p, n):
    se = np.sqrt(max(p * (1.0 - p), 1e-300) / n)
    return abs(estimate - p) <= 3.0 * se
