import numpy as np
import pytest

import forchflow as ff
from forchflow.solver import ObserverSpec, run


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Exercise every jitted kernel once so timing assertions never include
    compilation."""
    p = ff.two_term()
    ff.eval_K(p, 2.0)
    ff.eval_H(p, 2.0)
    g = ff.Grid(dim=1, cells=(8,), extents=(1.0,))
    p0 = ff.ScalarField(g, np.cos(np.pi * g.centers(0)))
    run(p0, p, ff.zero_flux(), ff.SolverConfig(dt=1e-2), 0.02, ObserverSpec(epochs=(0.02,)))
    g2 = ff.Grid(dim=2, cells=(8, 8), extents=(1.0, 1.0))
    vals = np.outer(np.cos(np.pi * g2.centers(0)), np.cos(np.pi * g2.centers(1)))
    run(ff.ScalarField(g2, vals), p, ff.zero_flux(), ff.SolverConfig(dt=1e-2), 0.02,
        ObserverSpec(epochs=(0.02,)))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_poly(rng, n_max=3, alpha_max=4.0, coef_range=(0.1, 10.0)):
    n = int(rng.integers(1, n_max + 1))
    alphas = (0.0,) + tuple(np.sort(rng.uniform(0.05, alpha_max, n)))
    coeffs = tuple(rng.uniform(*coef_range, n + 1))
    return ff.ForchheimerPolynomial(alphas, coeffs)
