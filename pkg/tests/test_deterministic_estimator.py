import numpy as np
import pytest

from estimator.base_estimator import (estimate_density,
                                      estimate_density_deterministic)
from tools.count_law import CountLaw
from tools.ecf_tools import (CharFnGrid, Sample, ecf_on_grid,
                             exact_cf_compound)
from tools.errors import DomainError, ModulusFloorViolation
from tools.innovation_law import InnovationLaw


def gaussian_sum_cf(m, loc=1.0):
    """CF of a sum of m independent N(loc, 1) variables."""
    return CharFnGrid(np.array([0.0]), np.array([1.0 + 0j]), "exact",
                      evaluator=lambda u: np.exp(m * (1j * loc * u - 0.5 * u ** 2)))


class TestDeterministicEstimator:
    def test_single_summand_matches_base_estimator(self, x_grid):
        rng = np.random.default_rng(4)
        cf = ecf_on_grid(Sample(rng.laplace(size=300)), [0.0])
        fixed = estimate_density_deterministic(cf, 1, 3.0, x_grid, quad_nodes=512)
        base = estimate_density(cf, CountLaw.tabulated([1.0]), 3.0, x_grid, quad_nodes=512)
        np.testing.assert_allclose(fixed.values, base.values, atol=1e-12)
        assert fixed.diagnostics["m"] == 1

    def test_root_follows_continuous_branch(self, x_grid):
        # the phase of phi_X reaches 8 rad on [0, 4], so a principal root would be wrong
        est = estimate_density_deterministic(gaussian_sum_cf(2), 2, 4.0, x_grid)
        truth = InnovationLaw.normal(1.0, 1.0).pdf(x_grid)
        np.testing.assert_allclose(est.values, truth, atol=1e-4)

    def test_sum_of_two_standard_normals(self):
        normal = InnovationLaw.normal()
        cf = exact_cf_compound(CountLaw.tabulated([0.0, 1.0]), normal.cf, [0.0])
        x = np.linspace(-4.0, 4.0, 161)
        est = estimate_density_deterministic(cf, 2, 8.0, x, modulus_floor=1e-30)
        np.testing.assert_allclose(est.values, normal.pdf(x), atol=1e-6)

    def test_modulus_floor(self, x_grid):
        with pytest.raises(ModulusFloorViolation) as info:
            estimate_density_deterministic(gaussian_sum_cf(2), 2, 5.0, x_grid)
        # exp(-u^2) drops below 1e-8 at u = sqrt(8 log 10)
        assert 4.28 < info.value.frequency < 4.31

    def test_custom_floor(self, x_grid):
        est = estimate_density_deterministic(gaussian_sum_cf(2), 2, 5.0, x_grid, modulus_floor=1e-12)
        assert est.cutoff_used == 5.0

    def test_invalid_m(self, x_grid):
        with pytest.raises(DomainError):
            estimate_density_deterministic(gaussian_sum_cf(1), 0, 1.0, x_grid)
        with pytest.raises(DomainError):
            estimate_density_deterministic(gaussian_sum_cf(1), 1.5, 1.0, x_grid)
