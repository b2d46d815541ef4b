import json
import math

import numpy as np
import pytest

from estimator.adaptive_estimator import (AdaptiveConfig, AdaptiveSettings,
                                          auto_ell, default_K_n,
                                          ell_lower_bound, select_cutoff,
                                          select_cutoff_grid,
                                          select_from_estimates)
from estimator.adaptive_estimator.adaptive_estimator import kappa_for_law
from tools.count_law import CountLaw, kappa_symmetric
from tools.ecf_tools import CharFnGrid, Sample, exact_cf_compound
from tools.errors import BranchViolationMajority, DomainError
from tools.innovation_law import InnovationLaw


@pytest.fixture
def compound_sample():
    rng = np.random.default_rng(21)
    counts = np.where(rng.random(4096) < 0.7, 1, 2)
    return Sample(np.array([rng.normal(size=k).sum() for k in counts]), provenance="seed:21")


class TestPenalizedComparison:
    def test_flat_estimates_pick_smallest_k(self):
        selection = select_from_estimates(np.zeros((4, 2)), 1.0, 10)
        np.testing.assert_array_equal(selection["k_hat"], [1, 1])
        np.testing.assert_allclose(selection["V"], [0.1, 0.2, 0.3, 0.4])

    def test_constructed_trace(self):
        estimates = np.array([[0.0], [1.0], [1.0]])
        selection = select_from_estimates(estimates, 1.0, 10)
        # A(1) = max(1 - 0.2, 1 - 0.3) = 0.8, A(2) = A(3) = 0
        np.testing.assert_allclose(selection["A"][:, 0], [0.8, 0.0, 0.0])
        assert selection["k_hat"][0] == 2

    def test_last_candidate_has_no_bias_term(self):
        rng = np.random.default_rng(0)
        selection = select_from_estimates(rng.normal(size=(5, 7)), 0.5, 100)
        np.testing.assert_array_equal(selection["A"][-1], np.zeros(7))
        assert np.all(selection["A"] >= 0.0)

    def test_single_candidate(self):
        selection = select_from_estimates(np.array([[0.3, 0.1]]), 1.0, 10)
        np.testing.assert_array_equal(selection["k_hat"], [1, 1])


class TestConstants:
    def test_default_K_n(self):
        assert default_K_n(10_000) == 10
        assert default_K_n(10_000, "realdata") == 20
        assert default_K_n(16) == 2
        with pytest.raises(DomainError):
            default_K_n(100, "bootstrap")

    def test_kappa_for_law(self):
        assert kappa_for_law(CountLaw.shifted_poisson(0.1), 5.0)["kappa"] == pytest.approx(2.218, abs=1e-3)

    def test_rho0_is_halved_beyond_radius(self):
        constants = kappa_for_law(CountLaw.two_point(0.9014), 3.0)
        assert constants["rho0"] == pytest.approx(constants["rho_star"] / 2.0)

    def test_tabulated_law_uses_symmetric_bound(self):
        law = CountLaw.tabulated([0.5, 0.3, 0.2])
        constants = kappa_for_law(law)
        assert constants["kappa"] == kappa_symmetric(law)
        assert math.isnan(constants["rho_star"])

    def test_auto_ell(self, compound_sample):
        law = CountLaw.two_point(0.7)
        constants = auto_ell(compound_sample, law, 1.0, 3)
        expected = ell_lower_bound(constants["kappa"], constants["M_hat"], constants["mean_N"], 1.0)
        assert constants["ell_min"] == pytest.approx(expected)
        assert constants["ell"] == pytest.approx(1.01 * expected)
        assert constants["mean_N"] == pytest.approx(1.3)

    def test_settings_resolve(self, compound_sample):
        config, constants = AdaptiveSettings(ell=2.5).resolve(compound_sample, CountLaw.two_point(0.7))
        assert config.K_n == 8
        assert config.ell == 2.5
        assert constants == {"ell": 2.5}

    def test_invalid_config(self):
        with pytest.raises(DomainError):
            AdaptiveConfig(h=0.0, K_n=3, ell=1.0)
        with pytest.raises(DomainError):
            AdaptiveConfig(h=1.0, K_n=0, ell=1.0)
        with pytest.raises(DomainError):
            AdaptiveConfig(h=1.0, K_n=3, ell=-1.0)


class TestSelection:
    def test_grid_result_is_consistent(self, compound_sample, x_grid):
        law = CountLaw.two_point(0.7)
        config = AdaptiveConfig(h=1.0, K_n=4, ell=5.0, quad_nodes=512)
        result = select_cutoff_grid(compound_sample, law, config, x_grid)
        assert result.estimates.shape == (4, x_grid.size)
        np.testing.assert_array_equal(result.values, result.estimates[result.k_hat - 1, np.arange(x_grid.size)])
        trace = result.trace(100)
        assert [entry["k"] for entry in trace] == [1, 2, 3, 4]
        assert sum(entry["chosen"] for entry in trace) == 1

    def test_threads_do_not_change_result(self, compound_sample, x_grid):
        law = CountLaw.two_point(0.7)
        config = AdaptiveConfig(h=1.0, K_n=4, ell=5.0, quad_nodes=512)
        serial = select_cutoff_grid(compound_sample, law, config, x_grid, threads=1)
        parallel = select_cutoff_grid(compound_sample, law, config, x_grid, threads=3)
        np.testing.assert_array_equal(serial.estimates, parallel.estimates)
        np.testing.assert_array_equal(serial.k_hat, parallel.k_hat)

    def test_single_point_matches_grid(self, compound_sample):
        law = CountLaw.two_point(0.7)
        config = AdaptiveConfig(h=1.0, K_n=4, ell=5.0, quad_nodes=512)
        k_hat, value, trace = select_cutoff(compound_sample, law, config, 0.5)
        result = select_cutoff_grid(compound_sample, law, config, [0.5])
        assert k_hat == result.k_hat[0]
        assert value == pytest.approx(result.values[0], abs=1e-15)
        assert trace[k_hat - 1]["chosen"]

    def test_large_n_exact_cf_prefers_large_cutoff(self):
        law = CountLaw.two_point(0.7)
        cf = exact_cf_compound(law, InnovationLaw.laplace().cf, [0.0])
        config = AdaptiveConfig(h=2.0, K_n=5, ell=1.0, quad_nodes=1024)
        result = select_cutoff_grid(cf, law, config, [0.0], n=10 ** 9)
        assert result.k_hat[0] == 5

    def test_characteristic_function_needs_n(self):
        law = CountLaw.two_point(0.7)
        cf = exact_cf_compound(law, InnovationLaw.laplace().cf, [0.0])
        with pytest.raises(DomainError):
            select_cutoff_grid(cf, law, AdaptiveConfig(h=1.0, K_n=2, ell=1.0), [0.0])

    def test_errors_carry_candidate(self):
        cf = CharFnGrid(np.array([0.0]), np.array([1.0 + 0j]), "test",
                        evaluator=lambda u: np.cos(u).astype(complex))
        config = AdaptiveConfig(h=10.0, K_n=2, ell=1.0, quad_nodes=256)
        with pytest.raises(BranchViolationMajority) as info:
            select_cutoff_grid(cf, CountLaw.two_point(0.3), config, [0.0], n=100)
        assert info.value.k == 1

    def test_trace_json(self, compound_sample, tmp_path):
        config = AdaptiveConfig(h=1.0, K_n=3, ell=5.0, quad_nodes=256)
        result = select_cutoff_grid(compound_sample, CountLaw.two_point(0.7), config, [0.0, 1.0])
        path = result.trace_json(tmp_path / "trace.json", x_index=1)
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        assert payload["x"] == 1.0
        assert len(payload["trace"]) == 3
