import numpy as np
import pytest
from scipy import stats

from estimator.adaptive_estimator import AdaptiveSettings
from estimator.base_estimator import CutoffRule, DensityEstimate
from tools.count_law import CountLaw
from tools.ecf_tools import Sample
from tools.errors import DomainError, GridMismatch
from tools.innovation_law import InnovationLaw
from tools.result_tools import rate_slope
from tools.simulation_tools import (default_xi_grid, error_on_grid,
                                    grid_search_cutoff, resample_errors,
                                    run_experiment, sample_compound,
                                    substream)

SMALL_GRID = np.linspace(-2.0, 2.0, 21)


class TestSampling:
    def test_substreams_are_independent_of_call_order(self):
        a = substream(3, 1, "counts").random(5)
        substream(3, 1, "innovations").random(5)
        np.testing.assert_array_equal(a, substream(3, 1, "counts").random(5))
        assert not np.array_equal(a, substream(3, 2, "counts").random(5))

    def test_prefix_property(self):
        law, xi = CountLaw.two_point(0.3), InnovationLaw.laplace()
        small = sample_compound(law, xi, 50, seed=9)
        large = sample_compound(law, xi, 100, seed=9)
        np.testing.assert_array_equal(large.observations[:50], small.observations)

    def test_sums_of_point_masses_are_counts(self):
        sample = sample_compound(CountLaw.geometric(0.4), InnovationLaw.point_mass(1.0), 500, seed=1)
        assert np.all(sample.observations >= 1.0)
        np.testing.assert_array_equal(sample.observations, np.round(sample.observations))

    def test_two_point_normal_mixture(self):
        p = 0.3
        sample = sample_compound(CountLaw.two_point(p), InnovationLaw.normal(), 4000, seed=12)

        def mixture_cdf(x):
            return p * stats.norm.cdf(x) + (1 - p) * stats.norm.cdf(x / np.sqrt(2.0))

        assert stats.kstest(sample.observations, mixture_cdf).pvalue > 1e-3

    def test_single_count_is_the_innovation(self):
        xi = InnovationLaw.laplace(0.5, 2.0)
        sample = sample_compound(CountLaw.tabulated([1.0]), xi, 3000, seed=5)
        direct = xi.sample(np.random.default_rng(11), 3000)
        assert stats.ks_2samp(sample.observations, direct).pvalue > 1e-3

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            sample_compound(CountLaw.two_point(0.3), InnovationLaw.laplace(), 0, seed=1)


class TestErrorOnGrid:
    def test_error_value(self):
        estimate = DensityEstimate(np.array([0.0, 1.0, 2.0]), np.ones(3), 1.0, 8)
        assert error_on_grid(estimate, lambda x: np.zeros_like(x)) == 1.0
        assert error_on_grid(estimate, lambda x: np.ones_like(x), grid=[2.0, 0.0]) == 0.0

    def test_grid_order_does_not_matter(self):
        x = np.linspace(-1.0, 1.0, 11)
        estimate = DensityEstimate(x, x ** 2, 1.0, 8)
        reversed_estimate = DensityEstimate(x[::-1], (x ** 2)[::-1], 1.0, 8)
        truth = np.abs
        assert error_on_grid(estimate, truth) == pytest.approx(error_on_grid(reversed_estimate, truth), abs=1e-15)

    def test_grid_mismatch(self):
        estimate = DensityEstimate(np.array([0.0, 1.0]), np.ones(2), 1.0, 8)
        with pytest.raises(GridMismatch):
            error_on_grid(estimate, np.abs, grid=[0.5])
        with pytest.raises(GridMismatch):
            error_on_grid(estimate, np.abs, grid=[])


class TestExperiment:
    def test_threads_do_not_change_records(self):
        kwargs = dict(
            n_values=[50, 100], reps=3, cutoff_plan=CutoffRule.fixed(2.0), seed=4,
            x_grid=SMALL_GRID, quad_nodes=256, verbose=False,
        )
        serial = run_experiment(CountLaw.two_point(0.3), InnovationLaw.laplace(), threads=1, **kwargs)
        parallel = run_experiment(CountLaw.two_point(0.3), InnovationLaw.laplace(), threads=3, **kwargs)
        assert serial.records == parallel.records
        assert list(serial.to_long_frame().columns) == ["n", "rep", "seed", "error", "failed"]

    def test_failures_are_recorded(self):
        report = run_experiment(
            CountLaw.two_point(0.3), InnovationLaw.laplace(), [1, 50], reps=1,
            cutoff_plan=CutoffRule.fixed(2.0), x_grid=SMALL_GRID, quad_nodes=128, verbose=False,
        )
        assert report.failed == 1
        assert report.summary["per_n"]["1"]["median"] is None
        assert report.records[0]["message"].startswith("DomainError")

    def test_adaptive_plan(self):
        report = run_experiment(
            CountLaw.shifted_poisson(0.1), InnovationLaw.laplace(), [256], reps=2,
            cutoff_plan=AdaptiveSettings(rho0=5.0), x_grid=SMALL_GRID, quad_nodes=256, verbose=False,
        )
        assert report.failed == 0
        record = report.records[0]
        assert 1 <= record["k_hat_min"] <= record["k_hat_max"] <= 4
        assert record["ell"] > 0.0

    def test_report_serialization(self, tmp_path):
        report = run_experiment(
            CountLaw.two_point(0.3), InnovationLaw.normal(), [64], reps=2, x_grid=SMALL_GRID,
            quad_nodes=128, verbose=False,
        )
        report.to_json(tmp_path / "report.json")
        report.to_long_csv(tmp_path / "report_long.csv")
        assert report.config["cutoff"]["theory"]["kind"] == "supersmooth"
        assert len((tmp_path / "report_long.csv").read_text(encoding="utf-8").splitlines()) == 3


class TestGridSearch:
    @pytest.fixture
    def sample(self):
        return sample_compound(CountLaw.two_point(0.9), InnovationLaw.normal(7.0, 1.1), 300, seed=2)

    def test_default_xi_grid(self):
        grid = default_xi_grid(np.array([0.0, 4.0]), points=5)
        np.testing.assert_allclose(grid, [-1.0, 0.5, 2.0, 3.5, 5.0])

    def test_search_is_deterministic(self, sample):
        kwargs = dict(resamples=2, resample_n=100, seed=3, err_grid=np.linspace(0.0, 20.0, 50),
                      quad_nodes=128, verbose=False)
        first = grid_search_cutoff(sample, CountLaw.two_point(0.9), [0.0, 1.0, 2.0], **kwargs)
        second = grid_search_cutoff(sample, CountLaw.two_point(0.9), [0.0, 1.0, 2.0], threads=2, **kwargs)
        assert first.U_best in (1.0, 2.0)
        assert bool(first.error_table["failed"].iloc[0])
        assert first.error_table.equals(second.error_table)

    def test_resample_errors(self, sample):
        table = resample_errors(sample, CountLaw.two_point(0.9), 2.0, [50, 100], reps=2,
                                err_grid=np.linspace(0.0, 20.0, 50), quad_nodes=128)
        assert list(table.columns) == ["n", "rep", "error"]
        assert len(table) == 4
        assert (table["error"] >= 0.0).all()

    def test_resample_errors_with_given_density(self, sample):
        xi_grid = default_xi_grid(sample.observations, points=401)
        density = InnovationLaw.normal(7.0, 1.1).pdf(xi_grid)
        kwargs = dict(xi_grid=xi_grid, err_grid=np.linspace(0.0, 20.0, 50), quad_nodes=128)
        table = resample_errors(sample, CountLaw.two_point(0.9), None, [60], reps=3, density=density, **kwargs)
        assert len(table) == 3
        with pytest.raises(DomainError):
            resample_errors(sample, CountLaw.two_point(0.9), None, [60], reps=1, **kwargs)

    def test_empty_grid(self, sample):
        with pytest.raises(DomainError):
            grid_search_cutoff(sample, CountLaw.two_point(0.9), [], verbose=False)


SIX_CONFIGURATIONS = [
    (CountLaw.two_point(0.3), InnovationLaw.laplace()),
    (CountLaw.two_point(0.3), InnovationLaw.normal()),
    (CountLaw.geometric(0.3), InnovationLaw.laplace()),
    (CountLaw.geometric(0.3), InnovationLaw.normal()),
    (CountLaw.shifted_poisson(1.0), InnovationLaw.laplace()),
    (CountLaw.shifted_poisson(1.0), InnovationLaw.normal()),
]
RATE_SIZES = [100, 1000, 5000]


def _medians(report):
    return [report.summary["per_n"][str(n)]["median"] for n in RATE_SIZES]


@pytest.mark.slow
class TestMonteCarloRates:
    @pytest.fixture(scope="class")
    def reports(self):
        return {
            (law.label, xi.kind): run_experiment(law, xi, RATE_SIZES, reps=100, seed=7, threads=4, verbose=False)
            for law, xi in SIX_CONFIGURATIONS
        }

    def test_small_sample_errors(self, reports):
        for key, report in reports.items():
            errors = [r["error"] for r in report.records if r["n"] == 100 and not r["failed"]]
            assert sum(e <= 0.01 for e in errors) >= 95, key

    def test_errors_decrease_with_n(self, reports):
        for key, report in reports.items():
            assert report.failed == 0, key
            assert report.summary["median_strictly_decreasing"], key

    def test_rates_by_smoothness(self, reports):
        for (law, xi), report in reports.items():
            slope = rate_slope(report)
            if xi == "laplace":
                assert abs(slope + 2.0 / 3.0) <= 0.25, law
            else:
                assert slope <= -0.7, law

    def test_normal_beats_laplace(self, reports):
        laws = sorted({law for law, _ in reports})
        cells = []
        for law in laws:
            laplace, normal = _medians(reports[(law, "laplace")]), _medians(reports[(law, "normal")])
            cells.extend(b <= a for a, b in zip(laplace, normal))
        assert sum(cells) >= 0.8 * len(cells)

    def test_adaptive_is_near_the_theory_cutoff(self):
        law, xi = CountLaw.shifted_poisson(0.1), InnovationLaw.laplace()
        kwargs = dict(reps=100, seed=7, threads=4, verbose=False)
        adaptive = run_experiment(law, xi, RATE_SIZES, cutoff_plan=AdaptiveSettings(h=1.0, ell=5.2, rho0=5.0), **kwargs)
        theory = run_experiment(law, xi, RATE_SIZES, **kwargs)
        assert adaptive.failed == 0
        assert adaptive.summary["median_strictly_decreasing"]
        for a, t in zip(_medians(adaptive), _medians(theory)):
            assert a <= 3.0 * t
