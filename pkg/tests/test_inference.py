import math

import numpy as np
import pytest

from latent_chain.estimation import FitOptions, em_fit
from latent_chain.inference import (
    InferenceError,
    bootstrap_gof,
    chi_square_sf,
    compare_nested,
    g_squared,
    simulate,
)
from latent_chain.model_core import (
    ParameterSet,
    build_model_spec,
    lattice_probabilities,
    random_parameter_set,
)
from latent_chain.panel_data import PanelTable
from latent_chain.replication import reference_parameter_set

from _oracles import chi_square_sf_even_df

# Frozen from the even-df closed form.
SF_25_69_DF8 = 0.001186537682469879


class TestChiSquareSF:
    def test_zero_statistic_full_mass(self):
        for df in (1, 2, 5, 50, 200):
            assert chi_square_sf(0.0, df) == pytest.approx(1.0, abs=1e-14)

    def test_two_df_closed_form(self):
        for x in (0.1, 1.0, 4.37, 25.69, 100.0):
            assert chi_square_sf(x, 2) == pytest.approx(math.exp(-x / 2), abs=1e-12)

    def test_even_df_closed_form(self):
        for df in (2, 4, 6, 8):
            for x in (0.5, 3.2, 8.8, 25.69, 60.0, 1000.0):
                assert chi_square_sf(x, df) == pytest.approx(
                    chi_square_sf_even_df(x, df), abs=1e-10
                )

    def test_published_difference_statistic(self):
        assert chi_square_sf(25.69, 8) == pytest.approx(SF_25_69_DF8, abs=1e-10)
        assert chi_square_sf(25.69, 8) < 0.01
        assert chi_square_sf(4.37, 6) > 0.01

    def test_rejects_bad_arguments(self):
        with pytest.raises(InferenceError):
            chi_square_sf(1.0, 0)
        with pytest.raises(InferenceError):
            chi_square_sf(-0.5, 3)


class TestGSquared:
    def test_saturated_model_zero(self):
        counts = {("g", (1,)): 30, ("g", (2,)): 50, ("g", (3,)): 20}
        table = PanelTable(occasions=1, categories=("1", "2", "3"), groups=("g",), cells=counts)
        delta = np.array([[0.3, 0.5, 0.2]])
        rho = np.broadcast_to(np.eye(3), (1, 1, 3, 3)).copy()
        params = ParameterSet(gamma=np.ones(1), delta=delta, rho=rho,
                              tau=np.zeros((0, 1, 3, 3)))
        assert g_squared(table, params) == pytest.approx(0.0, abs=1e-9)

    def test_excluded_observed_cell_is_infinite(self):
        table = PanelTable(occasions=2, categories=("1", "2"), groups=("g",),
                           cells={("g", (1, 1)): 5, ("g", (2, 2)): 3})
        delta = np.array([[1.0, 0.0]])
        rho = np.broadcast_to(np.eye(2), (2, 1, 2, 2)).copy()
        tau = np.broadcast_to(np.eye(2), (1, 1, 2, 2)).copy()
        params = ParameterSet(gamma=np.ones(1), delta=delta, rho=rho, tau=tau)
        assert g_squared(table, params) == math.inf

    def test_non_negative_for_arbitrary_params(self, bif_table, rng):
        spec = build_model_spec(2, 3, 3, 3)
        for _ in range(10):
            params = random_parameter_set(spec, rng)
            assert g_squared(bif_table, params) >= 0.0


class TestSimulate:
    def test_deterministic_chain_single_pattern(self):
        delta = np.array([[1.0, 0.0, 0.0]])
        rho = np.broadcast_to(np.eye(3), (3, 1, 3, 3)).copy()
        tau = np.broadcast_to(np.eye(3), (2, 1, 3, 3)).copy()
        params = ParameterSet(gamma=np.ones(1), delta=delta, rho=rho, tau=tau)
        table = simulate(params, {"g": 100}, seed=0)
        assert dict(table.cells) == {("g", (1, 1, 1)): 100}

    def test_same_seed_same_table(self):
        params = reference_parameter_set()
        sizes = {"doctoral": 500, "post-doctoral": 200}
        a = simulate(params, sizes, seed=42)
        b = simulate(params, sizes, seed=42)
        assert dict(a.cells) == dict(b.cells)
        c = simulate(params, sizes, seed=43)
        assert dict(a.cells) != dict(c.cells)

    def test_group_totals_match_sizes(self):
        params = reference_parameter_set()
        table = simulate(params, {"doctoral": 1474, "post-doctoral": 480}, seed=9)
        assert sum(c for _, c in table.group_cells("doctoral")) == 1474
        assert sum(c for _, c in table.group_cells("post-doctoral")) == 480

    def test_large_sample_matches_cell_probabilities(self):
        params = reference_parameter_set()
        n = 10**6
        table = simulate(params, {"doctoral": n, "post-doctoral": n}, seed=13)
        from latent_chain.model_core import pattern_lattice

        lattice = pattern_lattice(3, 3)
        for h, group in enumerate(("doctoral", "post-doctoral")):
            probs = lattice_probabilities(params, h)
            for cell, p in zip(lattice, probs):
                pattern = tuple(int(c) + 1 for c in cell)
                emp = table.count(group, pattern) / n
                se = math.sqrt(p * (1 - p) / n)
                assert abs(emp - p) <= 3 * se + 1e-12, (group, pattern)

    def test_total_variation_envelope(self, rng):
        spec = build_model_spec(1, 3, 3, 3)
        for _ in range(3):
            params = random_parameter_set(spec, rng)
            n = 10000
            table = simulate(params, {"g": n}, seed=int(rng.integers(1, 1 << 31)))
            probs = lattice_probabilities(params, 0)
            from latent_chain.model_core import pattern_lattice

            emp = np.zeros(27)
            for i, cell in enumerate(pattern_lattice(3, 3)):
                emp[i] = table.count("g", tuple(int(c) + 1 for c in cell)) / n
            tv = 0.5 * np.abs(emp - probs).sum()
            assert tv <= 2 * math.sqrt(27 / n)


def _small_fit(seed=1):
    spec = build_model_spec(1, 2, 2, 2, ("tie-rho-over-time",))
    generating = random_parameter_set(spec, np.random.default_rng(8))
    table = simulate(generating, {"g": 400}, seed=3)
    fit = em_fit(spec, table, FitOptions(starts=6, seed=seed), compute_se=False)
    fit.g_squared = g_squared(table, fit.params)
    return spec, table, fit


class TestBootstrap:
    def test_single_replicate_p_values(self):
        spec, table, fit = _small_fit()
        report = bootstrap_gof(fit, spec, table, B=1, seed=5)
        assert report.p_value in (0.5, 1.0)

    def test_p_value_invariant_and_determinism(self):
        spec, table, fit = _small_fit()
        # the toy model sits on a likelihood ridge; cap the refit effort
        opts = FitOptions(starts=2, convergence=1e-8, max_iterations=800)
        report = bootstrap_gof(fit, spec, table, B=19, seed=5, options=opts)
        k = sum(1 for lr, _ in report.replicates if lr >= report.observed_lr)
        assert report.exceed_count == k
        assert report.p_value == (k + 1) / (19 + 1)
        assert 0.0 < report.p_value <= 1.0
        again = bootstrap_gof(fit, spec, table, B=19, seed=5, options=opts)
        assert again.replicates == report.replicates
        assert again.p_value == report.p_value

    def test_replicates_counted_when_not_converged(self):
        spec, table, fit = _small_fit()
        tight = FitOptions(starts=2, max_iterations=2)
        report = bootstrap_gof(fit, spec, table, B=5, seed=6, options=tight)
        assert report.B == 5
        assert len(report.replicates) == 5
        assert any(not conv for _, conv in report.replicates)

    def test_rejects_zero_replicates(self):
        spec, table, fit = _small_fit()
        with pytest.raises(InferenceError):
            bootstrap_gof(fit, spec, table, B=0, seed=1)


class TestCompareNested:
    def test_model_against_itself(self):
        spec, table, fit = _small_fit()
        report = compare_nested(fit, fit)
        assert report.delta_lr == 0.0
        assert report.chi_square_p == 1.0
        assert report.warning != ""

    def test_non_nested_rejected(self):
        # tied rho (restricted) vs untied (general) nests one way only
        spec_r = build_model_spec(1, 2, 2, 2, ("tie-rho-over-time",))
        spec_g = build_model_spec(1, 2, 2, 2)
        generating = random_parameter_set(spec_r, np.random.default_rng(8))
        table = simulate(generating, {"g": 300}, seed=4)
        fit_r = em_fit(spec_r, table, FitOptions(starts=4, seed=1), compute_se=False)
        fit_g = em_fit(spec_g, table, FitOptions(starts=4, seed=1), compute_se=False)
        fit_r.g_squared = g_squared(table, fit_r.params)
        fit_g.g_squared = g_squared(table, fit_g.params)
        report = compare_nested(fit_r, fit_g)
        assert report.delta_lr >= 0.0
        with pytest.raises(InferenceError):
            compare_nested(fit_g, fit_r)

    def test_requires_g_squared(self):
        spec, table, fit = _small_fit()
        import dataclasses

        bare = dataclasses.replace(fit, g_squared=None)
        with pytest.raises(InferenceError):
            compare_nested(bare, fit)
