"""Goodness of fit, simulation, parametric bootstrap, and nested comparison.

Absolute fit of sparse pattern tables is judged by the parametric
bootstrap of the likelihood-ratio statistic (simulate from the fitted
model, refit, collect replicate G-squared values); the chi-square tail
is used only for differences between properly nested models.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np
from scipy.special import gammaincc

from .estimation import FitOptions, FitResult, em_fit
from .model_core import ModelError, ModelSpec, ParameterSet, lattice_probabilities, pattern_lattice
from .panel_data import PanelTable

__all__ = [
    "InferenceError",
    "BootstrapReport",
    "ComparisonReport",
    "g_squared",
    "simulate",
    "bootstrap_gof",
    "compare_nested",
    "chi_square_sf",
]


class InferenceError(ValueError):
    """Raised for invalid inferential comparisons or reports."""


@dataclass(frozen=True)
class BootstrapReport:
    """Null distribution of the likelihood-ratio statistic under the fitted model.

    p_value uses the (k+1)/(B+1) estimator, so it is never exactly zero;
    exceed_count is the raw k.  Non-converged replicates stay in B and
    are flagged in `replicates`.
    """

    observed_lr: float
    replicates: tuple[tuple[float, bool], ...]
    p_value: float
    exceed_count: int
    B: int
    seed: int

    @property
    def replicate_lrs(self) -> np.ndarray:
        return np.array([lr for lr, _ in self.replicates])


@dataclass(frozen=True)
class ComparisonReport:
    delta_lr: float
    delta_df: int
    chi_square_p: float
    warning: str = ""


def g_squared(table: PanelTable, params: ParameterSet) -> float:
    """Likelihood-ratio statistic 2 * sum n ln(n / m) against the saturated model.

    Cells with zero observed count contribute nothing.  Returns +inf when
    the model assigns probability zero to an observed cell (the model
    excludes that cell).
    """
    dims = params.dims
    if (table.n_groups, table.n_categories, table.occasions) != (
        dims.n_groups,
        dims.n_categories,
        dims.n_occasions,
    ):
        raise ModelError("table dimensions do not match parameter dimensions")
    total = 0.0
    for h, group in enumerate(table.groups):
        items = list(table.group_cells(group))
        n_h = sum(c for _, c in items)
        if n_h == 0:
            raise InferenceError(f"group {group!r} has zero total count")
        probs = lattice_probabilities(params, h)
        J, T = dims.n_categories, dims.n_occasions
        # lexicographic cell index of a 1-based pattern
        weights = J ** np.arange(T - 1, -1, -1)
        for pattern, n in items:
            m = n_h * probs[int(np.dot(np.array(pattern) - 1, weights))]
            if m <= 0.0:
                return float("inf")
            total += n * np.log(n / m)
    return max(2.0 * total, 0.0)


def simulate(
    params: ParameterSet,
    group_sizes: Mapping[str, int],
    seed,
    category_labels: tuple[str, ...] | None = None,
) -> PanelTable:
    """Draw a frequency table from the model by seeded multinomial sampling.

    Sampling inverts the CDF over the lexicographic cell order, group by
    group in mapping order, from one generator, so output is a pure
    function of (params, group_sizes, seed).
    """
    dims = params.dims
    if len(group_sizes) != dims.n_groups:
        raise ModelError(f"expected {dims.n_groups} group sizes, got {len(group_sizes)}")
    for label, n in group_sizes.items():
        if n < 0:
            raise ModelError(f"group {label!r} has negative size")
    labels = category_labels or tuple(str(j + 1) for j in range(dims.n_categories))
    rng = np.random.default_rng(seed)
    lattice = pattern_lattice(dims.n_categories, dims.n_occasions)
    cells: dict[tuple[str, tuple[int, ...]], int] = {}
    for h, (group, n_h) in enumerate(group_sizes.items()):
        probs = lattice_probabilities(params, h)
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        draws = np.searchsorted(cum, rng.random(n_h), side="right")
        counts = np.bincount(draws, minlength=lattice.shape[0])
        for cell, count in enumerate(counts):
            if count > 0:
                pattern = tuple(int(c) + 1 for c in lattice[cell])
                cells[(group, pattern)] = int(count)
    return PanelTable(
        occasions=dims.n_occasions,
        categories=labels,
        groups=tuple(group_sizes),
        cells=cells,
    )


def _derived_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def bootstrap_gof(
    fit: FitResult,
    spec: ModelSpec,
    table: PanelTable,
    B: int,
    seed: int,
    options: FitOptions | None = None,
    fallback_starts: int = 4,
) -> BootstrapReport:
    """Parametric-bootstrap p-value for the G-squared of a fitted model.

    Each replicate simulates a table of the original group sizes from the
    fitted parameters, refits the same model (warm start at the fitted
    values plus `fallback_starts` random starts), and records its
    G-squared.  Replicate seeds derive from (seed, replicate), so results
    do not depend on execution order.
    """
    if B < 1:
        raise InferenceError("bootstrap needs B >= 1 replicates")
    observed = fit.g_squared
    if observed is None:
        observed = g_squared(table, fit.params)
    base = options or FitOptions()
    sizes = {g: n for g, n in fit.diagnostics.group_totals.items()}
    replicates: list[tuple[float, bool]] = []
    for b in range(1, B + 1):
        sim = simulate(
            fit.params,
            sizes,
            np.random.SeedSequence([seed, b]),
            category_labels=table.categories,
        )
        refit = em_fit(
            spec,
            sim,
            replace(base, starts=1 + fallback_starts, seed=_derived_seed(seed, b, 1)),
            warm_start=fit.params,
            compute_se=False,
        )
        lr = g_squared(sim, refit.params)
        replicates.append((lr, refit.diagnostics.converged))
    exceed = sum(1 for lr, _ in replicates if lr >= observed)
    return BootstrapReport(
        observed_lr=observed,
        replicates=tuple(replicates),
        p_value=(exceed + 1) / (B + 1),
        exceed_count=exceed,
        B=B,
        seed=seed,
    )


def compare_nested(restricted: FitResult, general: FitResult) -> ComparisonReport:
    """Likelihood-ratio difference test between two nested fitted models.

    The general model's constraint set must be a relaxation of the
    restricted one (checked by tie-class and fix inclusion); both fits
    must be on the same table.
    """
    dims = restricted.spec.dims
    if dims != general.spec.dims:
        raise InferenceError("models have different dimensions; not comparable")
    if restricted.diagnostics.group_totals != general.diagnostics.group_totals:
        raise InferenceError("fits are not on the same table")
    if not general.spec.constraints.is_relaxation_of(restricted.spec.constraints, dims):
        raise InferenceError("general model is not a relaxation of the restricted model")
    if restricted.g_squared is None or general.g_squared is None:
        raise InferenceError("both fits need g_squared filled before comparison")

    delta_lr = restricted.g_squared - general.g_squared
    if delta_lr < -1e-6:
        raise InferenceError(
            f"restricted fit beats the general fit by {-delta_lr:.3g}: restricted fit failed"
        )
    delta_lr = max(delta_lr, 0.0)
    delta_df = restricted.degrees_of_freedom - general.degrees_of_freedom
    warning = ""
    if delta_df <= 0:
        warning = "models have equal degrees of freedom; nesting is degenerate"
        p = 1.0
    else:
        p = chi_square_sf(delta_lr, delta_df)
    return ComparisonReport(delta_lr=delta_lr, delta_df=delta_df, chi_square_p=p, warning=warning)


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail chi-square probability via the regularized incomplete gamma."""
    if df <= 0:
        raise InferenceError("degrees of freedom must be positive")
    if x < 0:
        raise InferenceError("chi-square statistic must be non-negative")
    return float(gammaincc(df / 2.0, x / 2.0))
