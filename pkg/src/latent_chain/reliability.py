"""Stability/change decomposition into true and measurement-error components.

The joint (manifest pattern x latent path) distribution is split by
whether the latent path is constant.  The constant-path mass is the
model's stability; the changing-path mass is its change.  Within each
part, the "true" component is the mass whose manifest pattern tracks the
latent side (constant pattern for stability, and for change the pattern
that reproduces the path exactly); the remainder is measurement error.
The process reliability is one minus the measurement error of change.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_core import ParameterSet, joint_pattern_table, pattern_lattice

__all__ = ["ReliabilityDecomposition", "stability_decomposition", "reliability_coefficient"]


@dataclass(frozen=True)
class ReliabilityDecomposition:
    stability: float
    true_stability: float
    error_stability: float
    change: float
    true_change: float
    error_change: float
    total_error: float
    reliability: float


def stability_decomposition(
    params: ParameterSet, group: int, exact_match: bool = False
) -> ReliabilityDecomposition:
    """Decompose one group's joint pattern/path mass into the 2x2 components.

    With exact_match=True, true stability counts only cells where the
    constant manifest pattern equals the constant latent path category by
    category; the default counts any constant pattern against any
    constant path.  Under a near-diagonal response matrix the two agree
    to well below reporting precision.
    """
    dims = params.dims
    M = joint_pattern_table(params, group)
    patterns = pattern_lattice(dims.n_categories, dims.n_occasions)
    paths = pattern_lattice(dims.n_classes, dims.n_occasions)
    const_pattern = (patterns == patterns[:, :1]).all(axis=1)
    const_path = (paths == paths[:, :1]).all(axis=1)
    same = (
        (patterns[:, None, :] == paths[None, :, :]).all(axis=2)
        if dims.n_categories == dims.n_classes
        else np.zeros((patterns.shape[0], paths.shape[0]), dtype=bool)
    )

    stability = float(M[:, const_path].sum())
    change = 1.0 - stability
    if exact_match:
        true_stability = float(M[same & const_path[None, :]].sum())
    else:
        true_stability = float(M[np.ix_(const_pattern, const_path)].sum())
    true_change = float(M[same & ~const_path[None, :]].sum())
    error_stability = stability - true_stability
    error_change = change - true_change
    return ReliabilityDecomposition(
        stability=stability,
        true_stability=true_stability,
        error_stability=error_stability,
        change=change,
        true_change=true_change,
        error_change=error_change,
        total_error=error_stability + error_change,
        reliability=1.0 - error_change,
    )


def reliability_coefficient(decomp: ReliabilityDecomposition) -> float:
    """One minus the measurement error of change."""
    return 1.0 - decomp.error_change
