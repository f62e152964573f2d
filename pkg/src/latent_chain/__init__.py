"""Multi-group latent Markov chain models for categorical panel data.

Library plus the `latent-chain` command line: ingest grouped pattern
frequency tables, fit constrained latent (or manifest) Markov chains by
multi-start EM, judge fit by parametric bootstrap, compare nested models,
and decompose rating stability into true and measurement-error parts.
"""

__version__ = "0.1.0"

from .panel_data import (
    PanelDataError,
    PanelSchema,
    PanelTable,
    manifest_stability,
    merge_categories,
    parse_panel_csv,
    total_count,
    write_panel_csv,
)
from .model_core import (
    ConstraintSet,
    Dims,
    ModelError,
    ModelSpec,
    ParameterSet,
    ZeroLikelihoodError,
    build_constraints,
    build_model_spec,
    cell_probability,
    expected_frequencies,
    forward_backward,
    joint_pattern_table,
    lattice_probabilities,
    validate,
)
from .estimation import (
    EMError,
    FitOptions,
    FitResult,
    StandardErrors,
    canonicalize_labels,
    count_free_parameters,
    em_fit,
    em_step,
    standard_errors,
)
from .inference import (
    BootstrapReport,
    ComparisonReport,
    InferenceError,
    bootstrap_gof,
    chi_square_sf,
    compare_nested,
    g_squared,
    simulate,
)
from .reliability import (
    ReliabilityDecomposition,
    reliability_coefficient,
    stability_decomposition,
)

__all__ = [
    "__version__",
    "PanelDataError", "PanelSchema", "PanelTable",
    "manifest_stability", "merge_categories", "parse_panel_csv",
    "total_count", "write_panel_csv",
    "ConstraintSet", "Dims", "ModelError", "ModelSpec", "ParameterSet",
    "ZeroLikelihoodError", "build_constraints", "build_model_spec",
    "cell_probability", "expected_frequencies", "forward_backward",
    "joint_pattern_table", "lattice_probabilities", "validate",
    "EMError", "FitOptions", "FitResult", "StandardErrors",
    "canonicalize_labels", "count_free_parameters", "em_fit", "em_step",
    "standard_errors",
    "BootstrapReport", "ComparisonReport", "InferenceError",
    "bootstrap_gof", "chi_square_sf", "compare_nested", "g_squared", "simulate",
    "ReliabilityDecomposition", "reliability_coefficient", "stability_decomposition",
]
