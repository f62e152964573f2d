"""Model structure and probability evaluation for multi-group latent Markov chains.

The observed probability of a response pattern (y1..yT) in group h is a sum
over all latent class paths (a1..aT):

    p(y | h) = sum over paths of
        delta[h,a1] * rho[0,h,a1,y1] * prod_t tau[t,h,at,at+1] * rho[t+1,h,at+1,yt+1]

Evaluation uses scaled forward recursions so arbitrary T is safe; the
brute-force path sum is only worth it in tests.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .panel_data import PanelTable

__all__ = [
    "ModelError",
    "ZeroLikelihoodError",
    "Dims",
    "ConstraintSet",
    "ModelSpec",
    "ParameterSet",
    "ForwardBackward",
    "ValidationReport",
    "build_constraints",
    "build_model_spec",
    "random_parameter_set",
    "identity_leaning_start",
    "apply_constraints",
    "cell_probability",
    "forward_backward",
    "lattice_probabilities",
    "expected_frequencies",
    "joint_pattern_table",
    "pattern_lattice",
    "validate",
    "params_to_json",
    "params_from_json",
]

CONSTRAINT_NAMES = (
    "tie-rho-over-time",
    "tie-delta-rho-over-groups",
    "tie-tau-over-groups",
    "stationary-tau",
    "manifest",
)


class ModelError(ValueError):
    """Raised for invalid model structure or parameter values."""


class ZeroLikelihoodError(ModelError):
    """A pattern has probability zero: posteriors are undefined.

    Distinct from numeric failure; callers may catch it to treat the
    pattern as structurally excluded by the model.
    """


@dataclass(frozen=True)
class Dims:
    """Model dimensions: groups H, categories J, occasions T, latent classes A."""

    n_groups: int
    n_categories: int
    n_occasions: int
    n_classes: int

    def __post_init__(self):
        if self.n_groups < 1:
            raise ModelError("need at least 1 group")
        if self.n_categories < 2:
            raise ModelError("need at least 2 categories")
        if self.n_occasions < 1:
            raise ModelError("need at least 1 occasion")
        if self.n_classes < 1:
            raise ModelError("need at least 1 latent class")


# A parameter cell address: ("delta", h, a), ("rho", t, h, a, j) or
# ("tau", t, h, a, b); all indices 0-based.
Cell = tuple


def _canonical_partition(blocks: Sequence[Sequence]) -> tuple[tuple, ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


@dataclass(frozen=True)
class ConstraintSet:
    """Equality ties between parameter rows plus cells fixed to constants.

    Ties are partitions: delta rows are tied across the groups within a
    delta block; rho and tau rows are tied across the (occasion, group)
    pairs within a block, class-row by class-row.  Fixed cells are pinned
    to constants and excluded from estimation.
    """

    delta_blocks: tuple[tuple[int, ...], ...]
    rho_blocks: tuple[tuple[tuple[int, int], ...], ...]
    tau_blocks: tuple[tuple[tuple[int, int], ...], ...]
    fixes: Mapping[Cell, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "delta_blocks", _canonical_partition(self.delta_blocks))
        object.__setattr__(self, "rho_blocks", _canonical_partition(self.rho_blocks))
        object.__setattr__(self, "tau_blocks", _canonical_partition(self.tau_blocks))
        object.__setattr__(self, "fixes", dict(self.fixes))
        for cell, value in self.fixes.items():
            if not (0.0 <= value <= 1.0):
                raise ModelError(f"fixed cell {cell} has value {value} outside [0,1]")

    @classmethod
    def unconstrained(cls, dims: Dims) -> "ConstraintSet":
        T, H = dims.n_occasions, dims.n_groups
        return cls(
            delta_blocks=tuple((h,) for h in range(H)),
            rho_blocks=tuple(((t, h),) for t in range(T) for h in range(H)),
            tau_blocks=tuple(((t, h),) for t in range(T - 1) for h in range(H)),
        )

    def cell_classes(self, dims: Dims) -> list[frozenset[Cell]]:
        """Tie classes expanded to individual parameter cells (size >= 2 only)."""
        A, J = dims.n_classes, dims.n_categories
        classes: list[frozenset[Cell]] = []
        for block in self.delta_blocks:
            if len(block) > 1:
                for a in range(A):
                    classes.append(frozenset(("delta", h, a) for h in block))
        for block in self.rho_blocks:
            if len(block) > 1:
                for a in range(A):
                    for j in range(J):
                        classes.append(frozenset(("rho", t, h, a, j) for t, h in block))
        for block in self.tau_blocks:
            if len(block) > 1:
                for a in range(A):
                    for b in range(A):
                        classes.append(frozenset(("tau", t, h, a, b) for t, h in block))
        return classes

    def is_relaxation_of(self, other: "ConstraintSet", dims: Dims) -> bool:
        """True if every parameter set allowed by `other` is allowed by self.

        Holds when self's tie classes refine other's and self keeps no fix
        that other lacks; then `other` is the restricted model and models
        fitted under the two sets are properly nested.
        """
        other_classes = other.cell_classes(dims)
        for cls_ in self.cell_classes(dims):
            if not any(cls_ <= oc for oc in other_classes):
                return False
        for cell, value in self.fixes.items():
            if cell not in other.fixes or other.fixes[cell] != value:
                return False
        return True


def _merge_partition(keys: list, groups_of_equal: list[list]) -> tuple[tuple, ...]:
    """Union-find partition of keys given lists of keys declared equal."""
    parent = {k: k for k in keys}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for eq in groups_of_equal:
        for k in eq[1:]:
            ra, rb = find(eq[0]), find(k)
            if ra != rb:
                parent[rb] = ra
    blocks: dict = {}
    for k in keys:
        blocks.setdefault(find(k), []).append(k)
    return tuple(tuple(sorted(b)) for b in blocks.values())


def build_constraints(
    dims: Dims,
    names: Sequence[str] = (),
    fixes: Mapping[Cell, float] | None = None,
) -> ConstraintSet:
    """Assemble a ConstraintSet from named tie macros plus explicit fixes.

    Supported names: tie-rho-over-time, tie-delta-rho-over-groups,
    tie-tau-over-groups, stationary-tau, manifest (fixes rho to the
    identity; requires A == J).
    """
    for name in names:
        if name not in CONSTRAINT_NAMES:
            raise ModelError(f"unknown constraint name {name!r}")
    T, H, A, J = dims.n_occasions, dims.n_groups, dims.n_classes, dims.n_categories

    delta_eq: list[list[int]] = []
    rho_eq: list[list[tuple[int, int]]] = []
    tau_eq: list[list[tuple[int, int]]] = []
    all_fixes = dict(fixes or {})

    if "tie-delta-rho-over-groups" in names:
        delta_eq.append(list(range(H)))
        for t in range(T):
            rho_eq.append([(t, h) for h in range(H)])
    if "tie-rho-over-time" in names:
        for h in range(H):
            rho_eq.append([(t, h) for t in range(T)])
    if "tie-tau-over-groups" in names:
        for t in range(T - 1):
            tau_eq.append([(t, h) for h in range(H)])
    if "stationary-tau" in names:
        for h in range(H):
            tau_eq.append([(t, h) for t in range(T - 1)])
    if "manifest" in names:
        if A != J:
            raise ModelError("manifest variant requires A == J")
        for t in range(T):
            for h in range(H):
                for a in range(A):
                    for j in range(J):
                        all_fixes[("rho", t, h, a, j)] = 1.0 if a == j else 0.0

    return ConstraintSet(
        delta_blocks=_merge_partition(list(range(H)), delta_eq),
        rho_blocks=_merge_partition(
            [(t, h) for t in range(T) for h in range(H)], rho_eq
        ),
        tau_blocks=_merge_partition(
            [(t, h) for t in range(T - 1) for h in range(H)], tau_eq
        ),
        fixes=all_fixes,
    )


@dataclass(frozen=True)
class ModelSpec:
    """Dimensions, variant flags, and the constraint set defining a model."""

    dims: Dims
    constraints: ConstraintSet
    manifest: bool = False
    stationary: bool = False

    def __post_init__(self):
        if self.manifest and self.dims.n_classes != self.dims.n_categories:
            raise ModelError("manifest variant forces A == J")


def build_model_spec(
    n_groups: int,
    n_categories: int,
    n_occasions: int,
    n_classes: int,
    constraint_names: Sequence[str] = (),
    fixes: Mapping[Cell, float] | None = None,
) -> ModelSpec:
    names = list(constraint_names)
    manifest = "manifest" in names
    stationary = "stationary-tau" in names
    if manifest:
        n_classes = n_categories
    dims = Dims(n_groups, n_categories, n_occasions, n_classes)
    constraints = build_constraints(dims, names, fixes)
    return ModelSpec(dims=dims, constraints=constraints, manifest=manifest, stationary=stationary)


ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ParameterSet:
    """Full probability parameterization of a multi-group latent chain.

    gamma : (H,) group proportions
    delta : (H, A) initial class proportions per group
    rho   : (T, H, A, J) response probabilities
    tau   : (T-1, H, A, A) transition probabilities

    Every trailing-axis row is a point on the simplex.  Arrays are
    read-only; all operations on parameter sets are pure.
    """

    gamma: np.ndarray
    delta: np.ndarray
    rho: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        for name in ("gamma", "delta", "rho", "tau"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        H, A = self.delta.shape
        T = self.rho.shape[0]
        if self.gamma.shape != (H,):
            raise ModelError(f"gamma shape {self.gamma.shape}, expected ({H},)")
        if self.rho.shape[:3] != (T, H, A):
            raise ModelError(f"rho shape {self.rho.shape} inconsistent with delta {self.delta.shape}")
        if self.tau.shape != (T - 1, H, A, A):
            raise ModelError(f"tau shape {self.tau.shape}, expected {(T - 1, H, A, A)}")

    @property
    def dims(self) -> Dims:
        T, H, A, J = self.rho.shape
        return Dims(n_groups=H, n_categories=J, n_occasions=T, n_classes=A)


@dataclass(frozen=True)
class ForwardBackward:
    """Likelihood and latent-state posteriors for one observed pattern."""

    likelihood: float
    log_likelihood: float
    state_posteriors: np.ndarray        # (T, A)
    transition_posteriors: np.ndarray   # (T-1, A, A)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()


def pattern_lattice(n_symbols: int, length: int) -> np.ndarray:
    """All length-`length` tuples over 0..n_symbols-1, lexicographic, as rows."""
    grids = np.meshgrid(*([np.arange(n_symbols)] * length), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _normalize_rows(arr: np.ndarray) -> np.ndarray:
    return arr / arr.sum(axis=-1, keepdims=True)


def apply_constraints(params: ParameterSet, spec: ModelSpec) -> ParameterSet:
    """Project a parameter set onto the constraint set.

    Tied rows are replaced by their block average; fixed cells are pinned
    with the remaining free mass renormalized.  Projection of an already
    conforming parameter set is the identity.
    """
    con = spec.constraints
    delta = np.array(params.delta)
    rho = np.array(params.rho)
    tau = np.array(params.tau)

    for block in con.delta_blocks:
        if len(block) > 1:
            avg = delta[list(block)].mean(axis=0)
            delta[list(block)] = avg
    for block in con.rho_blocks:
        if len(block) > 1:
            avg = np.mean([rho[t, h] for t, h in block], axis=0)
            for t, h in block:
                rho[t, h] = avg
    for block in con.tau_blocks:
        if len(block) > 1:
            avg = np.mean([tau[t, h] for t, h in block], axis=0)
            for t, h in block:
                tau[t, h] = avg

    _impose_fixes(delta, rho, tau, con)
    return ParameterSet(gamma=params.gamma, delta=delta, rho=rho, tau=tau)


def _row_fixes(con: ConstraintSet, kind: str, key: tuple) -> dict[int, float]:
    """Fixed columns of one simplex row; key is (h, a) or (t, h, a)."""
    out = {}
    for cell, value in con.fixes.items():
        if cell[0] == kind and cell[1:-1] == key:
            out[cell[-1]] = value
    return out


def _impose_row_fixes(row: np.ndarray, fixed: dict[int, float]) -> None:
    if not fixed:
        return
    fixed_total = sum(fixed.values())
    if fixed_total > 1.0 + 1e-9:
        raise ModelError(f"fixed cells sum to {fixed_total} > 1 in one row")
    free = np.ones(len(row), dtype=bool)
    for j, v in fixed.items():
        row[j] = v
        free[j] = False
    free_mass = 1.0 - fixed_total
    if free.any():
        s = row[free].sum()
        row[free] = free_mass / free.sum() if s <= 0 else row[free] * (free_mass / s)
    elif abs(fixed_total - 1.0) > 1e-9:
        raise ModelError("fully fixed row does not sum to 1")


def _impose_fixes(delta, rho, tau, con: ConstraintSet) -> None:
    T, H, A, J = rho.shape
    for h in range(H):
        _impose_row_fixes(delta[h], _row_fixes(con, "delta", (h,)))
    for t in range(T):
        for h in range(H):
            for a in range(A):
                _impose_row_fixes(rho[t, h, a], _row_fixes(con, "rho", (t, h, a)))
    for t in range(T - 1):
        for h in range(H):
            for a in range(A):
                _impose_row_fixes(tau[t, h, a], _row_fixes(con, "tau", (t, h, a)))


def random_parameter_set(
    spec: ModelSpec,
    rng: np.random.Generator,
    gamma: np.ndarray | None = None,
) -> ParameterSet:
    """Random simplex rows (normalized unit-exponential draws) under the constraints."""
    dims = spec.dims
    H, A, T, J = dims.n_groups, dims.n_classes, dims.n_occasions, dims.n_categories
    delta = _normalize_rows(rng.exponential(size=(H, A)))
    rho = _normalize_rows(rng.exponential(size=(T, H, A, J)))
    tau = _normalize_rows(rng.exponential(size=(T - 1, H, A, A)))
    if gamma is None:
        gamma = np.full(H, 1.0 / H)
    base = ParameterSet(gamma=gamma, delta=delta, rho=rho, tau=tau)
    return apply_constraints(base, spec)


def identity_leaning_start(
    spec: ModelSpec, gamma: np.ndarray | None = None, diagonal: float = 0.8
) -> ParameterSet:
    """Deterministic start with rho loaded on the diagonal (requires A == J).

    Lands in the labeling basin where class a is the error-free version of
    category a, which is where multi-start search should end up anyway.
    """
    dims = spec.dims
    H, A, T, J = dims.n_groups, dims.n_classes, dims.n_occasions, dims.n_categories
    if A != J:
        raise ModelError("identity-leaning start requires A == J")
    off = (1.0 - diagonal) / (J - 1)
    rho_block = np.full((A, J), off)
    np.fill_diagonal(rho_block, diagonal)
    delta = np.full((H, A), 1.0 / A)
    rho = np.broadcast_to(rho_block, (T, H, A, J)).copy()
    tau = np.full((T - 1, H, A, A), 1.0 / A)
    if gamma is None:
        gamma = np.full(H, 1.0 / H)
    base = ParameterSet(gamma=gamma, delta=delta, rho=rho, tau=tau)
    return apply_constraints(base, spec)


def _check_pattern(dims: Dims, group: int, pattern: Sequence[int]) -> np.ndarray:
    if not (0 <= group < dims.n_groups):
        raise ModelError(f"group index {group} out of range 0..{dims.n_groups - 1}")
    pat = np.asarray(pattern, dtype=int)
    if pat.shape != (dims.n_occasions,):
        raise ModelError(f"pattern length {pat.size}, expected {dims.n_occasions}")
    if ((pat < 1) | (pat > dims.n_categories)).any():
        raise ModelError(f"pattern {tuple(pattern)} has entries outside 1..{dims.n_categories}")
    return pat - 1


def _forward_scaled(params: ParameterSet, group: int, idx: np.ndarray):
    """Scaled forward pass for a batch of 0-based patterns.

    idx : (C, T) category indices.  Returns (alphas, scales) with
    alphas (T, C, A) normalized per occasion and scales (T, C); the
    pattern log-likelihood is sum_t log scales[t].  A zero scale marks a
    zero-probability pattern; downstream alphas for it are zeroed.
    """
    T, H, A, J = params.rho.shape
    C = idx.shape[0]
    alphas = np.zeros((T, C, A))
    scales = np.zeros((T, C))
    emit = params.rho[0, group][:, idx[:, 0]].T          # (C, A)
    a = params.delta[group][None, :] * emit
    s = a.sum(axis=1)
    scales[0] = s
    safe = np.where(s > 0, s, 1.0)
    alphas[0] = a / safe[:, None]
    for t in range(1, T):
        emit = params.rho[t, group][:, idx[:, t]].T      # (C, A)
        a = (alphas[t - 1] @ params.tau[t - 1, group]) * emit
        s = a.sum(axis=1)
        scales[t] = s
        safe = np.where(s > 0, s, 1.0)
        alphas[t] = a / safe[:, None]
    return alphas, scales


def _backward_scaled(params: ParameterSet, group: int, idx: np.ndarray, scales: np.ndarray):
    """Scaled backward pass matching _forward_scaled's normalization."""
    T, H, A, J = params.rho.shape
    C = idx.shape[0]
    betas = np.zeros((T, C, A))
    betas[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        emit = params.rho[t + 1, group][:, idx[:, t + 1]].T   # (C, A)
        b = (betas[t + 1] * emit) @ params.tau[t, group].T
        safe = np.where(scales[t + 1] > 0, scales[t + 1], 1.0)
        betas[t] = b / safe[:, None]
    return betas


def cell_probability(params: ParameterSet, group: int, pattern: Sequence[int]) -> float:
    """p(pattern | group) under the latent chain; pattern is 1-based."""
    idx = _check_pattern(params.dims, group, pattern)[None, :]
    _, scales = _forward_scaled(params, group, idx)
    return float(np.prod(scales[:, 0]))


def forward_backward(params: ParameterSet, group: int, pattern: Sequence[int]) -> ForwardBackward:
    """Likelihood plus per-occasion state and adjacent-pair posteriors.

    Raises ZeroLikelihoodError when the pattern has probability zero, in
    which case posteriors do not exist.
    """
    idx = _check_pattern(params.dims, group, pattern)[None, :]
    alphas, scales = _forward_scaled(params, group, idx)
    likelihood = float(np.prod(scales[:, 0]))
    if likelihood == 0.0 or (scales[:, 0] == 0.0).any():
        raise ZeroLikelihoodError(
            f"pattern {tuple(pattern)} has zero probability in group {group}"
        )
    betas = _backward_scaled(params, group, idx, scales)
    T = idx.shape[1]
    state = alphas[:, 0, :] * betas[:, 0, :]
    state = state / state.sum(axis=1, keepdims=True)
    A = params.dims.n_classes
    trans = np.zeros((T - 1, A, A))
    for t in range(T - 1):
        emit = params.rho[t + 1, group][:, idx[0, t + 1]]    # (A,)
        x = alphas[t, 0][:, None] * params.tau[t, group] * (emit * betas[t + 1, 0])[None, :]
        trans[t] = x / scales[t + 1, 0]
    log_likelihood = float(np.log(scales[:, 0]).sum())
    return ForwardBackward(
        likelihood=likelihood,
        log_likelihood=log_likelihood,
        state_posteriors=state,
        transition_posteriors=trans,
    )


def lattice_probabilities(params: ParameterSet, group: int) -> np.ndarray:
    """Probabilities of all J^T patterns for one group, lexicographic order."""
    dims = params.dims
    if not (0 <= group < dims.n_groups):
        raise ModelError(f"group index {group} out of range")
    lattice = pattern_lattice(dims.n_categories, dims.n_occasions)
    _, scales = _forward_scaled(params, group, lattice)
    return np.prod(scales, axis=0)


def expected_frequencies(
    params: ParameterSet, table: PanelTable
) -> dict[tuple[str, tuple[int, ...]], float]:
    """Model-expected cell counts n_h * p(pattern | group) over the full lattice."""
    dims = params.dims
    if (table.n_groups, table.n_categories, table.occasions) != (
        dims.n_groups,
        dims.n_categories,
        dims.n_occasions,
    ):
        raise ModelError("table dimensions do not match parameter dimensions")
    lattice = pattern_lattice(dims.n_categories, dims.n_occasions)
    out: dict[tuple[str, tuple[int, ...]], float] = {}
    totals = table.group_totals()
    for h, group in enumerate(table.groups):
        probs = lattice_probabilities(params, h)
        n_h = totals[group]
        for row, p in zip(lattice, probs):
            out[(group, tuple(int(c) + 1 for c in row))] = n_h * float(p)
    return out


def joint_pattern_table(params: ParameterSet, group: int) -> np.ndarray:
    """Joint (manifest pattern x latent path) probabilities, both lexicographic.

    Entry (y, s) is the probability that the latent path is s and the
    observed pattern is y, conditional on the group.  Row sums reproduce
    cell probabilities; column sums give the latent path law.
    """
    dims = params.dims
    if not (0 <= group < dims.n_groups):
        raise ModelError(f"group index {group} out of range")
    A, J, T = dims.n_classes, dims.n_categories, dims.n_occasions
    paths = pattern_lattice(A, T)
    patterns = pattern_lattice(J, T)
    prior = params.delta[group][paths[:, 0]]
    for t in range(T - 1):
        prior = prior * params.tau[t, group][paths[:, t], paths[:, t + 1]]
    emission = np.ones((patterns.shape[0], paths.shape[0]))
    for t in range(T):
        emission *= params.rho[t, group][paths[:, t][None, :], patterns[:, t][:, None]]
    return emission * prior[None, :]


def validate(spec: ModelSpec, params: ParameterSet) -> ValidationReport:
    """Check simplex, range, tie, and fix invariants; never raises."""
    violations: list[str] = []
    dims = spec.dims
    if params.dims != dims:
        return ValidationReport(False, (f"dimension mismatch: {params.dims} vs {dims}",))

    def check_rows(name, arr):
        flat = arr.reshape(-1, arr.shape[-1])
        for i, row in enumerate(flat):
            if ((row < -1e-15) | (row > 1 + 1e-15)).any():
                violations.append(f"{name} row {i}: entry outside [0,1]")
            elif abs(row.sum() - 1.0) > ROW_SUM_TOL:
                violations.append(f"{name} row {i}: sums to {row.sum():.17g}")

    check_rows("gamma", params.gamma[None, :])
    check_rows("delta", params.delta)
    check_rows("rho", params.rho)
    check_rows("tau", params.tau)

    arrays = {"delta": params.delta, "rho": params.rho, "tau": params.tau}
    for cls_ in spec.constraints.cell_classes(dims):
        cells = sorted(cls_)
        values = [arrays[c[0]][c[1:]] for c in cells]
        if max(values) - min(values) > 1e-12:
            violations.append(f"tied cells {cells[0]} and {cells[-1]} differ")
    for cell, value in spec.constraints.fixes.items():
        actual = arrays[cell[0]][cell[1:]]
        if abs(actual - value) > 1e-12:
            violations.append(f"fixed cell {cell} is {actual:.17g}, pinned to {value}")

    return ValidationReport(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# JSON serialization.  Floats survive round-trips bit-exactly because the
# json module emits shortest-round-trip decimal representations.

def _constraints_doc(con: ConstraintSet) -> dict:
    return {
        "delta_blocks": [list(b) for b in con.delta_blocks],
        "rho_blocks": [[list(p) for p in b] for b in con.rho_blocks],
        "tau_blocks": [[list(p) for p in b] for b in con.tau_blocks],
        "fixes": [{"cell": list(cell), "value": value} for cell, value in sorted(con.fixes.items())],
    }


def _constraints_from_doc(doc: dict) -> ConstraintSet:
    return ConstraintSet(
        delta_blocks=tuple(tuple(b) for b in doc["delta_blocks"]),
        rho_blocks=tuple(tuple(tuple(p) for p in b) for b in doc["rho_blocks"]),
        tau_blocks=tuple(tuple(tuple(p) for p in b) for b in doc["tau_blocks"]),
        fixes={tuple(f["cell"]): f["value"] for f in doc.get("fixes", [])},
    )


def params_to_json(params: ParameterSet, constraints: ConstraintSet | None = None) -> str:
    doc = {
        "gamma": params.gamma.tolist(),
        "delta": params.delta.tolist(),
        "rho": params.rho.tolist(),
        "tau": params.tau.tolist(),
    }
    if constraints is not None:
        doc["constraints"] = _constraints_doc(constraints)
    return json.dumps(doc, indent=2)


def params_from_json(text: str) -> tuple[ParameterSet, ConstraintSet | None]:
    doc = json.loads(text)
    params = ParameterSet(
        gamma=np.array(doc["gamma"], dtype=float),
        delta=np.array(doc["delta"], dtype=float),
        rho=np.array(doc["rho"], dtype=float),
        tau=np.array(doc["tau"], dtype=float),
    )
    con = _constraints_from_doc(doc["constraints"]) if "constraints" in doc else None
    return params, con
