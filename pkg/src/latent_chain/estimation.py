"""Maximum-likelihood fitting of constrained latent chain models by EM.

The E-step runs scaled forward-backward recursions over the observed
pattern cells; the M-step pools expected counts over tied rows before
normalizing, so tied rows stay exactly equal and fixed cells stay pinned.
All random starts are advanced in one stacked array pass, which keeps
multi-start search cheap at contingency-table scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .model_core import (
    ConstraintSet,
    Dims,
    ModelError,
    ModelSpec,
    ParameterSet,
    apply_constraints,
    identity_leaning_start,
    random_parameter_set,
)
from .panel_data import PanelTable

__all__ = [
    "EMError",
    "FitOptions",
    "FitDiagnostics",
    "StandardErrors",
    "FitResult",
    "em_step",
    "em_fit",
    "canonicalize_labels",
    "count_free_parameters",
    "standard_errors",
    "snap_boundaries",
    "log_likelihood",
]

LL_TIE_TOL = 1e-6


class EMError(RuntimeError):
    """Raised when an EM invariant is broken (log-likelihood decreased)."""


@dataclass(frozen=True)
class FitOptions:
    """Search settings for em_fit."""

    starts: int = 32
    max_iterations: int = 5000
    convergence: float = 1e-9
    boundary_tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise ModelError("starts must be >= 1")
        if self.max_iterations < 1:
            raise ModelError("max_iterations must be >= 1")
        if self.convergence <= 0:
            raise ModelError("convergence threshold must be > 0")
        if not (0 < self.boundary_tol < 0.5):
            raise ModelError("boundary_tol must be in (0, 0.5)")


@dataclass(frozen=True)
class FitDiagnostics:
    iterations: int
    converged: bool
    n_best_starts: int
    starts: int
    seed: int
    boundary_cells: tuple[str, ...] = ()
    zero_mass_rows: tuple[str, ...] = ()
    group_totals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StandardErrors:
    """Delta-method SEs on the probability scale; NaN marks "n.e." cells."""

    delta: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    note: str = ""


@dataclass
class FitResult:
    params: ParameterSet
    spec: ModelSpec
    log_likelihood: float
    free_parameters: int
    degrees_of_freedom: int
    diagnostics: FitDiagnostics
    g_squared: float | None = None
    standard_errors: StandardErrors | None = None


# ---------------------------------------------------------------------------
# Row classes: one entry per independently estimated simplex row.

@dataclass(frozen=True)
class _RowClass:
    kind: str              # "delta" | "rho" | "tau"
    members: tuple         # group indices, or (occasion, group) pairs
    row: int | None        # class index a for rho/tau rows; None for delta
    width: int
    fixed: dict            # column -> pinned value

    def cells(self):
        """All parameter cells covered by this row class."""
        for m in self.members:
            for col in range(self.width):
                if self.kind == "delta":
                    yield ("delta", m, col)
                else:
                    yield (self.kind, m[0], m[1], self.row, col)


def _row_fix_map(con: ConstraintSet, kind: str, key: tuple, width: int) -> dict:
    out = {}
    for cell, value in con.fixes.items():
        if cell[0] == kind and cell[1:-1] == key:
            if not (0 <= cell[-1] < width):
                raise ModelError(f"fix {cell} column out of range")
            out[cell[-1]] = value
    return out


def _row_classes(spec: ModelSpec) -> list[_RowClass]:
    dims = spec.dims
    con = spec.constraints
    A, J = dims.n_classes, dims.n_categories
    classes: list[_RowClass] = []
    for block in con.delta_blocks:
        fixed = _row_fix_map(con, "delta", (block[0],), A)
        for h in block[1:]:
            if _row_fix_map(con, "delta", (h,), A) != fixed:
                raise ModelError(f"tied delta rows {block} carry different fixes")
        classes.append(_RowClass("delta", tuple(block), None, A, fixed))
    for kind, blocks, width in (("rho", con.rho_blocks, J), ("tau", con.tau_blocks, A)):
        for block in blocks:
            for a in range(A):
                fixed = _row_fix_map(con, kind, block[0] + (a,), width)
                for th in block[1:]:
                    if _row_fix_map(con, kind, th + (a,), width) != fixed:
                        raise ModelError(f"tied {kind} rows {block} class {a} carry different fixes")
                classes.append(_RowClass(kind, tuple(block), a, width, fixed))
    return classes


# ---------------------------------------------------------------------------
# Stacked EM core.  Arrays carry a leading start axis S.

@dataclass
class _GroupData:
    label: str
    idx: np.ndarray     # (C, T) 0-based category indices of observed patterns
    counts: np.ndarray  # (C,)
    onehot: np.ndarray  # (T, C, J)


def _prepare_groups(table: PanelTable, dims: Dims) -> list[_GroupData]:
    if (table.n_groups, table.n_categories, table.occasions) != (
        dims.n_groups,
        dims.n_categories,
        dims.n_occasions,
    ):
        raise ModelError("table dimensions do not match model dimensions")
    groups = []
    for label in table.groups:
        items = sorted(table.group_cells(label))
        if not items:
            raise ModelError(f"group {label!r} has no observations")
        idx = np.array([p for p, _ in items], dtype=int) - 1
        counts = np.array([c for _, c in items], dtype=float)
        onehot = np.zeros((dims.n_occasions, idx.shape[0], dims.n_categories))
        for t in range(dims.n_occasions):
            onehot[t, np.arange(idx.shape[0]), idx[:, t]] = 1.0
        groups.append(_GroupData(label, idx, counts, onehot))
    return groups


def _estep(delta, rho, tau, groups):
    """Log-likelihood and expected counts for stacked parameter arrays.

    Returns (ll (S,), d_counts (S,H,A), r_counts (S,T,H,A,J),
    t_counts (S,T-1,H,A,A)).
    """
    S, H, A = delta.shape
    T = rho.shape[1]
    J = rho.shape[4]
    ll = np.zeros(S)
    d_counts = np.zeros((S, H, A))
    r_counts = np.zeros((S, T, H, A, J))
    t_counts = np.zeros((S, T - 1, H, A, A))

    for h, g in enumerate(groups):
        C = g.idx.shape[0]
        emits = np.empty((T, S, C, A))
        for t in range(T):
            emits[t] = rho[:, t, h][:, :, g.idx[:, t]].transpose(0, 2, 1)
        alphas = np.empty((T, S, C, A))
        scales = np.empty((T, S, C))
        a = delta[:, h][:, None, :] * emits[0]
        s = a.sum(axis=2)
        scales[0] = s
        alphas[0] = a / np.where(s > 0, s, 1.0)[:, :, None]
        for t in range(1, T):
            a = np.einsum("sca,sab->scb", alphas[t - 1], tau[:, t - 1, h]) * emits[t]
            s = a.sum(axis=2)
            scales[t] = s
            alphas[t] = a / np.where(s > 0, s, 1.0)[:, :, None]
        with np.errstate(divide="ignore"):
            ll += (np.log(scales).sum(axis=0) * g.counts[None, :]).sum(axis=1)

        betas = np.ones((S, C, A))
        q_last = alphas[T - 1] * betas * g.counts[None, :, None]
        r_counts[:, T - 1, h] += np.einsum("sca,cj->saj", q_last, g.onehot[T - 1])
        for t in range(T - 2, -1, -1):
            be = betas * emits[t + 1]
            xi = (
                alphas[t][:, :, :, None]
                * tau[:, t, h][:, None, :, :]
                * be[:, :, None, :]
                / np.where(scales[t + 1] > 0, scales[t + 1], 1.0)[:, :, None, None]
            )
            t_counts[:, t, h] += (xi * g.counts[None, :, None, None]).sum(axis=1)
            betas = np.einsum("scb,sab->sca", be, tau[:, t, h])
            betas = betas / np.where(scales[t + 1] > 0, scales[t + 1], 1.0)[:, :, None]
            q = alphas[t] * betas * g.counts[None, :, None]
            r_counts[:, t, h] += np.einsum("sca,cj->saj", q, g.onehot[t])
            if t == 0:
                d_counts[:, h] += q.sum(axis=1)
    return ll, d_counts, r_counts, t_counts


def _mstep_row(pooled: np.ndarray, prev: np.ndarray, fixed: dict) -> tuple[np.ndarray, np.ndarray]:
    """Normalize pooled counts into simplex rows, honoring fixed columns.

    pooled, prev : (S, K).  Rows with zero free mass keep their previous
    values; the boolean return marks them.
    """
    S, K = pooled.shape
    new = np.empty_like(pooled)
    free = np.ones(K, dtype=bool)
    fixed_total = 0.0
    for col, value in fixed.items():
        new[:, col] = value
        free[col] = False
        fixed_total += value
    free_mass = 1.0 - fixed_total
    if not free.any():
        return new, np.zeros(S, dtype=bool)
    sums = pooled[:, free].sum(axis=1)
    zero = sums <= 0.0
    safe = np.where(zero, 1.0, sums)
    new[:, free] = pooled[:, free] * (free_mass / safe)[:, None]
    if zero.any():
        new[np.ix_(zero, free)] = prev[np.ix_(zero, free)]
    return new, zero


def _mstep(d_counts, r_counts, t_counts, delta, rho, tau, row_classes):
    zero_rows: list[str] = []
    S = delta.shape[0]
    new_delta = np.array(delta)
    new_rho = np.array(rho)
    new_tau = np.array(tau)
    for rc in row_classes:
        if rc.kind == "delta":
            pooled = d_counts[:, list(rc.members)].sum(axis=1)
            prev = delta[:, rc.members[0]]
            new, zero = _mstep_row(pooled, prev, rc.fixed)
            for h in rc.members:
                new_delta[:, h] = new
        elif rc.kind == "rho":
            pooled = sum(r_counts[:, t, h, rc.row] for t, h in rc.members)
            prev = rho[:, rc.members[0][0], rc.members[0][1], rc.row]
            new, zero = _mstep_row(pooled, prev, rc.fixed)
            for t, h in rc.members:
                new_rho[:, t, h, rc.row] = new
        else:
            pooled = sum(t_counts[:, t, h, rc.row] for t, h in rc.members)
            prev = tau[:, rc.members[0][0], rc.members[0][1], rc.row]
            new, zero = _mstep_row(pooled, prev, rc.fixed)
            for t, h in rc.members:
                new_tau[:, t, h, rc.row] = new
        if zero.any():
            zero_rows.append(f"{rc.kind} row {rc.members[0]}/{rc.row}")
    return new_delta, new_rho, new_tau, tuple(zero_rows)


def log_likelihood(params: ParameterSet, table: PanelTable) -> float:
    """Conditional-on-group log-likelihood of the observed table."""
    groups = _prepare_groups(table, params.dims)
    ll, _, _, _ = _estep(params.delta[None], params.rho[None], params.tau[None], groups)
    return float(ll[0])


def em_step(params: ParameterSet, table: PanelTable, spec: ModelSpec) -> ParameterSet:
    """One EM update under the constraint set; never decreases the log-likelihood."""
    groups = _prepare_groups(table, spec.dims)
    row_classes = _row_classes(spec)
    _, d, r, t = _estep(params.delta[None], params.rho[None], params.tau[None], groups)
    nd, nr, nt, _ = _mstep(d, r, t, params.delta[None], params.rho[None], params.tau[None], row_classes)
    return ParameterSet(gamma=params.gamma, delta=nd[0], rho=nr[0], tau=nt[0])


def _run_em(delta, rho, tau, groups, row_classes, options: FitOptions):
    """Advance all stacked starts to convergence.

    Returns (final delta/rho/tau, ll (S,), iterations (S,), converged (S,),
    zero_row_flags).
    """
    S = delta.shape[0]
    final = (np.array(delta), np.array(rho), np.array(tau))
    ll_final = np.full(S, -np.inf)
    iters = np.zeros(S, dtype=int)
    converged = np.zeros(S, dtype=bool)
    active = np.arange(S)
    zero_rows: set[str] = set()

    prev_ll = np.full(S, -np.inf)
    d_a, r_a, t_a = np.array(delta), np.array(rho), np.array(tau)
    for iteration in range(1, options.max_iterations + 1):
        ll, dc, rc, tc = _estep(d_a, r_a, t_a, groups)
        if (ll < prev_ll[active] - 1e-8).any():
            worst = float((prev_ll[active] - ll).max())
            raise EMError(f"log-likelihood decreased by {worst:.3e} at iteration {iteration}")
        done = (ll - prev_ll[active]) < options.convergence
        prev_ll[active] = ll
        ll_final[active] = ll
        iters[active] = iteration
        if done.any():
            idx = active[done]
            converged[idx] = True
            final[0][idx] = d_a[done]
            final[1][idx] = r_a[done]
            final[2][idx] = t_a[done]
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
            d_a, r_a, t_a = d_a[keep], r_a[keep], t_a[keep]
            dc, rc, tc = dc[keep], rc[keep], tc[keep]
        d_a, r_a, t_a, zr = _mstep(dc, rc, tc, d_a, r_a, t_a, row_classes)
        zero_rows.update(zr)
    if active.size:
        # Ran out of iterations: refresh LL so it matches the stored params.
        ll, _, _, _ = _estep(d_a, r_a, t_a, groups)
        ll_final[active] = ll
        final[0][active] = d_a
        final[1][active] = r_a
        final[2][active] = t_a
    return final[0], final[1], final[2], ll_final, iters, converged, tuple(sorted(zero_rows))


def canonicalize_labels(params: ParameterSet) -> ParameterSet:
    """Permute latent classes into a reproducible order.

    Classes are sorted so the modal response category of the occasion-1
    response rows (pooled over groups) is non-decreasing; ties break by
    descending pooled initial proportion.  Relabeling leaves every cell
    probability unchanged.
    """
    pooled_rho = params.rho[0].mean(axis=0)     # (A, J)
    pooled_delta = params.delta.mean(axis=0)    # (A,)
    modal = pooled_rho.argmax(axis=1)
    A = params.dims.n_classes
    order = sorted(range(A), key=lambda a: (modal[a], -pooled_delta[a], a))
    order = np.array(order)
    return ParameterSet(
        gamma=params.gamma,
        delta=params.delta[:, order],
        rho=params.rho[:, :, order, :],
        tau=params.tau[:, :, order, :][:, :, :, order],
    )


def snap_boundaries(
    params: ParameterSet, spec: ModelSpec, boundary_tol: float
) -> tuple[ParameterSet, tuple[str, ...]]:
    """Snap near-0/1 free cells exactly and renormalize the free mass.

    EM only approaches the boundary asymptotically; snapping reproduces
    the estimated-at-0/1 convention used in the reference tables.
    """
    con = spec.constraints
    arrays = {
        "delta": np.array(params.delta),
        "rho": np.array(params.rho),
        "tau": np.array(params.tau),
    }
    snapped: list[str] = []
    for rc in _row_classes(spec):
        arr = arrays[rc.kind]
        key = (rc.members[0],) if rc.kind == "delta" else (rc.members[0][0], rc.members[0][1], rc.row)
        row = np.array(arr[key] if rc.kind != "delta" else arr[rc.members[0]])
        free = np.ones(rc.width, dtype=bool)
        for col in rc.fixed:
            free[col] = False
        free_mass = 1.0 - sum(rc.fixed.values())
        low = free & (row <= boundary_tol)
        if low.any():
            row[low] = 0.0
            rest = free & ~low
            s = row[rest].sum()
            if s > 0:
                row[rest] *= free_mass / s
            for col in np.where(low)[0]:
                snapped.append(_cell_name(rc, int(col), 0.0))
        high = free & (row >= 1.0 - boundary_tol) & (row != 1.0)
        if high.any() and free_mass == 1.0 and int(high.sum()) == 1 and row[free].sum() - row[high][0] == 0.0:
            row[high] = 1.0
            snapped.append(_cell_name(rc, int(np.where(high)[0][0]), 1.0))
        if rc.kind == "delta":
            for h in rc.members:
                arrays["delta"][h] = row
        else:
            for t, h in rc.members:
                arrays[rc.kind][t, h, rc.row] = row
    out = ParameterSet(gamma=params.gamma, delta=arrays["delta"], rho=arrays["rho"], tau=arrays["tau"])
    return out, tuple(snapped)


def _cell_name(rc: _RowClass, col: int, value: float) -> str:
    if rc.kind == "delta":
        where = f"groups={list(rc.members)}"
        return f"delta[{where}, class={col + 1}]={value:g}"
    where = f"(t,h)={list(rc.members)}"
    return f"{rc.kind}[{where}, row={rc.row + 1}, col={col + 1}]={value:g}"


def count_free_parameters(params: ParameterSet, spec: ModelSpec, boundary_tol: float) -> int:
    """Independently estimated parameters after tie, fix, and boundary accounting.

    Each estimated simplex row contributes (interior entries - 1), floored
    at zero; tied rows count once; fixed cells and boundary cells do not
    count; group proportions are data constants and contribute nothing.
    """
    total = 0
    arrays = {"delta": params.delta, "rho": params.rho, "tau": params.tau}
    for rc in _row_classes(spec):
        if rc.kind == "delta":
            row = arrays["delta"][rc.members[0]]
        else:
            t, h = rc.members[0]
            row = arrays[rc.kind][t, h, rc.row]
        free = np.ones(rc.width, dtype=bool)
        for col in rc.fixed:
            free[col] = False
        interior = free & (row > boundary_tol) & (row < 1.0 - boundary_tol)
        total += max(int(interior.sum()) - 1, 0)
    return total


def degrees_of_freedom(free_parameters: int, dims: Dims) -> int:
    cells = dims.n_categories ** dims.n_occasions
    return dims.n_groups * (cells - 1) - free_parameters


def em_fit(
    spec: ModelSpec,
    table: PanelTable,
    options: FitOptions | None = None,
    warm_start: ParameterSet | None = None,
    compute_se: bool = True,
) -> FitResult:
    """Multi-start EM fit returning the best converged parameter set.

    Start 0 is a deterministic identity-leaning configuration when A == J
    (or the warm start when one is given); the rest are random draws from
    the seeded generator.  The winner is the highest final log-likelihood,
    ties within 1e-6 broken by lowest start index, so results are
    reproducible given (seed, options, table, spec).
    """
    options = options or FitOptions()
    dims = spec.dims
    groups = _prepare_groups(table, dims)
    row_classes = _row_classes(spec)
    totals = table.group_totals()
    n_total = sum(totals.values())
    gamma = np.array([totals[g] / n_total for g in table.groups])

    rng = np.random.default_rng(options.seed)
    starts: list[ParameterSet] = []
    if warm_start is not None:
        starts.append(apply_constraints(
            ParameterSet(gamma=gamma, delta=warm_start.delta, rho=warm_start.rho, tau=warm_start.tau),
            spec,
        ))
    elif dims.n_classes == dims.n_categories:
        starts.append(identity_leaning_start(spec, gamma=gamma))
    while len(starts) < options.starts:
        starts.append(random_parameter_set(spec, rng, gamma=gamma))

    delta0 = np.stack([p.delta for p in starts])
    rho0 = np.stack([p.rho for p in starts])
    tau0 = np.stack([p.tau for p in starts])
    d, r, t, ll, iters, conv, zero_rows = _run_em(delta0, rho0, tau0, groups, row_classes, options)

    best_ll = ll.max()
    if not np.isfinite(best_ll):
        raise EMError("all starts produced non-finite log-likelihood")
    candidates = np.where(ll >= best_ll - LL_TIE_TOL)[0]
    winner = int(candidates.min())
    n_best = int(candidates.size)

    params = ParameterSet(gamma=gamma, delta=d[winner], rho=r[winner], tau=t[winner])
    params = canonicalize_labels(params)
    params, boundary_cells = snap_boundaries(params, spec, options.boundary_tol)
    final_ll = log_likelihood(params, table)

    free = count_free_parameters(params, spec, options.boundary_tol)
    result = FitResult(
        params=params,
        spec=spec,
        log_likelihood=final_ll,
        free_parameters=free,
        degrees_of_freedom=degrees_of_freedom(free, dims),
        diagnostics=FitDiagnostics(
            iterations=int(iters[winner]),
            converged=bool(conv[winner]),
            n_best_starts=n_best,
            starts=options.starts,
            seed=options.seed,
            boundary_cells=boundary_cells,
            zero_mass_rows=zero_rows,
            group_totals=dict(totals),
        ),
    )
    if compute_se:
        result.standard_errors = standard_errors(result, table, spec, options.boundary_tol)
    return result


# ---------------------------------------------------------------------------
# Standard errors: observed information of a minimal free parameterization.

def _theta_layout(params: ParameterSet, spec: ModelSpec, boundary_tol: float):
    """Free coordinates: per estimated row, interior cells minus the last."""
    arrays = {"delta": params.delta, "rho": params.rho, "tau": params.tau}
    layout = []   # (row_class, interior columns); theta holds cols[:-1]
    theta = []
    for rc in _row_classes(spec):
        if rc.kind == "delta":
            row = arrays["delta"][rc.members[0]]
        else:
            t, h = rc.members[0]
            row = arrays[rc.kind][t, h, rc.row]
        free = np.ones(rc.width, dtype=bool)
        for col in rc.fixed:
            free[col] = False
        interior = np.where(free & (row > boundary_tol) & (row < 1.0 - boundary_tol))[0]
        if interior.size >= 2:
            layout.append((rc, interior))
            theta.extend(row[interior[:-1]])
    return layout, np.array(theta)


def _params_from_theta(theta, layout, params: ParameterSet, spec: ModelSpec) -> ParameterSet:
    arrays = {
        "delta": np.array(params.delta),
        "rho": np.array(params.rho),
        "tau": np.array(params.tau),
    }
    pos = 0
    for rc, interior in layout:
        k = interior.size - 1
        vals = theta[pos:pos + k]
        pos += k
        free_mass = 1.0 - sum(rc.fixed.values())
        if rc.kind == "delta":
            row = np.array(arrays["delta"][rc.members[0]])
        else:
            t, h = rc.members[0]
            row = np.array(arrays[rc.kind][t, h, rc.row])
        row[interior[:-1]] = vals
        row[interior[-1]] = free_mass - row[interior[:-1]].sum() - row[
            [c for c in range(rc.width) if c not in interior and c not in rc.fixed]
        ].sum()
        if rc.kind == "delta":
            for h in rc.members:
                arrays["delta"][h] = row
        else:
            for t, h in rc.members:
                arrays[rc.kind][t, h, rc.row] = row
    return ParameterSet(gamma=params.gamma, delta=arrays["delta"], rho=arrays["rho"], tau=arrays["tau"])


def standard_errors(
    fit: FitResult, table: PanelTable, spec: ModelSpec, boundary_tol: float = 1e-4
) -> StandardErrors:
    """Observed-information SEs by central finite differences of the log-likelihood.

    One coordinate per tie class and row, with the last interior cell of
    each row eliminated; variances map back to the probability scale by
    the delta method (the eliminated cell's variance is the summed row
    covariance).  Boundary and fixed cells are not estimated (NaN).
    """
    dims = spec.dims
    se_delta = np.full(fit.params.delta.shape, np.nan)
    se_rho = np.full(fit.params.rho.shape, np.nan)
    se_tau = np.full(fit.params.tau.shape, np.nan)
    ses = {"delta": se_delta, "rho": se_rho, "tau": se_tau}

    layout, theta = _theta_layout(fit.params, spec, boundary_tol)
    k = theta.size
    if k == 0:
        return StandardErrors(se_delta, se_rho, se_tau, note="no interior parameters")

    def negll(th):
        return -log_likelihood(_params_from_theta(th, layout, fit.params, spec), table)

    steps = 1e-5 * np.maximum(1.0, np.abs(theta))
    f0 = negll(theta)
    hess = np.empty((k, k))
    fp = np.empty(k)
    fm = np.empty(k)
    for i in range(k):
        e = np.zeros(k)
        e[i] = steps[i]
        fp[i] = negll(theta + e)
        fm[i] = negll(theta - e)
        hess[i, i] = (fp[i] - 2.0 * f0 + fm[i]) / steps[i] ** 2
    for i in range(k):
        for j in range(i + 1, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = steps[i]
            ej[j] = steps[j]
            val = (
                negll(theta + ei + ej)
                - negll(theta + ei - ej)
                - negll(theta - ei + ej)
                + negll(theta - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val

    try:
        np.linalg.cholesky(hess)
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return StandardErrors(
            se_delta, se_rho, se_tau,
            note="observed information matrix not positive definite; no SEs",
        )

    pos = 0
    for rc, interior in layout:
        n_free = interior.size - 1
        idx = np.arange(pos, pos + n_free)
        pos += n_free
        row_se = np.sqrt(np.maximum(np.diag(cov)[idx], 0.0))
        resid_var = float(cov[np.ix_(idx, idx)].sum())
        resid_se = np.sqrt(max(resid_var, 0.0))
        if rc.kind == "delta":
            for h in rc.members:
                ses["delta"][h, interior[:-1]] = row_se
                ses["delta"][h, interior[-1]] = resid_se
        else:
            for t, h in rc.members:
                ses[rc.kind][t, h, rc.row, interior[:-1]] = row_se
                ses[rc.kind][t, h, rc.row, interior[-1]] = resid_se
    return StandardErrors(se_delta, se_rho, se_tau)
