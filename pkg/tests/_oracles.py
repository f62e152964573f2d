"""Independent brute-force oracles used to pin expected test values.

Everything here deliberately avoids the library's recursion code paths:
probabilities come from explicit sums over all latent paths, tail
probabilities from the even-df closed form, and small MLEs from grid
search.
"""
import itertools
import math

import numpy as np


def enumerate_cell_probability(params, group: int, pattern) -> float:
    """Sum the path products over all A^T latent paths; pattern is 1-based."""
    dims = params.dims
    A, T = dims.n_classes, dims.n_occasions
    pat = np.asarray(pattern, dtype=int) - 1
    total = 0.0
    for path in itertools.product(range(A), repeat=T):
        p = params.delta[group, path[0]] * params.rho[0, group, path[0], pat[0]]
        for t in range(T - 1):
            p *= params.tau[t, group, path[t], path[t + 1]]
            p *= params.rho[t + 1, group, path[t + 1], pat[t + 1]]
        total += p
    return total


def enumerate_state_posteriors(params, group: int, pattern) -> np.ndarray:
    """Posterior latent-state marginals by explicit path enumeration."""
    dims = params.dims
    A, T = dims.n_classes, dims.n_occasions
    pat = np.asarray(pattern, dtype=int) - 1
    post = np.zeros((T, A))
    total = 0.0
    for path in itertools.product(range(A), repeat=T):
        p = params.delta[group, path[0]] * params.rho[0, group, path[0], pat[0]]
        for t in range(T - 1):
            p *= params.tau[t, group, path[t], path[t + 1]]
            p *= params.rho[t + 1, group, path[t + 1], pat[t + 1]]
        total += p
        for t, a in enumerate(path):
            post[t, a] += p
    return post / total


def chi_square_sf_even_df(x: float, df: int) -> float:
    """exp(-x/2) * sum_{i<df/2} (x/2)^i / i!  (exact for even df)."""
    assert df % 2 == 0 and df > 0
    m = x / 2.0
    return math.exp(-m) * sum(m**i / math.factorial(i) for i in range(df // 2))


def grid_search_two_cell_mle(n1: int, n2: int, steps: int = 61):
    """Best log-likelihood of the one-occasion 2-class/2-category model.

    Parameters (initial proportion, two response rows) are scanned on a
    grid; returns (max log-likelihood, fitted first-cell probability).
    """
    grid = np.linspace(0.0, 1.0, steps)
    best = -np.inf
    best_p = None
    for d in grid:
        for r1 in grid:
            for r2 in grid:
                p1 = d * r1 + (1 - d) * r2
                if p1 <= 0.0 or p1 >= 1.0:
                    if (n1 > 0 and p1 <= 0.0) or (n2 > 0 and p1 >= 1.0):
                        continue
                ll = 0.0
                if n1 > 0:
                    ll += n1 * math.log(p1)
                if n2 > 0:
                    ll += n2 * math.log(1 - p1)
                if ll > best:
                    best = ll
                    best_p = p1
    return best, best_p


def independence_g_squared(table, group: str) -> float:
    """Single-class baseline: expected cells from per-occasion marginals."""
    items = list(table.group_cells(group))
    n = sum(c for _, c in items)
    T = table.occasions
    J = table.n_categories
    marginals = np.zeros((T, J))
    for pattern, count in items:
        for t, c in enumerate(pattern):
            marginals[t, c - 1] += count
    marginals /= n
    total = 0.0
    for pattern, count in items:
        m = n * np.prod([marginals[t, c - 1] for t, c in enumerate(pattern)])
        total += count * math.log(count / m)
    return 2.0 * total


def regroup_cells(cells, mapping):
    """Brute-force category regrouping of a {(group, pattern): count} dict."""
    out = {}
    for (group, pattern), count in cells.items():
        key = (group, tuple(mapping[c] for c in pattern))
        out[key] = out.get(key, 0) + count
    return {k: v for k, v in out.items() if v > 0}
