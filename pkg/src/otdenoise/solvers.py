"""Exact and approximate solvers for discrete optimal transport.

``kantorovich_lp`` solves the transportation linear program with the
HiGHS simplex backend and is the reference route everything else is
checked against.  ``w1_1d`` (sorted quantile matching),
``monge_assignment`` (branch-and-bound over permutations) and
``sinkhorn`` (log-domain entropic iterations) are independent
implementations, so agreement between routes is meaningful.

All functions are pure: they never mutate their inputs and share no
state, so concurrent calls are safe.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from otdenoise.errors import SinkhornConvergenceError
from otdenoise.measures import Coupling, CostSpec, EmpiricalMeasure, TransportMap

UNIFORM_TOL = 1e-12


def ground_cost_matrix(a: EmpiricalMeasure, b: EmpiricalMeasure,
                       cost: CostSpec = CostSpec()) -> np.ndarray:
    """Pairwise cost ``C[i, j] = ||a_i - b_j||^beta``.

    Computed from explicit point differences, so the matrix is exactly
    symmetric when ``a`` and ``b`` share the same points.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.points[:, None, :] - b.points[None, :, :]
    c = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    if cost.beta != 1.0:
        c = c ** cost.beta
    return c


def kantorovich_lp(a: EmpiricalMeasure, b: EmpiricalMeasure,
                   cost: CostSpec = CostSpec()) -> tuple[Coupling, float]:
    """Minimum-cost coupling between two discrete measures.

    Returns the optimal plan and the transport cost
    ``min_pi sum_ij pi_ij C_ij`` subject to the marginal constraints.
    """
    c = ground_cost_matrix(a, b, cost)
    n, m = c.shape
    cols = np.arange(n * m)
    rows_a = sparse.csr_matrix(
        (np.ones(n * m), (np.repeat(np.arange(n), m), cols)), shape=(n, n * m))
    rows_b = sparse.csr_matrix(
        (np.ones(n * m), (np.tile(np.arange(m), n), cols)), shape=(m, n * m))
    res = linprog(
        c.ravel(),
        A_eq=sparse.vstack([rows_a, rows_b], format="csr"),
        b_eq=np.concatenate([a.weights, b.weights]),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise ValueError(f"transport LP failed (status {res.status}): {res.message}")
    plan = np.maximum(res.x.reshape(n, m), 0.0)
    return Coupling(plan, a, b), float(res.fun)


def w1_1d(a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    """Wasserstein-1 between 1-D measures via quantile matching.

    Integrates ``|Qa(t) - Qb(t)|`` over t in [0, 1], where Q are the
    step quantile functions; exact for weighted supports.
    """
    if a.dim != 1 or b.dim != 1:
        raise ValueError(f"w1_1d requires 1-D points, got d={a.dim} and d={b.dim}")
    xa = a.points[:, 0]
    xb = b.points[:, 0]
    ia, ib = np.argsort(xa, kind="stable"), np.argsort(xb, kind="stable")
    xa, wa = xa[ia], a.weights[ia]
    xb, wb = xb[ib], b.weights[ib]
    ca, cb = np.cumsum(wa), np.cumsum(wb)
    edges = np.unique(np.concatenate([[0.0], ca, cb]))
    edges = edges[edges <= 1.0 + UNIFORM_TOL]
    mids = 0.5 * (edges[:-1] + edges[1:])
    qa = xa[np.minimum(np.searchsorted(ca, mids, side="left"), len(xa) - 1)]
    qb = xb[np.minimum(np.searchsorted(cb, mids, side="left"), len(xb) - 1)]
    return float(np.sum(np.diff(edges) * np.abs(qa - qb)))


def _assignment_min(c: np.ndarray, used: np.ndarray, row: int) -> float:
    """Exact minimum cost of assigning rows ``row..n-1`` to unused columns.

    Depth-first branch and bound with a row-minimum lower bound; exact
    for any size but intended for the small instances used here.
    """
    n = c.shape[0]
    if row == n:
        return 0.0
    free = np.flatnonzero(~used)
    # admissible bound: per-row minimum over free columns
    bound_tail = c[row + 1:, free].min(axis=1).sum() if row + 1 < n else 0.0
    best = np.inf
    order = free[np.argsort(c[row, free], kind="stable")]
    for j in order:
        lo = c[row, j] + bound_tail
        if lo >= best:
            break  # columns sorted by own cost; tail bound is column-free
        used[j] = True
        sub = _assignment_min(c, used, row + 1)
        used[j] = False
        total = c[row, j] + sub
        if total < best:
            best = total
    return best


def monge_assignment(a: EmpiricalMeasure, b: EmpiricalMeasure,
                     cost: CostSpec = CostSpec(),
                     tie_tol: float = 1e-9) -> tuple[TransportMap, float]:
    """Optimal permutation between uniform measures of equal size.

    Minimizes the average point-to-point cost; among all optimal
    permutations the lexicographically smallest one is returned, so
    callers can compare optimal sets through a canonical witness.
    """
    if a.n != b.n:
        raise ValueError(f"equal sizes required, got {a.n} and {b.n}")
    if not (a.is_uniform() and b.is_uniform()):
        raise ValueError("uniform weights required on both measures")
    c = ground_cost_matrix(a, b, cost)
    n = a.n
    used = np.zeros(n, dtype=bool)
    best_total = _assignment_min(c, used, 0)
    # lexicographic extraction: fix the smallest column that keeps optimality
    assignment = np.empty(n, dtype=np.intp)
    acc = 0.0
    for i in range(n):
        for j in np.flatnonzero(~used):
            used[j] = True
            rest = _assignment_min(c, used, i + 1)
            if acc + c[i, j] + rest <= best_total + tie_tol:
                assignment[i] = j
                acc += c[i, j]
                break
            used[j] = False
    return TransportMap(assignment), best_total / n


def _round_to_feasible(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project an almost-feasible plan onto the exact marginal polytope."""
    row = p.sum(axis=1)
    scale = np.where(row > 0, np.minimum(1.0, a / np.where(row > 0, row, 1.0)), 0.0)
    p = p * scale[:, None]
    col = p.sum(axis=0)
    scale = np.where(col > 0, np.minimum(1.0, b / np.where(col > 0, col, 1.0)), 0.0)
    p = p * scale[None, :]
    da = a - p.sum(axis=1)
    db = b - p.sum(axis=0)
    mass = da.sum()
    if mass > 0:
        p = p + np.outer(da, db) / mass
    return p


def sinkhorn(a: EmpiricalMeasure, b: EmpiricalMeasure,
             cost: CostSpec = CostSpec(), epsilon: float = 1e-2,
             max_iter: int = 200_000, tol: float = 1e-9) -> tuple[Coupling, float]:
    """Entropic-regularized transport via log-domain Sinkhorn iterations.

    Iterates until the worst marginal violation is below ``tol``, then
    rounds the plan onto the exact marginal polytope so the returned
    coupling satisfies the same constraints as the LP route.  The value
    is the linear transport cost of that plan (no entropy term); it
    approaches the LP value as ``epsilon`` shrinks.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    c = ground_cost_matrix(a, b, cost)
    wa, wb = a.weights, b.weights
    with np.errstate(divide="ignore"):
        log_a, log_b = np.log(wa), np.log(wb)
    f = np.zeros(a.n)
    g = np.zeros(b.n)
    err = np.inf
    for it in range(max_iter):
        f = epsilon * log_a - epsilon * _lse((g[None, :] - c) / epsilon, axis=1)
        g = epsilon * log_b - epsilon * _lse((f[:, None] - c) / epsilon, axis=0)
        p = np.exp((f[:, None] + g[None, :] - c) / epsilon)
        err = max(np.abs(p.sum(axis=1) - wa).max(), np.abs(p.sum(axis=0) - wb).max())
        if err <= tol:
            break
    else:
        raise SinkhornConvergenceError(max_iter, float(err), tol)
    p = _round_to_feasible(p, wa, wb)
    return Coupling(p, a, b), float((p * c).sum())


def _lse(x: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out
