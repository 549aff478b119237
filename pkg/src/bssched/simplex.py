"""Dense two-phase simplex for standard-form linear programs.

Solves min c.x subject to A x = b, x >= 0. Both phases pivot with Bland's
rule (smallest eligible index enters, ties in the ratio test break toward
the smallest basic variable index), which cannot cycle, so the iteration
cap only trips on genuinely pathological input and raises instead of
returning a wrong answer. The solver is deterministic: the same problem
always produces the same basis and the same optimal vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SimplexError(Exception):
    """Pivot limit exceeded or an internal invariant failed."""


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    basis: np.ndarray | None
    iterations: int


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    # keep the pivot column exactly canonical
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def _entering(tableau: np.ndarray, n_cols: int, tol: float) -> int | None:
    """Bland: leftmost column with a negative reduced cost."""
    reduced = tableau[-1, :n_cols]
    candidates = np.nonzero(reduced < -tol)[0]
    return int(candidates[0]) if candidates.size else None


def _leaving(
    tableau: np.ndarray, col: int, basis: np.ndarray, tol: float
) -> int | None:
    """Minimum-ratio row; ties go to the smallest basic variable index."""
    column = tableau[:-1, col]
    rhs = tableau[:-1, -1]
    best: tuple[float, int, int] | None = None
    for i in range(column.shape[0]):
        if column[i] > tol:
            ratio = rhs[i] / column[i]
            key = (ratio, int(basis[i]), i)
            if best is None or key < best:
                best = key
    return best[2] if best is not None else None


def _run_phase(
    tableau: np.ndarray,
    basis: np.ndarray,
    n_cols: int,
    tol: float,
    max_iter: int,
) -> tuple[str, int]:
    iterations = 0
    while True:
        col = _entering(tableau, n_cols, tol)
        if col is None:
            return "optimal", iterations
        row = _leaving(tableau, col, basis, tol)
        if row is None:
            return "unbounded", iterations
        _pivot(tableau, row, col)
        basis[row] = col
        iterations += 1
        if iterations > max_iter:
            raise SimplexError(f"pivot limit {max_iter} exceeded")


def solve_standard_form(
    c: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    tol: float = 1e-9,
    max_iter: int | None = None,
) -> SimplexResult:
    """Minimize c.x over {A x = b, x >= 0}.

    Returns an optimal basic solution, or status "infeasible"/"unbounded".
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if max_iter is None:
        max_iter = max(5000, 100 * (m + n))

    negative = b < 0
    a[negative] *= -1.0
    b[negative] *= -1.0

    # Phase 1 tableau: original columns, artificial identity, rhs.
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[-1, : n + m] = -tableau[:m, : n + m].sum(axis=0)
    tableau[-1, n : n + m] = 0.0
    tableau[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)

    status, it1 = _run_phase(tableau, basis, n + m, tol, max_iter)
    if status == "unbounded":
        raise SimplexError("phase 1 reported unbounded")
    phase1_obj = -tableau[-1, -1]
    if phase1_obj > tol * (1.0 + abs(b).max(initial=0.0)):
        return SimplexResult("infeasible", None, None, None, it1)

    # Drive leftover artificial variables out of the basis. A row where no
    # original column can pivot is redundant and gets dropped.
    keep_rows = []
    for i in range(m):
        if basis[i] >= n:
            pivot_cols = np.nonzero(np.abs(tableau[i, :n]) > tol)[0]
            if pivot_cols.size:
                _pivot(tableau, i, int(pivot_cols[0]))
                basis[i] = int(pivot_cols[0])
                keep_rows.append(i)
        else:
            keep_rows.append(i)
    if len(keep_rows) < m:
        tableau = tableau[keep_rows + [m]]
        basis = basis[keep_rows]
        m = len(keep_rows)

    # Phase 2: drop artificial columns, rebuild reduced costs for c.
    tableau = np.concatenate([tableau[:, :n], tableau[:, -1:]], axis=1)
    tableau[:-1, -1] = np.maximum(tableau[:-1, -1], 0.0)
    tableau[-1, :n] = c - c[basis] @ tableau[:-1, :n]
    tableau[-1, -1] = -float(c[basis] @ tableau[:-1, -1])

    status, it2 = _run_phase(tableau, basis, n, tol, max_iter)
    iterations = it1 + it2
    if status == "unbounded":
        return SimplexResult("unbounded", None, None, None, iterations)

    x = np.zeros(n)
    x[basis] = tableau[:-1, -1]
    return SimplexResult("optimal", x, float(c @ x), basis.copy(), iterations)
