"""Dense two-phase simplex solver, in float and exact rational arithmetic.

The linear programs in this package are tiny (tens of rows), so a dense
tableau method is the right tool: it is transparent, easy to certify, and
the same code path runs over ``fractions.Fraction`` for exact mode.  Pivot
selection is Dantzig's rule with an automatic switch to Bland's rule (which
cannot cycle) after a fixed number of pivots; exact mode uses Bland
throughout.  Float solutions are refined by re-solving the basic system at
the final basis, which removes accumulated pivot error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["LPResult", "linprog_dense"]

FLOAT_TOL = 1e-9
BLAND_AFTER = 200
MAX_PIVOTS = 50000


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: object = None
    fun: object = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def linprog_dense(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    free_vars=(),
    maximize: bool = False,
    exact: bool = False,
) -> LPResult:
    """Solve min (or max) c^T x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0.

    Variables listed in ``free_vars`` are unrestricted in sign (handled by a
    split into positive and negative parts).  Exact mode takes Fractions (or
    ints) everywhere and returns exact Fractions.
    """
    if exact:
        return _solve(c, A_ub, b_ub, A_eq, b_eq, free_vars, maximize, exact=True)
    return _solve(c, A_ub, b_ub, A_eq, b_eq, free_vars, maximize, exact=False)


def _to_rows(mat, exact):
    if mat is None or len(mat) == 0:
        return []
    if exact:
        return [[Fraction(x) for x in row] for row in mat]
    return [list(map(float, row)) for row in np.atleast_2d(np.asarray(mat, dtype=float))]


def _solve(c, A_ub, b_ub, A_eq, b_eq, free_vars, maximize, exact):
    conv = (lambda v: Fraction(v)) if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    c = [conv(v) for v in c]
    if maximize:
        c = [-v for v in c]
    n = len(c)
    rows_ub = _to_rows(A_ub, exact)
    rhs_ub = [conv(v) for v in (b_ub if b_ub is not None else [])]
    rows_eq = _to_rows(A_eq, exact)
    rhs_eq = [conv(v) for v in (b_eq if b_eq is not None else [])]
    free_vars = sorted(set(free_vars))

    # split free variables: x_j = x_j^+ - x_j^-
    def expand_row(row):
        return row + [-row[j] for j in free_vars]

    cols = n + len(free_vars)
    obj = expand_row(c)
    m_ub, m_eq = len(rows_ub), len(rows_eq)
    m = m_ub + m_eq
    ncols = cols + m_ub  # plus slack per <= row

    # standard-form rows: [A | slacks] x = b with b >= 0 after sign flips
    std_rows = []
    std_rhs = []
    for i, row in enumerate(rows_ub):
        r = expand_row(row) + [zero] * m_ub
        r[cols + i] = one
        std_rows.append(r)
        std_rhs.append(rhs_ub[i])
    for i, row in enumerate(rows_eq):
        std_rows.append(expand_row(row) + [zero] * m_ub)
        std_rhs.append(rhs_eq[i])
    for i in range(m):
        if std_rhs[i] < 0:
            std_rows[i] = [-v for v in std_rows[i]]
            std_rhs[i] = -std_rhs[i]

    obj_full = obj + [zero] * m_ub

    if exact:
        status, x_std, fun = _simplex_exact(std_rows, std_rhs, obj_full, ncols)
    else:
        status, x_std, fun = _simplex_float(std_rows, std_rhs, obj_full, ncols)
    if status != "optimal":
        return LPResult(status=status)

    # reconstruct free variables from their split parts
    x = list(x_std[:n])
    for k, j in enumerate(free_vars):
        x[j] = x_std[j] - x_std[n + k]
    if maximize:
        fun = -fun
    if not exact:
        x = np.array(x, dtype=float)
        fun = float(fun)
    return LPResult(status="optimal", x=x, fun=fun)


# -- float engine ---------------------------------------------------------------


def _simplex_float(rows, rhs, obj, ncols):
    m = len(rows)
    if m == 0:
        if any(v < -FLOAT_TOL for v in obj):
            return "unbounded", None, None
        return "optimal", [0.0] * ncols, 0.0
    A0 = np.array(rows, dtype=float)
    b0 = np.array(rhs, dtype=float)

    # tableau with artificials; two cost rows (phase 2 above phase 1)
    T = np.zeros((m + 2, ncols + m + 1))
    T[:m, :ncols] = A0
    T[:m, ncols : ncols + m] = np.eye(m)
    T[:m, -1] = b0
    T[m, :ncols] = np.asarray(obj, dtype=float)
    T[m + 1, ncols : ncols + m] = 1.0
    basis = list(range(ncols, ncols + m))
    # price out artificials from the phase-1 row
    T[m + 1, :] -= T[:m, :].sum(axis=0)

    status = _run_float(T, basis, m, ncols + m, phase_row=m + 1)
    if status != "optimal":
        return status, None, None
    if T[m + 1, -1] < -1e-7:
        return "infeasible", None, None

    # drive remaining artificial basics out or delete their rows
    for i in range(m):
        if basis[i] >= ncols:
            row = T[i, :ncols]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > FLOAT_TOL:
                _pivot_float(T, i, j, basis)
    # forbid artificials from re-entering
    T[:, ncols : ncols + m] = 0.0

    status = _run_float(T, basis, m, ncols, phase_row=m)
    if status != "optimal":
        return status, None, None

    x = np.zeros(ncols)
    for i, bj in enumerate(basis):
        if bj < ncols:
            x[bj] = T[i, -1]
    # refinement: resolve the basic system at the final basis
    cols_idx = [bj for bj in basis if bj < ncols]
    if cols_idx:
        B = A0[:, cols_idx]
        sol, *_ = np.linalg.lstsq(B, b0, rcond=None)
        scale = 1.0 + float(np.abs(b0).max(initial=0.0))
        resid = float(np.abs(B @ sol - b0).max(initial=0.0))
        if np.all(sol > -1e-7) and resid <= 1e-9 * scale:
            x[:] = 0.0
            for k, bj in enumerate(cols_idx):
                x[bj] = max(sol[k], 0.0)
    fun = float(np.dot(np.asarray(obj, dtype=float), x))
    return "optimal", list(x), fun


def _pivot_float(T, row, col, basis):
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])
    basis[row] = col


def _run_float(T, basis, m, limit_col, phase_row):
    it = 0
    while True:
        it += 1
        if it > MAX_PIVOTS:
            raise RuntimeError("simplex exceeded pivot limit")
        costs = T[phase_row, :limit_col]
        if it <= BLAND_AFTER:
            j = int(np.argmin(costs))
            if costs[j] >= -FLOAT_TOL:
                return "optimal"
        else:  # Bland
            neg = np.nonzero(costs < -FLOAT_TOL)[0]
            if neg.size == 0:
                return "optimal"
            j = int(neg[0])
        col = T[:m, j]
        mask = col > FLOAT_TOL
        if not mask.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[mask] = T[:m, -1][mask] / col[mask]
        r = int(np.argmin(ratios))
        if it > BLAND_AFTER:
            best = ratios[r]
            ties = [i for i in range(m) if mask[i] and ratios[i] <= best + 1e-12]
            r = min(ties, key=lambda i: basis[i])
        _pivot_float(T, r, j, basis)


# -- exact engine ----------------------------------------------------------------


def _simplex_exact(rows, rhs, obj, ncols):
    m = len(rows)
    zero, one = Fraction(0), Fraction(1)
    if m == 0:
        if any(v < 0 for v in obj):
            return "unbounded", None, None
        return "optimal", [zero] * ncols, zero
    width = ncols + m + 1
    T = []
    for i in range(m):
        row = list(rows[i]) + [zero] * m + [rhs[i]]
        row[ncols + i] = one
        T.append(row)
    cost2 = list(obj) + [zero] * m + [zero]
    cost1 = [zero] * ncols + [one] * m + [zero]
    for i in range(m):
        cost1 = [a - b for a, b in zip(cost1, T[i])]
    T.append(cost2)
    T.append(cost1)
    basis = list(range(ncols, ncols + m))

    status = _run_exact(T, basis, m, ncols + m, phase_row=m + 1)
    if status != "optimal":
        return status, None, None
    if T[m + 1][-1] < 0:
        return "infeasible", None, None
    for i in range(m):
        if basis[i] >= ncols:
            piv = None
            for j in range(ncols):
                if T[i][j] != 0:
                    piv = j
                    break
            if piv is not None:
                _pivot_exact(T, i, piv, basis)
    for row in T:
        for j in range(ncols, ncols + m):
            row[j] = zero

    status = _run_exact(T, basis, m, ncols, phase_row=m)
    if status != "optimal":
        return status, None, None
    x = [zero] * ncols
    for i, bj in enumerate(basis):
        if bj < ncols:
            x[bj] = T[i][-1]
    fun = sum((o * v for o, v in zip(obj, x)), zero)
    return "optimal", x, fun


def _pivot_exact(T, row, col, basis):
    piv = T[row][col]
    T[row] = [v / piv for v in T[row]]
    for i in range(len(T)):
        if i != row and T[i][col] != 0:
            f = T[i][col]
            T[i] = [a - f * b for a, b in zip(T[i], T[row])]
    basis[row] = col


def _run_exact(T, basis, m, limit_col, phase_row):
    it = 0
    while True:
        it += 1
        if it > MAX_PIVOTS:
            raise RuntimeError("exact simplex exceeded pivot limit")
        j = None
        for k in range(limit_col):  # Bland: first negative reduced cost
            if T[phase_row][k] < 0:
                j = k
                break
        if j is None:
            return "optimal"
        r = None
        best = None
        for i in range(m):
            if T[i][j] > 0:
                ratio = T[i][-1] / T[i][j]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[r]
                ):
                    best, r = ratio, i
        if r is None:
            return "unbounded"
        _pivot_exact(T, r, j, basis)
