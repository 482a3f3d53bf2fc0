"""Small exact linear algebra helpers over ``fractions.Fraction``.

Used by the rational ("certified") code paths: region matrix inversion,
rational-function interpolation, and affine minimization inside the
min-norm-point solver.  Everything works on nested lists of Fractions.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["rat_solve", "rat_inv", "rat_matvec", "rat_dot"]


def rat_dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def rat_matvec(mat, v):
    return [rat_dot(row, v) for row in mat]


def rat_solve(mat, rhs):
    """Solve ``mat @ x = rhs`` exactly by Gaussian elimination.

    Returns a particular solution (free variables set to 0) when the system
    is consistent, or ``None`` when it is inconsistent.  ``mat`` need not be
    square or full rank.
    """
    m = len(mat)
    if m == 0:
        return []
    n = len(mat[0])
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(mat)]
    pivots: list[tuple[int, int]] = []
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, m):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = Fraction(1) / a[row][col]
        a[row] = [x * inv for x in a[row]]
        for r in range(m):
            if r != row and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[row])]
        pivots.append((row, col))
        row += 1
        if row == m:
            break
    for r in range(row, m):
        if a[r][n] != 0:
            return None
    x = [Fraction(0)] * n
    for r, c in pivots:
        x[c] = a[r][n]
    return x


def rat_inv(mat):
    """Exact inverse of a square rational matrix.

    Raises ``ZeroDivisionError`` on singular input.
    """
    k = len(mat)
    a = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(k)]
        for i, row in enumerate(mat)
    ]
    for col in range(k):
        piv = None
        for r in range(col, k):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            raise ZeroDivisionError("singular rational matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(k):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [row[k:] for row in a]
