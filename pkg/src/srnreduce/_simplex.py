"""Exact rational phase-1 simplex for ``A x = b, x >= 0`` feasibility."""
from fractions import Fraction


def _pivot(tab, row, col):
    p = tab[row][col]
    tab[row] = [v / p for v in tab[row]]
    for i, other in enumerate(tab):
        if i != row and other[col] != 0:
            f = other[col]
            tab[i] = [a - f * b for a, b in zip(other, tab[row])]


def feasible_point(A, b):
    """Find ``x >= 0`` with ``A x = b`` in exact rational arithmetic.

    Returns ``(x, None)`` when feasible, or ``(None, y)`` with a Farkas
    certificate ``y`` satisfying ``y^T A <= 0`` and ``y^T b > 0`` otherwise.
    Bland's rule guarantees termination.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n, None
    sign = [1 if Fraction(bi) >= 0 else -1 for bi in b]
    # tableau columns: n original, m artificial, rhs
    tab = []
    for i in range(m):
        row = [Fraction(sign[i]) * Fraction(a) for a in A[i]]
        row += [Fraction(1 if j == i else 0) for j in range(m)]
        row.append(Fraction(sign[i]) * Fraction(b[i]))
        tab.append(row)
    basis = list(range(n, n + m))
    cost = [Fraction(0)] * n + [Fraction(1)] * m

    while True:
        # reduced costs c_j - c_B^T B^{-1} A_j, read off the tableau
        entering = None
        for j in range(n + m):
            if j in basis:
                continue
            rc = cost[j] - sum(cost[basis[i]] * tab[i][j] for i in range(m))
            if rc < 0:
                entering = j
                break
        if entering is None:
            break
        best = None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded cannot happen in phase 1
            break
        _pivot(tab, best[1], entering)
        basis[best[1]] = entering

    objective = sum(tab[i][-1] for i in range(m) if basis[i] >= n)
    if objective == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = tab[i][-1]
        return x, None
    # simplex multipliers y = c_B^T B^{-1}; B^{-1} sits in the artificial columns
    y = []
    for k in range(m):
        y.append(sum(cost[basis[i]] * tab[i][n + k] for i in range(m)))
    return None, [Fraction(sign[k]) * y[k] for k in range(m)]
