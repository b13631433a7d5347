"""Exact two-phase simplex over ``fractions.Fraction``.

Bland's rule throughout, so it terminates on degenerate problems.  Sizes in
this package are tiny (tens of variables) and dense tableaux are fine.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _pivot(rows, obj, basis, r, j):
    piv = rows[r][j]
    rows[r] = [v / piv for v in rows[r]]
    pr = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[j] != 0:
            f = row[j]
            rows[i] = [a - f * b for a, b in zip(row, pr)]
    if obj[j] != 0:
        f = obj[j]
        obj[:] = [a - f * b for a, b in zip(obj, pr)]
    basis[r] = j


def _run(rows, obj, basis, allowed):
    ncols = len(obj) - 1
    while True:
        j = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if j is None:
            return OPTIMAL
        cand = [i for i, row in enumerate(rows) if row[j] > 0]
        if not cand:
            return UNBOUNDED
        r = min(cand, key=lambda i: (rows[i][-1] / rows[i][j], basis[i]))
        _pivot(rows, obj, basis, r, j)


def linprog(
    c: Sequence,
    a_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    a_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    free: Sequence[int] = (),
):
    """Minimise ``c.x`` subject to ``a_eq x = b_eq``, ``a_ub x <= b_ub``.

    Variables are nonnegative except those listed in ``free``.

    Returns
    -------
    status : str
        ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
    x : list of Fraction or None
    value : Fraction or None
    """
    n = len(c)
    free = sorted(set(free))
    # free variables split as x = x+ - x-, the x- columns appended after x
    ncore = n + len(free)

    def expand(row):
        row = [Fraction(v) for v in row]
        return row + [-row[k] for k in free]

    cons = [(expand(r), Fraction(b)) for r, b in zip(a_eq, b_eq)]
    n_slack = len(a_ub)
    for k, (r, b) in enumerate(zip(a_ub, b_ub)):
        row = expand(r) + [Fraction(0)] * n_slack
        row[ncore + k] = Fraction(1)
        cons.append((row, Fraction(b)))
    width = ncore + n_slack
    cons = [(r + [Fraction(0)] * (width - len(r)), b) for r, b in cons]
    m = len(cons)
    rows = []
    for i, (r, b) in enumerate(cons):
        if b < 0:
            r, b = [-v for v in r], -b
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append(r + art + [b])
    total = width + m
    basis = [width + i for i in range(m)]

    obj = [Fraction(0)] * width + [Fraction(1)] * m + [Fraction(0)]
    for row in rows:
        obj = [a - b for a, b in zip(obj, row)]
    for j in range(width, total):
        obj[j] = Fraction(0)
    _run(rows, obj, basis, [True] * width + [False] * m)
    if -obj[-1] != 0:
        return INFEASIBLE, None, None

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= width:
            j = next((j for j in range(width) if rows[i][j] != 0), None)
            if j is None:
                continue
            _pivot(rows, [Fraction(0)] * (total + 1), basis, i, j)
        keep.append(i)
    rows = [rows[i] for i in keep]
    basis = [basis[i] for i in keep]

    cost = expand(list(c)) + [Fraction(0)] * (total - ncore)
    obj = cost + [Fraction(0)]
    for i, row in enumerate(rows):
        f = obj[basis[i]]
        if f != 0:
            obj = [a - f * b for a, b in zip(obj, row)]
    status = _run(rows, obj, basis, [True] * width + [False] * m)
    if status == UNBOUNDED:
        return UNBOUNDED, None, None
    sol = [Fraction(0)] * total
    for i, b in enumerate(basis):
        sol[b] = rows[i][-1]
    x = sol[:n]
    for k, idx in enumerate(free):
        x[idx] -= sol[n + k]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return OPTIMAL, x, value


def rank(matrix: Sequence[Sequence]) -> int:
    """Exact rank by fraction-valued Gaussian elimination."""
    rows = [[Fraction(v) for v in r] for r in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        for i in range(rk + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / rows[rk][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rk])]
        rk += 1
    return rk
