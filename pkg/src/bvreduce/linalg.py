"""Exact dense linear algebra over Q(i) via fraction-free (Bareiss) elimination.

Scalar matrices are cleared to Gaussian integers row by row, then eliminated
with the one-step Bareiss recurrence, whose divisions are exact in any
integral domain.  Everything stays in big integers until a single division at
the end, which keeps intermediate entries at minor-determinant size instead of
letting rational numerators blow up.
"""
from __future__ import annotations

from math import lcm

from .errors import SingularMatrix
from .scalars import Scalar, q

# A Gaussian integer is an (a, b) pair meaning a + b*i.
GInt = tuple[int, int]

_G0: GInt = (0, 0)
_G1: GInt = (1, 0)


def _gmul(x: GInt, y: GInt) -> GInt:
    a, b = x
    c, d = y
    if b == 0:
        if d == 0:
            return (a * c, 0)
        return (a * c, a * d)
    if d == 0:
        return (a * c, b * c)
    return (a * c - b * d, a * d + b * c)


def _gsub(x: GInt, y: GInt) -> GInt:
    return (x[0] - y[0], x[1] - y[1])


def _gdiv_exact(x: GInt, y: GInt) -> GInt:
    # x * conj(y) / |y|^2; the Bareiss recurrence guarantees exactness
    a, b = x
    c, d = y
    n = c * c + d * d
    re = a * c + b * d
    im = b * c - a * d
    qr, rr = divmod(re, n)
    qi, ri = divmod(im, n)
    if rr or ri:
        raise ArithmeticError("inexact division in fraction-free elimination")
    return (qr, qi)


def _clear_row(row: list[Scalar]) -> list[GInt]:
    """Scale a Scalar row by the lcm of its denominators; rank and kernels are unchanged."""
    den = 1
    for s in row:
        den = lcm(den, int(s.re.denominator), int(s.im.denominator))
    return [(int(s.re * den), int(s.im * den)) for s in row]


def _forward_eliminate(m: list[list[GInt]], ncols: int | None = None):
    """In-place fraction-free row echelon; returns the pivot (row, col) list.

    Only the first `ncols` columns are searched for pivots; any further
    columns ride along as an augmented block.
    """
    rows = len(m)
    width = len(m[0]) if rows else 0
    if ncols is None:
        ncols = width
    pivots: list[tuple[int, int]] = []
    prev: GInt = _G1
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, rows) if m[i][c] != _G0), None)
        if pr is None:
            continue
        if pr != r:
            m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        for i in range(r + 1, rows):
            mic = m[i][c]
            row_i = m[i]
            row_r = m[r]
            if mic == _G0:
                if prev != _G1:
                    for j in range(c + 1, width):
                        row_i[j] = _gdiv_exact(_gmul(piv, row_i[j]), prev)
                else:
                    for j in range(c + 1, width):
                        row_i[j] = _gmul(piv, row_i[j])
            else:
                for j in range(c + 1, width):
                    row_i[j] = _gdiv_exact(
                        _gsub(_gmul(piv, row_i[j]), _gmul(mic, row_r[j])), prev
                    )
            row_i[c] = _G0
        pivots.append((r, c))
        prev = piv
        r += 1
        if r == rows:
            break
    return pivots


def rank(rows: list[list[Scalar]]) -> int:
    """Exact rank of a rectangular Scalar matrix."""
    if not rows:
        return 0
    m = [_clear_row(row) for row in rows]
    return len(_forward_eliminate(m))


def solve_square(a: list[list[Scalar]], rhs_cols: list[list[Scalar]]) -> list[list[Scalar]]:
    """Solve A X = B for square A; columns of B are given as rhs_cols.

    Raises SingularMatrix when A is rank-deficient.  Back-substitution runs in
    exact rational arithmetic on the Bareiss echelon form.
    """
    k = len(a)
    if k == 0:
        return [[] for _ in rhs_cols]
    ncols = len(rhs_cols)
    aug_scalar = [list(a[i]) + [col[i] for col in rhs_cols] for i in range(k)]
    m = [_clear_row(row) for row in aug_scalar]
    pivots = _forward_eliminate(m, ncols=k)
    if len(pivots) < k:
        raise SingularMatrix(f"matrix of size {k} has rank {len(pivots)}")
    sols: list[list[Scalar]] = []
    gs = [[Scalar(q(int(v[0])), q(int(v[1]))) for v in row] for row in m]
    for t in range(ncols):
        x: list[Scalar] = [Scalar(0)] * k
        for i in range(k - 1, -1, -1):
            acc = gs[i][k + t]
            row = gs[i]
            for j in range(i + 1, k):
                xj = x[j]
                if xj:
                    acc = acc - row[j] * xj
            x[i] = acc / row[i]
        sols.append(x)
    return sols


def invert(a: list[list[Scalar]]) -> list[list[Scalar]]:
    """Exact inverse of a square Scalar matrix (rows of the inverse)."""
    k = len(a)
    eye = [[Scalar(1) if i == j else Scalar(0) for i in range(k)] for j in range(k)]
    cols = solve_square(a, eye)
    # cols[j] is the j-th column of the inverse
    return [[cols[j][i] for j in range(k)] for i in range(k)]


def particular_solution(a: list[list[Scalar]], rhs: list[Scalar]) -> list[Scalar] | None:
    """Some exact solution of A x = rhs with free variables set to zero, or None."""
    rows = len(a)
    if rows == 0:
        return []
    k = len(a[0])
    m = [_clear_row(list(a[i]) + [rhs[i]]) for i in range(rows)]
    pivots = _forward_eliminate(m, ncols=k)
    gs = [[Scalar(q(int(v[0])), q(int(v[1]))) for v in row] for row in m]
    piv_rows = {r for r, _ in pivots}
    for i in range(rows):
        if i not in piv_rows and gs[i][k]:
            return None
    x = [Scalar(0)] * k
    for r, c in reversed(pivots):
        acc = gs[r][k]
        row = gs[r]
        for j in range(c + 1, k):
            if x[j]:
                acc = acc - row[j] * x[j]
        x[c] = acc / row[c]
    return x
