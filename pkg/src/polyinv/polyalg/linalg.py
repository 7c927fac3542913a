"""Dense linear algebra over Q and over Z/p.

Matrices are plain row-major lists of lists.  Rational matrices hold
Fractions (ints are accepted); modular matrices hold ints in [0, p).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import List, Sequence

Matrix = List[list]


def _integer_row(row):
    den = 1
    for v in row:
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    return [int(Fraction(v) * den) for v in row]


def _primitive(row):
    g = 0
    for v in row:
        if v:
            g = gcd(g, v)
            if g == 1:
                return row
    if g > 1:
        return [v // g for v in row]
    return row


def _gauss_jordan_integer(L, ncols):
    """Fraction-free Gauss-Jordan; returns (rows, pivot_columns).

    Every pivot column has exactly one nonzero entry among the returned rows.
    """
    A = [_primitive(_integer_row(r)) for r in L]
    A = [r for r in A if any(r)]
    pivots = []
    rank = 0
    for c in range(ncols):
        best = None
        for i in range(rank, len(A)):
            v = A[i][c]
            if v and (best is None or abs(v) < abs(A[best][c])):
                best = i
                if abs(v) == 1:
                    break
        if best is None:
            continue
        A[rank], A[best] = A[best], A[rank]
        prow = A[rank]
        pv = prow[c]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                g = gcd(pv, f)
                a, b = pv // g, f // g
                A[i] = _primitive([a * x - b * y for x, y in zip(A[i], prow)])
        pivots.append(c)
        rank += 1
        if rank == len(A):
            break
    return A[:rank], pivots


def rank(L: Sequence[Sequence], ncols: int = None) -> int:
    if not L:
        return 0
    ncols = len(L[0]) if ncols is None else ncols
    return len(_gauss_jordan_integer(L, ncols)[1])


def rref(rows: Sequence[Sequence]) -> Matrix:
    """Reduced row-echelon form over Q with zero rows dropped."""
    if not rows:
        return []
    ncols = len(rows[0])
    A, pivots = _gauss_jordan_integer(rows, ncols)
    out = []
    for r, c in zip(A, pivots):
        pv = r[c]
        out.append([Fraction(v, pv) for v in r])
    return out


def nullspace_echelon(L: Sequence[Sequence], ncols: int = None) -> Matrix:
    """Basis of {v : L v^T = 0} over Q in reduced row-echelon form.

    The rows have leading coefficient 1, so the result is canonical for the
    null space.  ``ncols`` must be given when ``L`` has no rows.
    """
    if ncols is None:
        if not L:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(L[0])
    for r in L:
        if len(r) != ncols:
            raise ValueError("matrix is not rectangular")
    A, pivots = _gauss_jordan_integer(L, ncols) if L else ([], [])
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(A, pivots):
            if row[f]:
                v[pc] = Fraction(-row[f], row[pc])
        basis.append(v)
    return rref(basis) if basis else []


def matvec_is_zero(L: Sequence[Sequence], v: Sequence) -> bool:
    return all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in L)


# ---------------------------------------------------------------------------
# Z/p
# ---------------------------------------------------------------------------

def rref_mod(rows: Sequence[Sequence[int]], p: int, ncols: int = None):
    """Reduced row-echelon form over Z/p; returns (rows, pivot_columns)."""
    if not rows:
        return [], []
    ncols = len(rows[0]) if ncols is None else ncols
    A = [[v % p for v in r] for r in rows]
    pivots = []
    rk = 0
    for c in range(ncols):
        piv = None
        for i in range(rk, len(A)):
            if A[i][c]:
                piv = i
                break
        if piv is None:
            continue
        A[rk], A[piv] = A[piv], A[rk]
        inv = pow(A[rk][c], -1, p)
        prow = [v * inv % p for v in A[rk]]
        A[rk] = prow
        for i in range(len(A)):
            if i != rk:
                f = A[i][c]
                if f:
                    A[i] = [(x - f * y) % p for x, y in zip(A[i], prow)]
        pivots.append(c)
        rk += 1
        if rk == len(A):
            break
    return A[:rk], pivots


def nullspace_echelon_mod(L: Sequence[Sequence[int]], p: int, ncols: int = None) -> Matrix:
    """Basis of the null space of ``L`` over Z/p in reduced row-echelon form."""
    if ncols is None:
        if not L:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(L[0])
    A, pivots = rref_mod(L, p, ncols) if L else ([], [])
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(A, pivots):
            if row[f]:
                v[pc] = -row[f] % p
        basis.append(v)
    if not basis:
        return []
    return rref_mod(basis, p, ncols)[0]


def rank_mod(L: Sequence[Sequence[int]], p: int) -> int:
    return len(rref_mod(L, p)[1])


def pivot_columns(rows: Sequence[Sequence]) -> tuple:
    out = []
    for r in rows:
        for j, v in enumerate(r):
            if v:
                out.append(j)
                break
    return tuple(out)


def rowspace_equal(a: Sequence[Sequence], b: Sequence[Sequence], ncols: int) -> bool:
    """Whether two rational row sets span the same subspace of Q^ncols."""
    ra, rb = rank(a, ncols) if a else 0, rank(b, ncols) if b else 0
    if ra != rb:
        return False
    both = list(a) + list(b)
    return (rank(both, ncols) if both else 0) == ra
