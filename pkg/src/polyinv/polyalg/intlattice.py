"""Integer row lattices: Hermite normal form and integer kernels."""

from __future__ import annotations

from typing import List, Sequence

IntMatrix = List[List[int]]


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style HNF of the lattice spanned by ``rows``, zero rows dropped.

    Pivots are positive, move strictly right going down, and entries above a
    pivot lie in [0, pivot).  Only unimodular row operations are used, so the
    result spans the same lattice.
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    if any(len(r) != ncols for r in a):
        raise ValueError("rows of unequal length")
    top = 0
    for col in range(ncols):
        if top == len(a):
            break
        # Euclid on the column until a single nonzero entry remains at ``top``
        while True:
            live = [i for i in range(top, len(a)) if a[i][col]]
            if not live:
                break
            i_min = min(live, key=lambda i: abs(a[i][col]))
            a[top], a[i_min] = a[i_min], a[top]
            p = a[top][col]
            done = True
            for i in range(top + 1, len(a)):
                q = a[i][col] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
                if a[i][col]:
                    done = False
            if done:
                break
        if not a[top][col]:
            continue
        if a[top][col] < 0:
            a[top] = [-x for x in a[top]]
        p = a[top][col]
        for i in range(top):
            q = a[i][col] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[top])]
        top += 1
    return [r for r in a[:top]]


def integer_kernel(matrix: Sequence[Sequence[int]], ncols: int = None) -> IntMatrix:
    """A Z-basis (in HNF) of {x in Z^n : matrix . x = 0}."""
    m = [list(map(int, r)) for r in matrix]
    n = len(m[0]) if m else ncols
    if n is None:
        raise ValueError("ncols is required for an empty matrix")
    if any(len(r) != n for r in m):
        raise ValueError("rows of unequal length")
    if not m:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    # row i of the augmented matrix is (column i of ``matrix`` | e_i)
    aug = [[m[r][i] for r in range(len(m))] + [int(i == j) for j in range(n)] for i in range(n)]
    h = hermite_normal_form(aug)
    left = len(m)
    kernel = [r[left:] for r in h if not any(r[:left])]
    return hermite_normal_form(kernel)


def lattice_rank(rows: Sequence[Sequence[int]]) -> int:
    return len(hermite_normal_form(rows))
