"""Exact integer and rational linear algebra used across the package.

Everything works on plain lists of ints or Fractions; matrices are row lists.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[int, ...]


def hnf(rows: Iterable[Sequence[int]], ncols: int | None = None) -> list[Vector]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Returned rows are nonzero, pivot columns strictly increase, pivots are
    positive and entries above a pivot lie in ``[0, pivot)``.
    """
    mat = [list(map(int, r)) for r in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    for r in mat:
        if len(r) != ncols:
            raise ValueError("ragged matrix")
    mat = [r for r in mat if any(r)]
    out_row = 0
    pivots: list[tuple[int, int]] = []
    for col in range(ncols):
        if out_row >= len(mat):
            break
        while True:
            nz = [i for i in range(out_row, len(mat)) if mat[i][col] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: abs(mat[i][col]))
            mat[out_row], mat[best] = mat[best], mat[out_row]
            piv = mat[out_row][col]
            done = True
            for i in range(out_row + 1, len(mat)):
                if mat[i][col]:
                    q = mat[i][col] // piv
                    mat[i] = [a - q * b for a, b in zip(mat[i], mat[out_row])]
                    if mat[i][col]:
                        done = False
            if done:
                break
        if out_row < len(mat) and mat[out_row][col] != 0:
            if mat[out_row][col] < 0:
                mat[out_row] = [-a for a in mat[out_row]]
            pivots.append((out_row, col))
            out_row += 1
    mat = mat[:out_row]
    for r, col in pivots:
        piv = mat[r][col]
        for i in range(r):
            q = mat[i][col] // piv
            if q:
                mat[i] = [a - q * b for a, b in zip(mat[i], mat[r])]
    return [tuple(r) for r in mat]


def pivot_columns(basis: Sequence[Sequence[int]]) -> list[int]:
    cols = []
    for row in basis:
        cols.append(next(i for i, a in enumerate(row) if a))
    return cols


def reduce_vector(v: Sequence[int], basis: Sequence[Sequence[int]]) -> Vector:
    """Canonical coset representative of ``v`` modulo an HNF basis."""
    out = list(v)
    for row in basis:
        col = next(i for i, a in enumerate(row) if a)
        q = out[col] // row[col]
        if q:
            out = [a - q * b for a, b in zip(out, row)]
    return tuple(out)


def in_lattice(v: Sequence[int], basis: Sequence[Sequence[int]]) -> bool:
    return not any(reduce_vector(v, basis))


def smith_invariants(rows: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix."""
    mat = [list(map(int, r)) for r in rows if any(r)]
    if not mat:
        return []
    m, n = len(mat), len(mat[0])
    diag = []
    t = 0
    while t < min(m, n):
        entries = [(abs(mat[i][j]), i, j) for i in range(t, m) for j in range(t, n) if mat[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        mat[t], mat[pi] = mat[pi], mat[t]
        for row in mat:
            row[t], row[pj] = row[pj], row[t]
        while True:
            piv = mat[t][t]
            clean = True
            for i in range(t + 1, m):
                q = mat[i][t] // piv
                if q:
                    mat[i] = [a - q * b for a, b in zip(mat[i], mat[t])]
                if mat[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = mat[t][j] // piv
                if q:
                    for row in mat:
                        row[j] -= q * row[t]
                if mat[t][j]:
                    clean = False
            if clean:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if mat[i][j] % piv), None)
                if bad is None:
                    break
                mat[t] = [a + b for a, b in zip(mat[t], mat[bad[0]])]
                continue
            entries = [(abs(mat[i][t]), i, t) for i in range(t, m) if mat[i][t]]
            entries += [(abs(mat[t][j]), t, j) for j in range(t, n) if mat[t][j]]
            _, pi, pj = min(entries)
            mat[t], mat[pi] = mat[pi], mat[t]
            for row in mat:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(mat[t][t]))
        t += 1
    return diag


def rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q by Gaussian elimination on Fractions."""
    mat = [[Fraction(a) for a in r] for r in rows]
    if not mat:
        return 0
    n = len(mat[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][col]
        for i in range(r + 1, len(mat)):
            if mat[i][col]:
                f = mat[i][col] * inv
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    return r


def det(rows: Sequence[Sequence]) -> Fraction:
    mat = [[Fraction(a) for a in r] for r in rows]
    n = len(mat)
    if any(len(r) != n for r in mat):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    result = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if mat[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            sign = -sign
        p = mat[col][col]
        result *= p
        for i in range(col + 1, n):
            if mat[i][col]:
                f = mat[i][col] / p
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
    return sign * result


def solve(a_rows: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve the square system A y = b exactly; raises on singular A."""
    n = len(a_rows)
    mat = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(a_rows, b)]
    for col in range(n):
        piv = next((i for i in range(col, n) if mat[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for i in range(n):
            if i != col and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[col])]
    return [row[n] for row in mat]


def transpose(rows: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*rows)]


class DegreeSolver:
    """Express vectors in the span of fixed independent rows, exactly.

    Rows are sparse dicts ``{key: coefficient}``.  ``coordinates(v)`` returns
    the unique coefficients or raises ``ValueError`` when ``v`` is outside the
    span.
    """

    def __init__(self, rows: Sequence[dict]):
        self.size = len(rows)
        # echelon form that remembers the combination of original rows
        self._echelon: list[tuple[object, dict, list[Fraction]]] = []
        for idx, row in enumerate(rows):
            vec = {k: Fraction(v) for k, v in row.items() if v}
            combo = [Fraction(0)] * self.size
            combo[idx] = Fraction(1)
            vec, combo = self._reduce(vec, combo)
            if not vec:
                raise ValueError("rows are linearly dependent")
            key = min(vec)
            self._echelon.append((key, vec, combo))

    def _reduce(self, vec: dict, combo: list[Fraction]):
        for key, evec, ecombo in self._echelon:
            c = vec.get(key)
            if c:
                f = c / evec[key]
                for k, v in evec.items():
                    nv = vec.get(k, 0) - f * v
                    if nv:
                        vec[k] = nv
                    else:
                        vec.pop(k, None)
                combo = [a - f * b for a, b in zip(combo, ecombo)]
        return vec, combo

    def coordinates(self, target: dict) -> list[Fraction]:
        vec = {k: Fraction(v) for k, v in target.items() if v}
        combo = [Fraction(0)] * self.size
        vec, combo = self._reduce(vec, combo)
        if vec:
            raise ValueError("vector outside the span")
        return [-c for c in combo]
