"""
Independent reference computations for the linear algebra tests.

Nothing here imports the toolkit's Smith normal form.
"""

import itertools
import math
from typing import List, Optional, Sequence, Tuple


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant with row swaps."""
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def gcd_of_minors(matrix: Sequence[Sequence[int]], k: int) -> int:
    """gcd of all k x k minors (0 when every minor vanishes)."""
    rows, cols = len(matrix), len(matrix[0]) if matrix else 0
    g = 0
    for row_set in itertools.combinations(range(rows), k):
        for col_set in itertools.combinations(range(cols), k):
            minor = [[matrix[i][j] for j in col_set] for i in row_set]
            g = math.gcd(g, bareiss_det(minor))
            if g == 1:
                return 1
    return g


def lattice_basis(columns: Sequence[Sequence[int]], dim: int) -> List[Tuple[int, List[int]]]:
    """Echelon basis (pivot row, vector) of the lattice spanned by the columns."""
    vectors = [list(c) for c in columns if any(c)]
    basis = []
    for i in range(dim):
        while True:
            hits = sorted((v for v in vectors if v[i] != 0), key=lambda v: abs(v[i]))
            if len(hits) <= 1:
                break
            pivot = hits[0]
            for v in hits[1:]:
                factor = v[i] // pivot[i]
                for r in range(dim):
                    v[r] -= factor * pivot[r]
            vectors = [v for v in vectors if any(v)]
        hits = [v for v in vectors if v[i] != 0]
        if hits:
            pivot = hits[0]
            basis.append((i, pivot))
            vectors = [v for v in vectors if v is not pivot]
    return basis


def in_lattice(basis: List[Tuple[int, List[int]]], target: Sequence[int]) -> bool:
    t = list(target)
    for i, vector in basis:
        if t[i] % vector[i]:
            return False
        factor = t[i] // vector[i]
        for r in range(len(t)):
            t[r] -= factor * vector[r]
    return not any(t)


def brute_force_order(matrix: Sequence[Sequence[int]], vector: Sequence[int], limit: int = 200) -> Optional[int]:
    """Least k <= limit with k * vector in the column span, else None."""
    rows = len(matrix)
    columns = [[matrix[i][j] for i in range(rows)] for j in range(len(matrix[0]))] if rows else []
    basis = lattice_basis(columns, rows)
    for k in range(1, limit + 1):
        if in_lattice(basis, [k * x for x in vector]):
            return k
    return None
