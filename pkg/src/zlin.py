"""
Exact integer linear algebra.

Smith normal form over Python integers (arbitrary precision), cokernels
as finitely generated abelian groups, element orders in a cokernel, and a
modular rank precheck. No floating point is used anywhere in this module.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import numpy as np
from sympy import factorint
from src.config import get_settings
from src.errors import DomainError, InternalConsistencyError
from src.logger import get_logger

logger = get_logger(__name__)


class IntegerMatrix:
    """Sparse integer matrix, {(i, j): value} with zeros dropped."""

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], int]] = None):
        if rows < 0 or cols < 0:
            raise DomainError(f"matrix dimensions must be non-negative, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Tuple[int, int], int] = {}
        for (i, j), value in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise DomainError(f"entry ({i}, {j}) outside {rows}x{cols}")
            if value:
                self.entries[(i, j)] = int(value)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntegerMatrix":
        n_cols = cols if cols is not None else (len(rows[0]) if rows else 0)
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise DomainError("ragged rows")
            for j, value in enumerate(row):
                if value:
                    entries[(i, j)] = int(value)
        return cls(len(rows), n_cols, entries)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "IntegerMatrix":
        rows, cols = array.shape
        return cls(rows, cols, {(int(i), int(j)): int(array[i, j]) for i, j in zip(*np.nonzero(array))})

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def hstack(cls, blocks: Sequence["IntegerMatrix"]) -> "IntegerMatrix":
        rows = blocks[0].rows
        entries = {}
        offset = 0
        for block in blocks:
            if block.rows != rows:
                raise DomainError("hstack blocks need equal row counts")
            for (i, j), value in block.entries.items():
                entries[(i, j + offset)] = value
            offset += block.cols
        return cls(rows, offset, entries)

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def __sub__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DomainError("dimension mismatch in subtraction")
        entries = dict(self.entries)
        for key, value in other.entries.items():
            entries[key] = entries.get(key, 0) - value
        return IntegerMatrix(self.rows, self.cols, entries)

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise DomainError("dimension mismatch in product")
        by_row: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
        for (k, j), value in other.entries.items():
            by_row[k].append((j, value))
        entries: Dict[Tuple[int, int], int] = defaultdict(int)
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                entries[(i, j)] += a * b
        return IntegerMatrix(self.rows, other.cols, entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def to_rows(self) -> List[List[int]]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), value in self.entries.items():
            dense[i][j] = value
        return dense

    def row_dicts(self) -> List[Dict[int, int]]:
        rows: List[Dict[int, int]] = [dict() for _ in range(self.rows)]
        for (i, j), value in self.entries.items():
            rows[i][j] = value
        return rows

    def density(self) -> float:
        cells = self.rows * self.cols
        return len(self.entries) / cells if cells else 0.0

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


@dataclass(frozen=True)
class SmithDecomposition:
    """U X V = diag(d_1, ..., d_r, 0, ...) with d_1 | d_2 | ... | d_r, all d_i >= 1."""

    rows: int
    cols: int
    invariant_factors: Tuple[int, ...]
    U: Optional[IntegerMatrix] = None
    V: Optional[IntegerMatrix] = None

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def diagonal(self) -> IntegerMatrix:
        return IntegerMatrix(self.rows, self.cols, {(i, i): d for i, d in enumerate(self.invariant_factors)})


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------

def _identity_rows(n: int) -> List[List[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _dense_snf(a: List[List[int]], m: int, n: int, track: bool):
    """
    In-place Smith reduction of a dense m x n list-of-lists.

    Pivots on the entry of least absolute value, ties broken by smallest
    (row, column). Returns (factors, U, V); U and V are None unless track.
    """
    U = _identity_rows(m) if track else None
    V = _identity_rows(n) if track else None

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        if track:
            U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        if track:
            for row in V:
                row[j], row[k] = row[k], row[j]

    def add_row(target, source, factor):
        """row[target] += factor * row[source]"""
        src, dst = a[source], a[target]
        for j in range(n):
            if src[j]:
                dst[j] += factor * src[j]
        if track:
            src_u, dst_u = U[source], U[target]
            for j in range(m):
                if src_u[j]:
                    dst_u[j] += factor * src_u[j]

    def add_col(target, source, factor):
        """col[target] += factor * col[source]"""
        for row in a:
            if row[source]:
                row[target] += factor * row[source]
        if track:
            for row in V:
                if row[source]:
                    row[target] += factor * row[source]

    factors = []
    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            row = a[i]
            for j in range(t, n):
                value = row[j]
                if value and (pivot is None or abs(value) < pivot[0]):
                    pivot = (abs(value), i, j)
                    if pivot[0] == 1:
                        break
            if pivot is not None and pivot[0] == 1:
                break
        if pivot is None:
            break
        _, i, j = pivot
        swap_rows(t, i)
        swap_cols(t, j)

        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                # a remainder smaller than the pivot is now on row t or column t
                best = None
                for i in range(t + 1, m):
                    if a[i][t] and (best is None or abs(a[i][t]) < best[0]):
                        best = (abs(a[i][t]), "row", i)
                for j in range(t + 1, n):
                    if a[t][j] and (best is None or abs(a[t][j]) < best[0]):
                        best = (abs(a[t][j]), "col", j)
                if best[1] == "row":
                    swap_rows(t, best[2])
                else:
                    swap_cols(t, best[2])
                continue

            offender = None
            for i in range(t + 1, m):
                row = a[i]
                if any(row[j] % p for j in range(t + 1, n)):
                    offender = i
                    break
            if offender is None:
                break
            add_row(t, offender, 1)

        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            if track:
                U[t] = [-x for x in U[t]]
        factors.append(a[t][t])
        t += 1

    return factors, U, V


def _sparse_unit_phase(matrix: IntegerMatrix, threshold: float):
    """
    Eliminate unit pivots on sparse rows while the remainder stays sparse.

    Each unit pivot contributes an invariant factor 1 and removes one row
    and one column. Returns (units, remaining dense rows, remaining column count).
    """
    rows = {i: row for i, row in enumerate(matrix.row_dicts()) if row}
    cols: Dict[int, set] = defaultdict(set)
    for i, row in rows.items():
        for j in row:
            cols[j].add(i)
    live_cols = set(range(matrix.cols))
    live_rows = matrix.rows
    units = 0

    progress = True
    while progress:
        progress = False
        nnz = sum(len(row) for row in rows.values())
        if live_rows and live_cols and nnz / (live_rows * len(live_cols)) >= threshold:
            break
        for i in sorted(rows):
            row = rows.get(i)
            if row is None:
                continue
            unit_cols = [j for j, v in row.items() if v in (1, -1)]
            if not unit_cols:
                continue
            c = min(unit_cols)
            pivot = row[c]
            for k in sorted(cols[c] - {i}):
                other = rows[k]
                factor = other[c] * pivot
                for j, v in row.items():
                    value = other.get(j, 0) - factor * v
                    if value:
                        other[j] = value
                        cols[j].add(k)
                    else:
                        other.pop(j, None)
                        cols[j].discard(k)
                if not other:
                    del rows[k]
            for j in row:
                cols[j].discard(i)
            del rows[i]
            live_cols.discard(c)
            live_rows -= 1
            units += 1
            progress = True

    col_order = sorted(live_cols)
    position = {j: k for k, j in enumerate(col_order)}
    dense = []
    for i in sorted(rows):
        line = [0] * len(col_order)
        for j, value in rows[i].items():
            line[position[j]] = value
        dense.append(line)
    # rows that became zero still count toward the row dimension
    dense += [[0] * len(col_order) for _ in range(live_rows - len(dense))]
    return units, dense, len(col_order)


def smith_normal_form(
    matrix: IntegerMatrix,
    with_transforms: bool = False,
    precheck: bool = False,
) -> SmithDecomposition:
    """
    Smith normal form of an integer matrix.

    Args:
        matrix: Integer matrix
        with_transforms: Also return unimodular U, V with U X V = D
        precheck: Compute the rank mod `modular_prime` first and require the
            exact rank to reach it (skipped above `precheck_max_entries`)

    Returns:
        SmithDecomposition with invariant factors d_1 | ... | d_r
    """
    settings = get_settings()
    m, n = matrix.rows, matrix.cols
    units = 0
    lower = _rank_lower_bound(matrix, settings.precheck_max_entries) if precheck else None
    if not with_transforms and matrix.density() < settings.dense_threshold:
        units, dense, n_rest = _sparse_unit_phase(matrix, settings.dense_threshold)
        logger.debug(f"Sparse phase removed {units} unit pivots from {m}x{n}")
        factors, U, V = _dense_snf(dense, len(dense), n_rest, False)
    else:
        factors, U, V = _dense_snf(matrix.to_rows(), m, n, with_transforms)

    invariant_factors = tuple([1] * units + factors)
    for d, e in zip(invariant_factors, invariant_factors[1:]):
        if e % d:
            raise InternalConsistencyError(f"invariant factors {d}, {e} break the divisibility chain")
    if lower is not None and lower > len(invariant_factors):
        raise InternalConsistencyError(
            f"exact rank {len(invariant_factors)} is below the modular rank {lower} of a {m}x{n} matrix"
        )
    logger.debug(f"SNF {m}x{n}: rank {len(invariant_factors)}")
    return SmithDecomposition(
        rows=m,
        cols=n,
        invariant_factors=invariant_factors,
        U=IntegerMatrix.from_rows(U, m) if U is not None else None,
        V=IntegerMatrix.from_rows(V, n) if V is not None else None,
    )


def modular_rank(matrix: IntegerMatrix, prime: Optional[int] = None) -> int:
    """Rank over GF(p) by numpy int64 elimination; a lower bound for the rank over Z."""
    p = prime if prime is not None else get_settings().modular_prime
    if p >= 2**31:
        raise DomainError("modular rank needs p < 2^31 so products fit in int64")
    a = np.zeros((matrix.rows, matrix.cols), dtype=np.int64)
    for (i, j), value in matrix.entries.items():
        a[i, j] = value % p
    m, n = a.shape
    r = 0
    for c in range(n):
        nonzero = np.flatnonzero(a[r:, c])
        if nonzero.size == 0:
            continue
        pivot = r + int(nonzero[0])
        if pivot != r:
            a[[r, pivot], :] = a[[pivot, r], :]
        inv = pow(int(a[r, c]), -1, p)
        a[r, :] = (a[r, :] * inv) % p
        below = np.flatnonzero(a[r + 1:, c]) + r + 1
        for i in below:
            a[i, :] = (a[i, :] - a[i, c] * a[r, :]) % p
        r += 1
        if r == m:
            break
    return r


def _rank_lower_bound(matrix: IntegerMatrix, max_entries: int) -> Optional[int]:
    if matrix.rows * matrix.cols > max_entries:
        logger.debug(f"Modular precheck skipped for {matrix.rows}x{matrix.cols}")
        return None
    lower = modular_rank(matrix)
    logger.debug(f"Modular rank of {matrix.rows}x{matrix.cols}: {lower}")
    return lower


def integer_rank(matrix: IntegerMatrix) -> int:
    """Exact rank; the modular rank is accepted when it is already maximal."""
    bound = min(matrix.rows, matrix.cols)
    if bound == 0:
        return 0
    lower = modular_rank(matrix)
    if lower == bound:
        return lower
    return smith_normal_form(matrix).rank


# ---------------------------------------------------------------------------
# Abelian groups
# ---------------------------------------------------------------------------

def _primary_parts(n: int) -> List[int]:
    return [p**k for p, k in sorted(factorint(n).items())]


def _invariant_from_primary(prime_powers: Iterable[int]) -> Tuple[int, ...]:
    by_prime: Dict[int, List[int]] = defaultdict(list)
    for power in prime_powers:
        (p, _), = factorint(power).items()
        by_prime[p].append(power)
    for powers in by_prime.values():
        powers.sort(reverse=True)
    length = max((len(v) for v in by_prime.values()), default=0)
    factors = []
    for k in range(length):
        factors.append(math.prod(v[k] for v in by_prime.values() if k < len(v)))
    return tuple(sorted(factors))


@dataclass(frozen=True)
class AbelianGroup:
    """Z^free_rank (+) Z/d_1 (+) ... with d_i >= 2 and d_1 | d_2 | ... (canonical)."""

    free_rank: int = 0
    torsion: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.free_rank < 0:
            raise DomainError("free rank must be non-negative")
        if any(d < 1 for d in self.torsion):
            raise DomainError(f"cyclic orders must be positive, got {self.torsion}")
        primary = [q for d in self.torsion if d > 1 for q in _primary_parts(d)]
        object.__setattr__(self, "torsion", _invariant_from_primary(primary))

    @classmethod
    def cyclic(cls, order: int) -> "AbelianGroup":
        """Z/order, with order 0 meaning Z."""
        return cls(1, ()) if order == 0 else cls(0, (order,))

    @classmethod
    def free(cls, rank: int) -> "AbelianGroup":
        return cls(rank, ())

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def torsion_order(self) -> int:
        return math.prod(self.torsion)

    def torsion_part(self) -> "AbelianGroup":
        return AbelianGroup(0, self.torsion)

    def elementary_divisors(self) -> List[int]:
        return sorted(q for d in self.torsion for q in _primary_parts(d))

    def cyclic_factors(self) -> List[int]:
        """Orders of a cyclic decomposition, 0 standing for Z."""
        return [0] * self.free_rank + list(self.torsion)

    def direct_sum(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def tensor(self, other: "AbelianGroup") -> "AbelianGroup":
        """Z (x) G = G, Z/m (x) Z/n = Z/gcd(m, n)."""
        free = self.free_rank * other.free_rank
        torsion = list(self.torsion) * other.free_rank + list(other.torsion) * self.free_rank
        torsion += [math.gcd(a, b) for a in self.torsion for b in other.torsion]
        return AbelianGroup(free, tuple(torsion))

    def tor(self, other: "AbelianGroup") -> "AbelianGroup":
        """Tor(Z/m, Z/n) = Z/gcd(m, n); Tor vanishes on free summands."""
        return AbelianGroup(0, tuple(math.gcd(a, b) for a in self.torsion for b in other.torsion))

    def render(self) -> str:
        """Primary form, e.g. `Z^2 (+) (Z/2)^4 (+) Z/3`, or `0`."""
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        counts: Dict[int, int] = defaultdict(int)
        for q in self.elementary_divisors():
            counts[q] += 1
        for q in sorted(counts):
            parts.append(f"Z/{q}" if counts[q] == 1 else f"(Z/{q})^{counts[q]}")
        return " (+) ".join(parts) if parts else "0"

    def invariant_factors_text(self) -> str:
        return ",".join(map(str, self.torsion)) or "-"

    def __str__(self) -> str:
        return self.render()


def direct_sum(groups: Iterable[AbelianGroup]) -> AbelianGroup:
    return reduce(AbelianGroup.direct_sum, groups, AbelianGroup())


def cokernel(matrix: IntegerMatrix) -> AbelianGroup:
    """Z^rows / column span, from the invariant factors."""
    snf = smith_normal_form(matrix)
    group = AbelianGroup(matrix.rows - snf.rank, tuple(d for d in snf.invariant_factors if d > 1))
    logger.debug(f"coker of {matrix!r} = {group}")
    return group


def element_order_in_cokernel(
    matrix: IntegerMatrix,
    vector: Sequence[int],
    snf: Optional[SmithDecomposition] = None,
) -> int:
    """
    Least k >= 1 with k * vector in the column span, or 0 when there is none.

    Uses v' = U v: any nonzero coordinate past the rank means infinite
    order; otherwise the order is lcm of d_i / gcd(d_i, v'_i).
    """
    if len(vector) != matrix.rows:
        raise DomainError(f"vector of length {len(vector)} for a matrix with {matrix.rows} rows")
    if snf is None or snf.U is None:
        snf = smith_normal_form(matrix, with_transforms=True)
    transformed = [0] * matrix.rows
    for (i, j), value in snf.U.entries.items():
        transformed[i] += value * int(vector[j])
    if any(transformed[snf.rank:]):
        return 0
    order = 1
    for d, x in zip(snf.invariant_factors, transformed):
        order = math.lcm(order, d // math.gcd(d, x))
    return order
