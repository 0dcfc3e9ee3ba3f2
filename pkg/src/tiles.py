"""
Tile alphabet of an Ã₂ presentation and its transition matrices.

A tile is two chambers glued along a common edge, recorded by five edge
labels (ll, lr, mid, ur, ul). M1 and M2 record when a second tile sits
diagonally above a first one in direction e1 or e2 inside an apartment.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from src.errors import DomainError, InternalConsistencyError, ParseError, ValidationRequiredError
from src.formats import parse_int, render, tokenize_lines
from src.logger import get_logger
from src.presentation import TrianglePresentation

logger = get_logger(__name__)


@dataclass(frozen=True)
class Tile:
    """Edge labels of a basepointed parallelogram, as generator indices."""

    ll: int
    lr: int
    mid: int
    ur: int
    ul: int

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.ll, self.lr, self.ur)

    def label(self, generators: Sequence[str]) -> str:
        return ".".join(generators[x] for x in (self.ll, self.lr, self.mid, self.ur, self.ul))


@dataclass(frozen=True)
class Decoration:
    """A set D with a map delta: D -> alphabet index."""

    names: Tuple[str, ...]
    delta: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """
    Alphabet plus {0,1} transition matrices.

    matrices[j][b, a] == 1 means letter b may follow letter a in direction
    e_(j+1). Rank 1 systems carry one matrix, rank 2 systems carry two.
    """

    labels: Tuple[str, ...]
    matrices: Tuple[np.ndarray, ...]
    tiles: Optional[Tuple[Tile, ...]] = None
    q: Optional[int] = None
    decoration: Optional[Decoration] = None

    def __post_init__(self):
        n = len(self.labels)
        if self.rank not in (1, 2):
            raise DomainError(f"transition systems of rank {self.rank} are not supported")
        for matrix in self.matrices:
            if matrix.shape != (n, n):
                raise DomainError(f"matrix shape {matrix.shape} does not match alphabet size {n}")

    @property
    def rank(self) -> int:
        return len(self.matrices)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def is_building_system(self) -> bool:
        return self.tiles is not None


# ---------------------------------------------------------------------------
# Alphabet and matrices
# ---------------------------------------------------------------------------

def build_alphabet(presentation: TrianglePresentation) -> List[Tile]:
    """
    Enumerate all tiles of a validated presentation.

    Args:
        presentation: Presentation returned by ensure_valid

    Returns:
        Tiles ordered by (ll, lr, ur); there are q(q+1)(q^2+q+1) of them
    """
    if not presentation.validated:
        raise ValidationRequiredError("build_alphabet requires a validated triangle presentation")

    completions = presentation.completions()
    # (y, z) -> [x] with (x, y, z) in T, i.e. the generators ur with (ur, mid, ul) in T
    firsts: Dict[int, List[int]] = {}
    for x, y, _ in presentation.triples:
        firsts.setdefault(y, []).append(x)

    alphabet = []
    for (ll, lr), (mid,) in sorted(completions.items()):
        for ur in sorted(firsts.get(mid, [])):
            if ur == lr:
                continue
            (ul,) = completions[(ur, mid)]
            alphabet.append(Tile(ll=ll, lr=lr, mid=mid, ur=ur, ul=ul))
    alphabet.sort(key=lambda tile: tile.key)

    q = presentation.q
    expected = q * (q + 1) * (q * q + q + 1)
    if len(alphabet) != expected:
        raise InternalConsistencyError(f"built {len(alphabet)} tiles, expected {expected}")
    logger.info(f"Built tile alphabet: {len(alphabet)} tiles")
    return alphabet


def _edge_arrays(alphabet: Sequence[Tile]) -> Dict[str, np.ndarray]:
    return {
        name: np.array([getattr(tile, name) for tile in alphabet], dtype=np.int64)
        for name in ("ll", "lr", "mid", "ur", "ul")
    }


def build_transition_matrices(alphabet: Sequence[Tile]) -> Tuple[np.ndarray, np.ndarray]:
    """
    M1(b, a) = 1 iff ll(b) = ur(a) and lr(b) != mid(a);
    M2(c, a) = 1 iff lr(c) = ul(a) and ll(c) != mid(a).

    Rows index the later tile, columns the earlier one.
    """
    e = _edge_arrays(alphabet)
    m1 = (e["ll"][:, None] == e["ur"][None, :]) & (e["lr"][:, None] != e["mid"][None, :])
    m2 = (e["lr"][:, None] == e["ul"][None, :]) & (e["ll"][:, None] != e["mid"][None, :])
    return m1.astype(np.int64), m2.astype(np.int64)


def check_building_postconditions(q: int, m1: np.ndarray, m2: np.ndarray):
    """Row and column sums q^2, commuting matrices, {0,1} product."""
    target = q * q
    for name, matrix in (("M1", m1), ("M2", m2)):
        for axis, what in ((1, "row"), (0, "column")):
            sums = matrix.sum(axis=axis)
            bad = np.flatnonzero(sums != target)
            if bad.size:
                raise InternalConsistencyError(
                    f"{name} {what} {int(bad[0])} sums to {int(sums[bad[0]])}, expected {target}"
                )
    product = m1 @ m2
    if not np.array_equal(product, m2 @ m1):
        raise InternalConsistencyError("M1 and M2 do not commute")
    if product.max(initial=0) > 1:
        raise InternalConsistencyError("M1 M2 has an entry greater than 1")


def build_building_system(presentation: TrianglePresentation) -> TransitionSystem:
    """Alphabet and (M1, M2) of a validated presentation, with postconditions enforced."""
    alphabet = build_alphabet(presentation)
    m1, m2 = build_transition_matrices(alphabet)
    check_building_postconditions(presentation.q, m1, m2)
    labels = tuple(tile.label(presentation.generators) for tile in alphabet)
    logger.info(f"Transition matrices built: {len(alphabet)}x{len(alphabet)}, nnz M1={int(m1.sum())}, M2={int(m2.sum())}")
    return TransitionSystem(labels=labels, matrices=(m1, m2), tiles=tuple(alphabet), q=presentation.q)


def corner_complete(a: int, b: int, c: int, system: TransitionSystem) -> int:
    """
    The unique d with M2(d, a) = 1 and M1(c, d) = 1.

    Requires M1(b, a) = 1 and M2(c, b) = 1.
    """
    m1, m2 = system.matrices
    if m1[b, a] != 1 or m2[c, b] != 1:
        raise DomainError(f"corner ({a}, {b}, {c}) needs M1(b,a)=1 and M2(c,b)=1")
    candidates = np.flatnonzero((m2[:, a] == 1) & (m1[c, :] == 1))
    if candidates.size != 1:
        raise InternalConsistencyError(
            f"corner ({a}, {b}, {c}) has {candidates.size} completions"
        )
    return int(candidates[0])


def opposite_corner_complete(a: int, d: int, c: int, system: TransitionSystem) -> int:
    """
    The unique b with M1(b, a) = 1 and M2(c, b) = 1.

    Requires M2(d, a) = 1 and M1(c, d) = 1.
    """
    m1, m2 = system.matrices
    if m2[d, a] != 1 or m1[c, d] != 1:
        raise DomainError(f"corner ({a}, {d}, {c}) needs M2(d,a)=1 and M1(c,d)=1")
    candidates = np.flatnonzero((m1[:, a] == 1) & (m2[c, :] == 1))
    if candidates.size != 1:
        raise InternalConsistencyError(
            f"corner ({a}, {d}, {c}) has {candidates.size} completions"
        )
    return int(candidates[0])


# ---------------------------------------------------------------------------
# Triplet export
# ---------------------------------------------------------------------------

def write_matrix(name: str, matrix: np.ndarray) -> str:
    """Sparse triplet file: `matrix <name> <rows> <cols>` then `i j value` per nonzero."""
    rows, cols = matrix.shape
    body = [f"matrix {name} {rows} {cols}"]
    body += [f"{i} {j} {int(matrix[i, j])}" for i, j in zip(*np.nonzero(matrix))]
    return render(body)


def read_matrix(text: str) -> Tuple[str, np.ndarray]:
    """Parse a triplet file written by write_matrix."""
    name = None
    matrix = None
    seen = set()
    for line_number, tokens in tokenize_lines(text):
        if matrix is None:
            if tokens[0] != "matrix" or len(tokens) != 4:
                raise ParseError("expected header 'matrix <name> <rows> <cols>'", line_number)
            name = tokens[1]
            rows = parse_int(tokens[2], line_number, "rows")
            cols = parse_int(tokens[3], line_number, "cols")
            matrix = np.zeros((rows, cols), dtype=np.int64)
            continue
        if len(tokens) != 3:
            raise ParseError("expected 'i j value'", line_number)
        i = parse_int(tokens[0], line_number, "row index")
        j = parse_int(tokens[1], line_number, "column index")
        value = parse_int(tokens[2], line_number, "value")
        if i >= matrix.shape[0] or j >= matrix.shape[1]:
            raise ParseError(f"entry ({i}, {j}) outside {matrix.shape[0]}x{matrix.shape[1]}", line_number)
        if (i, j) in seen:
            raise ParseError(f"duplicate entry ({i}, {j})", line_number)
        seen.add((i, j))
        matrix[i, j] = value
    if matrix is None:
        raise ParseError("missing 'matrix' header")
    return name, matrix


def write_tile_table(system: TransitionSystem, generators: Sequence[str]) -> str:
    """`tile <index> ll lr mid ur ul` per tile, in canonical order."""
    if system.tiles is None:
        raise DomainError("tile table requires a building system")
    body = [
        f"tile {i} " + " ".join(generators[x] for x in (t.ll, t.lr, t.mid, t.ur, t.ul))
        for i, t in enumerate(system.tiles)
    ]
    return render(body)


def write_letter_table(system: TransitionSystem) -> str:
    """`letter <index> <label>` per alphabet letter."""
    return render([f"letter {i} {label}" for i, label in enumerate(system.labels)])
