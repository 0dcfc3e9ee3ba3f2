"""
Words over a transition system and the conditions (H0)-(H3).

A word of shape m is a map from the box [0, m] to the alphabet such that
M_j(w(l + e_j), w(l)) = 1 whenever both cells lie in the box. Letters are
stored densely in a numpy array indexed by cell coordinates.
"""

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple
import networkx as nx
import numpy as np
from src.config import get_settings
from src.errors import ConditionRefusedError, DomainError, InternalConsistencyError
from src.logger import get_logger
from src.plane import ValidationReport
from src.tiles import TransitionSystem, corner_complete, opposite_corner_complete

logger = get_logger(__name__)

Cell = Tuple[int, ...]


@dataclass(frozen=True)
class Shape:
    components: Tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.components):
            raise DomainError(f"shape components must be non-negative, got {self.components}")

    @classmethod
    def of(cls, *components: int) -> "Shape":
        return cls(tuple(components))

    @property
    def rank(self) -> int:
        return len(self.components)

    def __add__(self, other: "Shape") -> "Shape":
        return Shape(tuple(a + b for a, b in zip(self.components, other.components)))

    def cells(self) -> Iterator[Cell]:
        """All cells of [0, m] in row-major order."""
        return itertools.product(*(range(c + 1) for c in self.components))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.components)) + ")"


class Word:
    """A word with a base point `origin`; w(origin + i) = letters[i]."""

    def __init__(self, letters, origin: Optional[Sequence[int]] = None):
        self.letters = np.asarray(letters, dtype=np.int64)
        if self.letters.ndim == 0 or 0 in self.letters.shape:
            raise DomainError("a word needs at least one cell")
        self.origin: Cell = tuple(origin) if origin is not None else (0,) * self.letters.ndim
        if len(self.origin) != self.letters.ndim:
            raise DomainError("origin rank does not match letter array rank")

    @classmethod
    def single(cls, letter: int, rank: int) -> "Word":
        return cls(np.full((1,) * rank, letter, dtype=np.int64))

    @property
    def shape(self) -> Shape:
        return Shape(tuple(s - 1 for s in self.letters.shape))

    @property
    def rank(self) -> int:
        return self.letters.ndim

    def at(self, cell: Sequence[int]) -> int:
        """Letter at an absolute cell."""
        local = tuple(c - o for c, o in zip(cell, self.origin))
        if any(not 0 <= c < s for c, s in zip(local, self.letters.shape)):
            raise DomainError(f"cell {tuple(cell)} outside the word's domain")
        return int(self.letters[local])

    @property
    def initial(self) -> int:
        """o(w), the letter at the lowest corner."""
        return int(self.letters[(0,) * self.rank])

    @property
    def terminal(self) -> int:
        """t(w), the letter at the highest corner."""
        return int(self.letters[(-1,) * self.rank])

    def as_tuple(self) -> Tuple[int, ...]:
        return tuple(int(x) for x in self.letters.ravel())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.letters.shape == other.letters.shape
            and bool(np.array_equal(self.letters, other.letters))
        )

    def __hash__(self) -> int:
        return hash((self.origin, self.letters.shape, self.as_tuple()))

    def __repr__(self) -> str:
        return f"Word(shape={self.shape}, origin={self.origin}, letters={self.letters.tolist()})"


def _unit(rank: int, j: int) -> Cell:
    return tuple(1 if k == j else 0 for k in range(rank))


def _check_rank(word: Word, system: TransitionSystem):
    if word.rank != system.rank:
        raise DomainError(f"word of rank {word.rank} used with a rank {system.rank} system")


def validate_word(word: Word, system: TransitionSystem) -> ValidationReport:
    """
    Check every transition constraint of the word.

    The witness is the first violated cell l (in absolute coordinates) and
    the 1-based direction j.
    """
    _check_rank(word, system)
    letters = word.letters
    if letters.min() < 0 or letters.max() >= system.size:
        raise DomainError(f"word letters must lie in 0..{system.size - 1}")

    violations = []
    for j, matrix in enumerate(system.matrices):
        if letters.shape[j] < 2:
            continue
        lower = np.take(letters, range(letters.shape[j] - 1), axis=j)
        upper = np.take(letters, range(1, letters.shape[j]), axis=j)
        bad = np.argwhere(matrix[upper, lower] != 1)
        if bad.size:
            violations.append((tuple(int(x) for x in bad[0]), j + 1))
    if not violations:
        return ValidationReport.ok()
    local, j = min(violations)
    cell = tuple(c + o for c, o in zip(local, word.origin))
    return ValidationReport.fail("transition", cell, j)


def _require_valid(word: Word, system: TransitionSystem, what: str):
    report = validate_word(word, system)
    if not report.passed:
        raise DomainError(f"{what} is not a word: {report.render()}")


def product(u: Word, v: Word, system: TransitionSystem) -> Word:
    """
    The unique word w of shape s(u) + s(v) with w|[0,m] = u and w|[m,m+n] = v.

    The two missing rectangles are filled cell by cell, each cell completed
    from the three already known corners of its unit square.
    """
    _require_valid(u, system, "left factor")
    _require_valid(v, system, "right factor")
    if u.terminal != v.initial:
        raise DomainError(f"t(u)={u.terminal} differs from o(v)={v.initial}")

    if system.rank == 1:
        return Word(np.concatenate([u.letters, v.letters[1:]]))

    m1, m2 = u.shape.components
    n1, n2 = v.shape.components
    grid = np.full((m1 + n1 + 1, m2 + n2 + 1), -1, dtype=np.int64)
    grid[: m1 + 1, : m2 + 1] = u.letters
    grid[m1:, m2:] = v.letters

    # Upper-left rectangle: cell (i, j) from (i, j-1), (i+1, j-1), (i+1, j)
    for j in range(m2 + 1, m2 + n2 + 1):
        for i in range(m1 - 1, -1, -1):
            grid[i, j] = corner_complete(
                int(grid[i, j - 1]), int(grid[i + 1, j - 1]), int(grid[i + 1, j]), system
            )
    # Lower-right rectangle: cell (i, j) from (i-1, j), (i-1, j+1), (i, j+1)
    for j in range(m2 - 1, -1, -1):
        for i in range(m1 + 1, m1 + n1 + 1):
            grid[i, j] = opposite_corner_complete(
                int(grid[i - 1, j]), int(grid[i - 1, j + 1]), int(grid[i, j + 1]), system
            )

    w = Word(grid)
    report = validate_word(w, system)
    if not report.passed:
        raise InternalConsistencyError(f"product violates a transition: {report.render()}")
    return w


def restrict(word: Word, k: Sequence[int], l: Sequence[int]) -> Word:
    """w restricted to [k, l], re-based so the result has origin 0 and shape l - k."""
    k, l = tuple(k), tuple(l)
    if len(k) != word.rank or len(l) != word.rank:
        raise DomainError("restriction window rank does not match the word")
    lo = tuple(a - o for a, o in zip(k, word.origin))
    hi = tuple(b - o for b, o in zip(l, word.origin))
    if any(a < 0 or b >= s or a > b for a, b, s in zip(lo, hi, word.letters.shape)):
        raise DomainError(f"window [{k}, {l}] is not inside the word's domain")
    window = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    return Word(word.letters[window].copy())


def translate(word: Word, k: Sequence[int]) -> Word:
    """tau_k w: the same letters based at k."""
    if len(k) != word.rank:
        raise DomainError("translation rank does not match the word")
    return Word(word.letters, origin=tuple(o + c for o, c in zip(word.origin, k)))


def is_p_periodic(word: Word, p: Sequence[int]) -> bool:
    """True when tau_p w and w agree on [0, l] and [p, p + l]; vacuous on an empty overlap."""
    p = tuple(p)
    if len(p) != word.rank:
        raise DomainError("period rank does not match the word")
    if not any(p):
        raise DomainError("period must be nonzero")
    l = word.shape.components
    lo = tuple(max(0, c) for c in p)
    hi = tuple(min(s, s + c) for s, c in zip(l, p))
    if any(a > b for a, b in zip(lo, hi)):
        return True
    here = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    there = tuple(slice(a - c, b - c + 1) for a, b, c in zip(lo, hi, p))
    return bool(np.array_equal(word.letters[here], word.letters[there]))


# ---------------------------------------------------------------------------
# Counting and enumeration
# ---------------------------------------------------------------------------

def _successors(matrix: np.ndarray) -> List[FrozenSet[int]]:
    return [frozenset(np.flatnonzero(matrix[:, a]).tolist()) for a in range(matrix.shape[1])]


def h1a_holds(system: TransitionSystem) -> bool:
    if system.rank == 1:
        return True
    m1, m2 = system.matrices
    return bool(np.array_equal(m1 @ m2, m2 @ m1))


def count_words(system: TransitionSystem, shape: Shape) -> int:
    """Number of words of a shape: the entry sum of M1^m1 M2^m2."""
    if shape.rank != system.rank:
        raise DomainError(f"shape {shape} does not match a rank {system.rank} system")
    if not h1a_holds(system):
        raise ConditionRefusedError("H1a", "word counts depend on the order of directions")
    total = np.identity(system.size, dtype=object)
    for matrix, power in zip(system.matrices, shape.components):
        total = total @ np.linalg.matrix_power(matrix.astype(object), power)
    return int(total.sum())


def iter_words(system: TransitionSystem, shape: Shape) -> Iterator[Word]:
    """
    All words of a shape in lexicographic order of their row-major letters.

    Cells are filled in row-major order; each cell is constrained by its
    already filled predecessors along every direction.
    """
    if shape.rank != system.rank:
        raise DomainError(f"shape {shape} does not match a rank {system.rank} system")
    successors = [_successors(matrix) for matrix in system.matrices]
    cells = list(shape.cells())
    dims = tuple(c + 1 for c in shape.components)
    grid = np.zeros(dims, dtype=np.int64)
    everything = frozenset(range(system.size))

    def options(cell: Cell) -> List[int]:
        allowed = everything
        for j in range(system.rank):
            if cell[j] > 0:
                before = cell[:j] + (cell[j] - 1,) + cell[j + 1:]
                allowed = allowed & successors[j][int(grid[before])]
        return sorted(allowed)

    def fill(position: int) -> Iterator[Word]:
        if position == len(cells):
            yield Word(grid.copy())
            return
        cell = cells[position]
        for letter in options(cell):
            grid[cell] = letter
            yield from fill(position + 1)

    yield from fill(0)


def enumerate_words(system: TransitionSystem, shape: Shape, bound: Optional[int] = None) -> List[Word]:
    """Up to `bound` words of a shape, in lexicographic order."""
    if not h1a_holds(system):
        raise ConditionRefusedError("H1a", "word enumeration requires commuting matrices")
    bound = bound if bound is not None else get_settings().enumeration_bound
    return list(itertools.islice(iter_words(system, shape), bound))


# ---------------------------------------------------------------------------
# Letter graph
# ---------------------------------------------------------------------------

def letter_graph(matrices: Sequence[np.ndarray]) -> nx.DiGraph:
    """Vertex per letter, edge a -> b whenever some M_i(b, a) = 1."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(matrices[0].shape[0]))
    for matrix in matrices:
        rows, cols = np.nonzero(matrix)
        graph.add_edges_from(zip(cols.tolist(), rows.tolist()))
    return graph


def is_irreducible(matrices: Sequence[np.ndarray]) -> bool:
    graph = letter_graph(matrices)
    if graph.number_of_nodes() == 0:
        return False
    return nx.is_strongly_connected(graph)


def reachability_irreducible(matrices: Sequence[np.ndarray]) -> bool:
    """Forward and reverse breadth-first search from letter 0."""
    n = matrices[0].shape[0]
    if n == 0:
        return False
    combined = np.zeros((n, n), dtype=bool)
    for matrix in matrices:
        combined |= matrix != 0

    def reached(adjacency: np.ndarray) -> int:
        seen = {0}
        queue = deque([0])
        while queue:
            a = queue.popleft()
            for b in np.flatnonzero(adjacency[:, a]).tolist():
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
        return len(seen)

    return reached(combined) == n and reached(combined.T) == n


# ---------------------------------------------------------------------------
# H-conditions
# ---------------------------------------------------------------------------

PASS, FAIL, VACUOUS, INCONCLUSIVE = "pass", "fail", "vacuous", "inconclusive"


@dataclass(frozen=True)
class ConditionVerdict:
    condition: str
    verdict: str
    witness: str = "-"

    def render(self) -> str:
        return f"condition={self.condition} verdict={self.verdict} witness={self.witness}"


@dataclass(frozen=True)
class HReport:
    verdicts: Tuple[ConditionVerdict, ...] = field(default_factory=tuple)

    def verdict(self, condition: str) -> str:
        for entry in self.verdicts:
            if entry.condition == condition:
                return entry.verdict
        raise KeyError(condition)

    def passed(self, conditions: Sequence[str]) -> bool:
        return all(self.verdict(c) in (PASS, VACUOUS) for c in conditions)

    def gate(self, conditions: Sequence[str]):
        """Raise ConditionRefusedError for the first condition that did not pass."""
        for entry in self.verdicts:
            if entry.condition in conditions and entry.verdict not in (PASS, VACUOUS):
                raise ConditionRefusedError(entry.condition, f"verdict {entry.verdict}, witness {entry.witness}")

    def render(self) -> str:
        return "\n".join(entry.render() for entry in self.verdicts)


def _check_h0(system: TransitionSystem) -> ConditionVerdict:
    for i, matrix in enumerate(system.matrices, start=1):
        outside = np.argwhere((matrix != 0) & (matrix != 1))
        if outside.size:
            r, c = outside[0]
            return ConditionVerdict("H0", FAIL, f"M{i}({r},{c})={int(matrix[r, c])}")
        if not matrix.any():
            return ConditionVerdict("H0", FAIL, f"M{i}=0")
    return ConditionVerdict("H0", PASS)


def _check_h1(system: TransitionSystem) -> List[ConditionVerdict]:
    if system.rank == 1:
        return [
            ConditionVerdict("H1a", VACUOUS, "rank1"),
            ConditionVerdict("H1b", VACUOUS, "rank1"),
            ConditionVerdict("H1c", VACUOUS, "rank1"),
        ]
    m1, m2 = system.matrices
    forward, backward = m1 @ m2, m2 @ m1
    diff = np.argwhere(forward != backward)
    if diff.size:
        r, c = diff[0]
        h1a = ConditionVerdict("H1a", FAIL, f"({r},{c}):{int(forward[r, c])}!={int(backward[r, c])}")
    else:
        h1a = ConditionVerdict("H1a", PASS)
    big = np.argwhere((forward > 1) | (backward > 1))
    if big.size:
        r, c = big[0]
        h1b = ConditionVerdict("H1b", FAIL, f"({r},{c}):{int(max(forward[r, c], backward[r, c]))}")
    else:
        h1b = ConditionVerdict("H1b", PASS)
    return [h1a, h1b, ConditionVerdict("H1c", VACUOUS, "rank2")]


def _check_h2(system: TransitionSystem) -> ConditionVerdict:
    graph = letter_graph(system.matrices)
    verdict = is_irreducible(system.matrices)
    if verdict != reachability_irreducible(system.matrices):
        raise InternalConsistencyError("strong connectivity and reachability disagree on H2")
    if verdict:
        return ConditionVerdict("H2", PASS)
    components = nx.number_strongly_connected_components(graph) if graph.number_of_nodes() else 0
    return ConditionVerdict("H2", FAIL, f"components={components}")


def _sign_normalized_periods(rank: int, bound: int) -> Iterator[Cell]:
    """Nonzero p with |p|_inf <= bound whose first nonzero entry is positive."""
    for p in itertools.product(range(-bound, bound + 1), repeat=rank):
        nonzero = [c for c in p if c]
        if nonzero and nonzero[0] > 0:
            yield p


def _non_periodic_witness(system: TransitionSystem, p: Cell, budget: int) -> Tuple[Optional[Word], bool]:
    """
    Search the words of shape |p| for one whose corners related by p differ.

    A word is non-p-periodic iff some restriction of shape |p| is, so this
    search decides p exactly when it finishes. Returns (witness, finished).
    """
    shape = Shape(tuple(abs(c) for c in p))
    here = tuple(max(c, 0) for c in p)
    there = tuple(max(-c, 0) for c in p)
    for count, word in enumerate(iter_words(system, shape)):
        if count >= budget:
            return None, False
        if word.letters[here] != word.letters[there]:
            return word, True
    return None, True


def _check_h3(system: TransitionSystem, period_bound: int, budget: int) -> ConditionVerdict:
    branching = system.size > 0 and all(
        int(matrix.sum(axis=0).min()) >= 2 and int(matrix.sum(axis=1).min()) >= 2
        for matrix in system.matrices
    )
    if branching:
        return ConditionVerdict("H3", PASS, "branching>=2")

    exhausted = False
    for p in _sign_normalized_periods(system.rank, period_bound):
        witness, finished = _non_periodic_witness(system, p, budget)
        if witness is None and finished:
            return ConditionVerdict("H3", FAIL, "p=" + ",".join(map(str, p)))
        if witness is None:
            exhausted = True
    logger.debug(f"H3 bounded search done up to |p|<={period_bound}, budget exhausted={exhausted}")
    return ConditionVerdict("H3", INCONCLUSIVE, f"bound={period_bound}")


def check_conditions(
    system: TransitionSystem,
    period_bound: Optional[int] = None,
    budget: Optional[int] = None,
) -> HReport:
    """
    Evaluate H0, H1a, H1b, H1c, H2 and H3 for a transition system.

    Args:
        system: Rank 1 or rank 2 transition system
        period_bound: Largest |p|_inf tried by the H3 fallback search
        budget: Maximum words inspected per period

    Returns:
        HReport with one verdict per condition
    """
    settings = get_settings()
    period_bound = period_bound if period_bound is not None else settings.h3_period_bound
    budget = budget if budget is not None else settings.enumeration_bound

    verdicts = [_check_h0(system), *_check_h1(system), _check_h2(system)]
    verdicts.append(_check_h3(system, period_bound, budget))
    report = HReport(tuple(verdicts))
    for entry in verdicts:
        if entry.verdict in (FAIL, INCONCLUSIVE):
            logger.warning(f"H-check {entry.render()}")
    logger.info("H-report: " + ", ".join(f"{v.condition}={v.verdict}" for v in verdicts))
    return report
