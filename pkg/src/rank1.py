"""
Rank-1 systems from finite graphs.

The alphabet is the set of directed edges of a finite graph, each edge
followed by its reverse; M(y, x) = 1 when y continues x without
backtracking.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union
import networkx as nx
import numpy as np
from src.errors import DomainError, ParseError
from src.formats import first_directive, parse_int, render, tokenize_lines
from src.logger import get_logger
from src.plane import ValidationReport
from src.tiles import Decoration, TransitionSystem, read_matrix
from src.words import is_irreducible

logger = get_logger(__name__)

REVERSE_SUFFIX = "^-1"


@dataclass(frozen=True)
class FiniteGraph:
    """Vertices 0..n-1 and named undirected edges given with an orientation."""

    num_vertices: int
    edges: Tuple[Tuple[str, int, int], ...]

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.num_vertices))
        for name, tail, head in self.edges:
            graph.add_edge(tail, head, key=name)
        return graph

    def degree(self, vertex: int) -> int:
        """Degree with loops counted twice."""
        return sum((tail == vertex) + (head == vertex) for _, tail, head in self.edges)


@dataclass(frozen=True)
class EdgeAlphabet:
    """Directed edges (e1, e1^-1, e2, e2^-1, ...) as (label, tail, head)."""

    letters: Tuple[Tuple[str, int, int], ...]

    def reverse(self, index: int) -> int:
        return index ^ 1

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _, _ in self.letters)


def parse_graph(text: str) -> FiniteGraph:
    """`vertices <n>` then `edge <name> <tail> <head>` lines."""
    num_vertices = None
    edges: List[Tuple[str, int, int]] = []
    names = set()
    for line_number, tokens in tokenize_lines(text):
        if num_vertices is None:
            if tokens[0] != "vertices" or len(tokens) != 2:
                raise ParseError("expected header 'vertices <n>'", line_number)
            num_vertices = parse_int(tokens[1], line_number, "vertex count")
            continue
        if tokens[0] != "edge" or len(tokens) != 4:
            raise ParseError("expected 'edge <name> <tail> <head>'", line_number)
        name = tokens[1]
        if name in names:
            raise ParseError(f"duplicate edge name {name!r}", line_number)
        tail = parse_int(tokens[2], line_number, "tail")
        head = parse_int(tokens[3], line_number, "head")
        if tail >= num_vertices or head >= num_vertices:
            raise ParseError(f"edge {name!r} uses a vertex outside 0..{num_vertices - 1}", line_number)
        names.add(name)
        edges.append((name, tail, head))
    if num_vertices is None:
        raise ParseError("missing 'vertices' header")
    return FiniteGraph(num_vertices=num_vertices, edges=tuple(edges))


def serialize_graph(graph: FiniteGraph) -> str:
    body = [f"vertices {graph.num_vertices}"]
    body += [f"edge {name} {tail} {head}" for name, tail, head in graph.edges]
    return render(body)


def validate_graph(graph: FiniteGraph) -> ValidationReport:
    """Connected with at least one edge; vertices of degree < 3 are warnings."""
    if graph.num_vertices == 0:
        return ValidationReport.fail("graph has no vertices")
    if not graph.edges:
        return ValidationReport.fail("graph has no edges")
    if not nx.is_connected(graph.to_networkx()):
        components = nx.number_connected_components(graph.to_networkx())
        return ValidationReport.fail("graph not connected", components)

    warnings = []
    for vertex in range(graph.num_vertices):
        degree = graph.degree(vertex)
        if degree < 3:
            message = f"vertex {vertex} has degree {degree} < 3"
            logger.warning(f"Thin covering tree: {message}")
            warnings.append(message)
    return ValidationReport.ok(warnings)


def edge_alphabet(graph: FiniteGraph) -> EdgeAlphabet:
    letters = []
    for name, tail, head in graph.edges:
        letters.append((name, tail, head))
        letters.append((name + REVERSE_SUFFIX, head, tail))
    return EdgeAlphabet(letters=tuple(letters))


def graph_to_matrix(graph: FiniteGraph, base_vertex: int = 0) -> TransitionSystem:
    """
    No-backtracking transition matrix of a graph.

    Args:
        graph: Validated finite graph
        base_vertex: Vertex whose outgoing edges form the decoration

    Returns:
        Rank 1 TransitionSystem with M(y, x) = 1 iff head(x) = tail(y) and y != reverse(x)
    """
    alphabet = edge_alphabet(graph)
    tails = np.array([tail for _, tail, _ in alphabet.letters], dtype=np.int64)
    heads = np.array([head for _, _, head in alphabet.letters], dtype=np.int64)
    n = len(alphabet.letters)
    reverse = np.arange(n) ^ 1

    follows = heads[None, :] == tails[:, None]
    backtrack = np.arange(n)[:, None] == reverse[None, :]
    matrix = (follows & ~backtrack).astype(np.int64)

    outgoing = [i for i in range(n) if tails[i] == base_vertex]
    decoration = Decoration(
        names=tuple(alphabet.labels[i] for i in outgoing),
        delta=tuple(outgoing),
    )
    logger.info(f"Rank-1 matrix built: {n} letters, {int(matrix.sum())} transitions")
    return TransitionSystem(labels=alphabet.labels, matrices=(matrix,), decoration=decoration)


@dataclass(frozen=True)
class SimplicityVerdict:
    simple: bool
    reasons: Tuple[str, ...]

    def render(self) -> str:
        verdict = "simple" if self.simple else "not-simple"
        return f"simplicity={verdict} reasons={','.join(self.reasons) or '-'}"


def ck_simplicity_check(matrix: np.ndarray) -> SimplicityVerdict:
    """
    Simple iff the matrix is irreducible and not a permutation matrix.

    Nondegeneracy (no zero row or column) is checked first; a degenerate
    matrix is reported as not simple.
    """
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"simplicity check needs a square matrix, got shape {matrix.shape}")
    if ((matrix != 0) & (matrix != 1)).any():
        raise DomainError("simplicity check needs a {0,1}-matrix")

    reasons = []
    zero_rows = np.flatnonzero(matrix.sum(axis=1) == 0)
    zero_cols = np.flatnonzero(matrix.sum(axis=0) == 0)
    if zero_rows.size:
        reasons.append(f"zero-row-{int(zero_rows[0])}")
    if zero_cols.size:
        reasons.append(f"zero-column-{int(zero_cols[0])}")
    if not is_irreducible([matrix]):
        reasons.append("reducible")
    if (matrix.sum(axis=0) == 1).all() and (matrix.sum(axis=1) == 1).all():
        reasons.append("permutation")
    return SimplicityVerdict(simple=not reasons, reasons=tuple(reasons))


def load_rank1_system(source: Union[str, Path]) -> TransitionSystem:
    """A rank 1 system from a graph file or a matrix triplet file."""
    text = Path(source).read_text(encoding="utf-8")
    directive = first_directive(text)
    if directive == "vertices":
        graph = parse_graph(text)
        report = validate_graph(graph)
        if not report.passed:
            raise DomainError(f"invalid graph {source}: {report.render()}")
        return graph_to_matrix(graph)
    if directive == "matrix":
        name, matrix = read_matrix(text)
        if matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f"matrix {name} is not square: {matrix.shape}")
        labels = tuple(str(i) for i in range(matrix.shape[0]))
        return TransitionSystem(labels=labels, matrices=(matrix,))
    raise ParseError(f"{source}: expected a graph or matrix file, found directive {directive!r}")
