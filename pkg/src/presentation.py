"""
Triangle presentations of Ã₂ groups: parsing, validation, and a
backtracking search over completions for small orders.
"""

import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple
import networkx as nx
from src.config import get_settings
from src.errors import DomainError, ParseError, UnsupportedOrderError
from src.formats import parse_int, render, tokenize_lines
from src.logger import get_logger
from src.plane import (
    PointLineCorrespondence,
    ValidationReport,
    default_correspondence,
    plane_from_lines,
    validate_correspondence,
    validate_plane,
)

logger = get_logger(__name__)

Triple = Tuple[int, int, int]


def cyclic_shifts(triple: Triple) -> FrozenSet[Triple]:
    x, y, z = triple
    return frozenset({(x, y, z), (y, z, x), (z, x, y)})


def canonical_rotation(triple: Triple) -> Triple:
    return min(cyclic_shifts(triple))


@dataclass(frozen=True)
class TrianglePresentation:
    """
    Generators P (by name, indexed 0..n-1) and the cyclically closed triple set T.

    `validated` is set only by ensure_valid / the search, never by parsing.
    """

    q: int
    generators: Tuple[str, ...]
    triples: FrozenSet[Triple]
    validated: bool = field(default=False, compare=False)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    def lambda_derived(self, x: int) -> FrozenSet[int]:
        """{y : exists z with (x, y, z) in T}."""
        return frozenset(y for (a, y, _) in self.triples if a == x)

    def completions(self) -> Dict[Tuple[int, int], List[int]]:
        """(x, y) -> sorted list of z with (x, y, z) in T."""
        table: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        for x, y, z in sorted(self.triples):
            table[(x, y)].append(z)
        return dict(table)

    def complete(self, x: int, y: int) -> int:
        """The unique z with (x, y, z) in T."""
        zs = self.completions().get((x, y), [])
        if len(zs) != 1:
            raise DomainError(f"pair ({x}, {y}) has {len(zs)} completions")
        return zs[0]

    def relators(self) -> List[Triple]:
        """One canonical representative per cyclic class, sorted."""
        return sorted({canonical_rotation(t) for t in self.triples})

    def name(self, x: int) -> str:
        return self.generators[x]


def parse_presentation(text: str) -> TrianglePresentation:
    """
    Parse a presentation file.

    Grammar: `q <q>`, `generators <name> ...`, then one `relator a b c` line
    per relator. T is the set of all cyclic shifts of the listed relators.
    No validity check is performed here.
    """
    q: Optional[int] = None
    generators: Optional[Tuple[str, ...]] = None
    index: Dict[str, int] = {}
    triples = set()

    for line_number, tokens in tokenize_lines(text):
        directive = tokens[0]
        if directive == "q":
            if len(tokens) != 2:
                raise ParseError("expected 'q <order>'", line_number)
            q = parse_int(tokens[1], line_number, "q")
        elif directive == "generators":
            if generators is not None:
                raise ParseError("generators declared twice", line_number)
            generators = tuple(tokens[1:])
            if len(set(generators)) != len(generators):
                raise ParseError("duplicate generator name", line_number)
            index = {g: i for i, g in enumerate(generators)}
        elif directive == "relator":
            if generators is None:
                raise ParseError("relator before generators declaration", line_number)
            letters = tokens[1:]
            if len(letters) != 3:
                raise ParseError(f"relator must have length 3, got length {len(letters)}", line_number)
            for letter in letters:
                if letter not in index:
                    raise ParseError(f"undeclared generator {letter!r}", line_number)
            triples |= cyclic_shifts(tuple(index[letter] for letter in letters))
        else:
            raise ParseError(f"unknown directive {directive!r}", line_number)

    if q is None:
        raise ParseError("missing 'q' line")
    if generators is None:
        raise ParseError("missing 'generators' line")

    presentation = TrianglePresentation(q=q, generators=generators, triples=frozenset(triples))
    logger.info(f"Parsed presentation: q={q}, {len(generators)} generators, {len(triples)} ordered triples")
    return presentation


def serialize_presentation(presentation: TrianglePresentation) -> str:
    """Canonical file: least rotation of each relator class, sorted by index."""
    body = [f"q {presentation.q}", "generators " + " ".join(presentation.generators)]
    for relator in presentation.relators():
        body.append("relator " + " ".join(presentation.name(x) for x in relator))
    return render(body)


def validate_triangle_presentation(presentation: TrianglePresentation) -> ValidationReport:
    """
    Check cyclic closure, completion, the triple count and the derived plane.

    Failures carry a witness (a triple, a generator, or a pair).
    """
    q = presentation.q
    n = presentation.num_generators
    expected_points = q * q + q + 1
    if n != expected_points:
        return ValidationReport.fail("generator count", n, expected_points)

    for triple in sorted(presentation.triples):
        if any(not 0 <= x < n for x in triple):
            return ValidationReport.fail("generator index out of range", *triple)
        if not cyclic_shifts(triple) <= presentation.triples:
            return ValidationReport.fail("cyclic closure", *triple)

    completions = presentation.completions()
    for x in range(n):
        images = presentation.lambda_derived(x)
        if len(images) != q + 1:
            return ValidationReport.fail("completion: lambda size", x, len(images))
        for y in sorted(images):
            zs = completions[(x, y)]
            if len(zs) != 1:
                return ValidationReport.fail("completion uniqueness", x, y, *zs)

    expected_triples = (q + 1) * expected_points
    if len(presentation.triples) != expected_triples:
        return ValidationReport.fail("triple count", len(presentation.triples), expected_triples)

    lines = [presentation.lambda_derived(x) for x in range(n)]
    if len(set(lines)) != n:
        first = next(x for x in range(n) if lines.index(lines[x]) != x)
        return ValidationReport.fail("lambda not injective", lines.index(lines[first]), first)
    plane_report = validate_plane(derived_plane(presentation))
    if not plane_report.passed:
        return ValidationReport.fail(f"plane: {plane_report.axiom}", *plane_report.witness)

    return ValidationReport.ok()


def ensure_valid(presentation: TrianglePresentation) -> TrianglePresentation:
    """Return the presentation marked validated, or raise DomainError with the report."""
    if presentation.validated:
        return presentation
    report = validate_triangle_presentation(presentation)
    if not report.passed:
        logger.warning(f"Presentation failed validation: {report.render()}")
        raise DomainError(f"invalid triangle presentation: {report.render()}")
    return replace(presentation, validated=True)


def derived_plane(presentation: TrianglePresentation):
    """The plane whose line x is lambda_derived(x)."""
    n = presentation.num_generators
    return plane_from_lines(presentation.q, [presentation.lambda_derived(x) for x in range(n)], num_points=n)


def derived_correspondence(presentation: TrianglePresentation) -> PointLineCorrespondence:
    return default_correspondence(derived_plane(presentation))


def link_graph(presentation: TrianglePresentation) -> nx.Graph:
    """
    Bipartite graph of the neighbours of the identity vertex.

    Vertices ("p", y) for generators and ("l", x) for inverses x^-1, with an
    edge y -- x^-1 whenever y is in lambda(x); one edge per chamber at 1.
    """
    graph = nx.Graph()
    n = presentation.num_generators
    graph.add_nodes_from((("p", y) for y in range(n)), bipartite=0)
    graph.add_nodes_from((("l", x) for x in range(n)), bipartite=1)
    for x in range(n):
        for y in sorted(presentation.lambda_derived(x)):
            graph.add_edge(("p", y), ("l", x))
    return graph


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass
class SearchResult:
    presentations: List[TrianglePresentation]
    partial: bool = False
    explored: int = 0


class _CompletionSearch:
    """
    Depth-first search over completions (x, y) -> z.

    Pairs are processed in canonical index order and z in increasing order,
    so the output order is deterministic.
    """

    def __init__(self, corr: PointLineCorrespondence, limit: int, timeout: float):
        self.n = corr.plane.num_points
        self.q = corr.plane.order
        self.lines = [frozenset(corr.line_of(x)) for x in range(self.n)]
        self.pairs = [(x, y) for x in range(self.n) for y in sorted(self.lines[x])]
        self.assigned: Dict[Tuple[int, int], int] = {}
        self.limit = limit
        self.deadline = time.monotonic() + timeout
        self.result = SearchResult(presentations=[])

    def candidates(self, x: int, y: int) -> List[int]:
        """z with y in lambda(x), z in lambda(y), x in lambda(z), consistent with assignments."""
        found = []
        for z in sorted(self.lines[y]):
            if x not in self.lines[z]:
                continue
            if self.assigned.get((y, z), x) != x or self.assigned.get((z, x), y) != y:
                continue
            found.append(z)
        return found

    def run(self) -> SearchResult:
        if self.limit > 0:
            self._descend(0)
        return self.result

    def _descend(self, position: int) -> bool:
        """Returns True when the search must stop (limit or timeout)."""
        self.result.explored += 1
        if time.monotonic() > self.deadline:
            self.result.partial = True
            return True
        while position < len(self.pairs) and self.pairs[position] in self.assigned:
            position += 1
        if position == len(self.pairs):
            self._emit()
            return len(self.result.presentations) >= self.limit

        x, y = self.pairs[position]
        for z in self.candidates(x, y):
            # a constant triple (x, x, x) repeats one key three times
            new_keys = [key for key in dict.fromkeys(((x, y), (y, z), (z, x))) if key not in self.assigned]
            self.assigned[(x, y)] = z
            self.assigned[(y, z)] = x
            self.assigned[(z, x)] = y
            stop = self._descend(position + 1)
            for key in new_keys:
                del self.assigned[key]
            if stop:
                return True
        return False

    def _emit(self):
        triples = frozenset((x, y, z) for (x, y), z in self.assigned.items())
        generators = tuple(f"x{i}" for i in range(self.n))
        candidate = TrianglePresentation(q=self.q, generators=generators, triples=triples)
        report = validate_triangle_presentation(candidate)
        if report.passed:
            self.result.presentations.append(replace(candidate, validated=True))
        else:
            logger.debug(f"Discarded completion failing validation: {report.render()}")


def search_presentations(
    corr: PointLineCorrespondence,
    limit: int,
    timeout: Optional[float] = None,
) -> SearchResult:
    """
    Enumerate triangle presentations whose derived correspondence is `corr`.

    Args:
        corr: Validated point-line correspondence (lambda is fixed input)
        limit: Maximum number of presentations to return
        timeout: Seconds before the search stops with `partial` set

    Returns:
        SearchResult in deterministic order; every entry passes validation
    """
    settings = get_settings()
    if corr.plane.order > settings.search_max_order:
        raise UnsupportedOrderError(
            f"search supports q <= {settings.search_max_order}, got q={corr.plane.order}"
        )
    report = validate_correspondence(corr)
    if not report.passed:
        raise DomainError(f"invalid point-line correspondence: {report.render()}")

    timeout = timeout if timeout is not None else settings.search_timeout_seconds
    logger.info(f"Searching presentations: q={corr.plane.order}, limit={limit}, timeout={timeout}s")
    result = _CompletionSearch(corr, limit, timeout).run()
    logger.info(
        f"Search finished: {len(result.presentations)} found, "
        f"{result.explored} nodes explored, partial={result.partial}"
    )
    return result
