"""
Finite projective planes of order q and point-line correspondences.

Points and lines are 0-based integer ids; a line is stored as the sorted
tuple of the points on it, so downstream matrices are bit-reproducible.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from sympy import isprime
from src.errors import DomainError, ParseError, UnsupportedOrderError
from src.formats import parse_int, render, tokenize_lines
from src.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validation: pass, or the first violated axiom with a witness."""

    passed: bool
    axiom: Optional[str] = None
    witness: Tuple = ()
    warnings: Tuple[str, ...] = ()

    @classmethod
    def ok(cls, warnings: Sequence[str] = ()) -> "ValidationReport":
        return cls(True, warnings=tuple(warnings))

    @classmethod
    def fail(cls, axiom: str, *witness) -> "ValidationReport":
        return cls(False, axiom, tuple(witness))

    def render(self) -> str:
        if self.passed:
            return "pass"
        witness = " ".join(str(w) for w in self.witness)
        return f"fail axiom=\"{self.axiom}\" witness={witness or '-'}"


@dataclass(frozen=True)
class ProjectivePlane:
    """Incidence structure (P, L) of order q; lines are sorted point tuples."""

    order: int
    num_points: int
    lines: Tuple[Tuple[int, ...], ...]
    _through: Dict[int, Tuple[int, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        through: Dict[int, List[int]] = {p: [] for p in range(self.num_points)}
        for line_id, points in enumerate(self.lines):
            for p in points:
                through.setdefault(p, []).append(line_id)
        object.__setattr__(self, "_through", {p: tuple(ls) for p, ls in through.items()})

    @property
    def num_lines(self) -> int:
        return len(self.lines)

    def points_on(self, line: int) -> Tuple[int, ...]:
        return self.lines[line]

    def lines_through(self, point: int) -> Tuple[int, ...]:
        return self._through.get(point, ())

    def incident(self, point: int, line: int) -> bool:
        return point in self.lines[line]

    def line_through(self, p1: int, p2: int) -> int:
        """The unique line on two distinct points."""
        common = set(self.lines_through(p1)) & set(self.lines_through(p2))
        if p1 == p2 or len(common) != 1:
            raise DomainError(f"points {p1}, {p2} do not determine a unique line")
        return common.pop()

    def meet(self, l1: int, l2: int) -> int:
        """The unique point on two distinct lines."""
        common = set(self.lines[l1]) & set(self.lines[l2])
        if l1 == l2 or len(common) != 1:
            raise DomainError(f"lines {l1}, {l2} do not meet in a unique point")
        return common.pop()


@dataclass(frozen=True)
class PointLineCorrespondence:
    """A bijection lambda: P -> L, stored as lambda_[x] = line id."""

    plane: ProjectivePlane
    lambda_: Tuple[int, ...]

    def line_of(self, point: int) -> Tuple[int, ...]:
        """Points of the line lambda(point)."""
        return self.plane.lines[self.lambda_[point]]


def plane_from_lines(order: int, lines: Sequence[Sequence[int]], num_points: Optional[int] = None) -> ProjectivePlane:
    """Build a plane from point sets, keeping the given line order."""
    normalized = tuple(tuple(sorted(set(line))) for line in lines)
    if num_points is None:
        num_points = order * order + order + 1
    return ProjectivePlane(order=order, num_points=num_points, lines=normalized)


def _normalized_vectors(q: int) -> List[Tuple[int, int, int]]:
    """Homogeneous coordinates over GF(q) with first nonzero entry 1, lexicographic."""
    vectors = []
    for v in itertools.product(range(q), repeat=3):
        nonzero = [c for c in v if c]
        if nonzero and nonzero[0] == 1:
            vectors.append(v)
    return sorted(vectors)


def build_pg2(q: int) -> ProjectivePlane:
    """
    Construct PG(2, q) over the prime field.

    Points and lines are both indexed by normalized homogeneous vectors in
    lexicographic order; point p lies on line l iff p . l = 0 mod q.

    Args:
        q: Prime order

    Returns:
        ProjectivePlane passing validate_plane
    """
    if q < 2:
        raise DomainError(f"plane order must be at least 2, got {q}")
    if not isprime(q):
        raise UnsupportedOrderError(
            f"order {q} is not prime; prime-power planes must be ingested as incidence tables"
        )

    vectors = _normalized_vectors(q)
    lines = []
    for l in vectors:
        lines.append(tuple(
            i for i, p in enumerate(vectors)
            if (p[0] * l[0] + p[1] * l[1] + p[2] * l[2]) % q == 0
        ))
    logger.info(f"Built PG(2,{q}): {len(vectors)} points, {len(lines)} lines")
    return ProjectivePlane(order=q, num_points=len(vectors), lines=tuple(lines))


def validate_plane(plane: ProjectivePlane) -> ValidationReport:
    """
    Check the counting axioms and both uniqueness axioms exhaustively.

    The report names the first violated axiom in this order: point count,
    line count, points per line, lines per point, two points on one line,
    two lines meeting in one point.
    """
    q = plane.order
    n = q * q + q + 1
    if q < 1:
        return ValidationReport.fail("order must be positive", q)
    if plane.num_points != n:
        return ValidationReport.fail("point count", plane.num_points, n)
    if plane.num_lines != n:
        return ValidationReport.fail("line count", plane.num_lines, n)

    for line_id, points in enumerate(plane.lines):
        if any(p < 0 or p >= n for p in points):
            return ValidationReport.fail("point id out of range", line_id)
        if len(points) != q + 1:
            return ValidationReport.fail(f"line with {len(points)} points", line_id)
    for point in range(n):
        count = len(plane.lines_through(point))
        if count != q + 1:
            return ValidationReport.fail(f"point on {count} lines", point)

    # Two distinct points on exactly one common line
    for p1, p2 in itertools.combinations(range(n), 2):
        common = set(plane.lines_through(p1)) & set(plane.lines_through(p2))
        if len(common) != 1:
            return ValidationReport.fail(f"two points on {len(common)} common lines", p1, p2)
    for l1, l2 in itertools.combinations(range(n), 2):
        common = set(plane.lines[l1]) & set(plane.lines[l2])
        if len(common) != 1:
            return ValidationReport.fail(f"two lines meeting in {len(common)} points", l1, l2)

    logger.debug(f"Plane of order {q} passed validation")
    return ValidationReport.ok()


def default_correspondence(plane: ProjectivePlane) -> PointLineCorrespondence:
    """lambda(i) = line i."""
    return PointLineCorrespondence(plane=plane, lambda_=tuple(range(plane.num_points)))


def validate_correspondence(corr: PointLineCorrespondence) -> ValidationReport:
    """Plane axioms plus bijectivity of lambda."""
    report = validate_plane(corr.plane)
    if not report.passed:
        return report
    n = corr.plane.num_points
    if len(corr.lambda_) != n:
        return ValidationReport.fail("lambda not total", len(corr.lambda_), n)
    seen: Dict[int, int] = {}
    for point, line in enumerate(corr.lambda_):
        if not 0 <= line < corr.plane.num_lines:
            return ValidationReport.fail("lambda image out of range", point, line)
        if line in seen:
            return ValidationReport.fail("lambda not injective", seen[line], point)
        seen[line] = point
    return ValidationReport.ok()


# ---------------------------------------------------------------------------
# Incidence-table and correspondence files
# ---------------------------------------------------------------------------

def _parse_header(tokens: List[str], line_number: int) -> int:
    if len(tokens) != 3 or tokens[:2] != ["plane", "q"]:
        raise ParseError("expected header 'plane q <q>'", line_number)
    return parse_int(tokens[2], line_number, "q")


def parse_plane(text: str) -> ProjectivePlane:
    """Parse an incidence table: `plane q <q>` then `line <id> <point-id> ...` lines."""
    order = None
    lines: Dict[int, Tuple[int, ...]] = {}
    for line_number, tokens in tokenize_lines(text):
        if order is None:
            order = _parse_header(tokens, line_number)
            continue
        if tokens[0] != "line" or len(tokens) < 2:
            raise ParseError(f"expected 'line <id> <points>', got {tokens[0]!r}", line_number)
        line_id = parse_int(tokens[1], line_number, "line id")
        if line_id in lines:
            raise ParseError(f"duplicate line id {line_id}", line_number)
        lines[line_id] = tuple(parse_int(t, line_number, "point id") for t in tokens[2:])
    if order is None:
        raise ParseError("missing 'plane q <q>' header")
    if sorted(lines) != list(range(len(lines))):
        raise ParseError("line ids must be consecutive from 0")
    return plane_from_lines(order, [lines[i] for i in range(len(lines))])


def serialize_plane(plane: ProjectivePlane) -> str:
    body = [f"plane q {plane.order}"]
    body += [f"line {i} " + " ".join(map(str, points)) for i, points in enumerate(plane.lines)]
    return render(body)


def parse_correspondence(text: str) -> PointLineCorrespondence:
    """
    Parse a lambda file: `plane q <q>` then `lambda <point-id> <point-id> ...`.

    Each lambda line gives the point set of the line lambda(x); the plane is
    the line system formed by these sets, in point order.
    """
    order = None
    images: Dict[int, Tuple[int, ...]] = {}
    for line_number, tokens in tokenize_lines(text):
        if order is None:
            order = _parse_header(tokens, line_number)
            continue
        if tokens[0] != "lambda" or len(tokens) < 2:
            raise ParseError(f"expected 'lambda <point> <points>', got {tokens[0]!r}", line_number)
        point = parse_int(tokens[1], line_number, "point id")
        if point in images:
            raise ParseError(f"duplicate lambda entry for point {point}", line_number)
        images[point] = tuple(parse_int(t, line_number, "point id") for t in tokens[2:])
    if order is None:
        raise ParseError("missing 'plane q <q>' header")
    if sorted(images) != list(range(len(images))):
        raise ParseError("lambda entries must cover points 0..n-1")
    plane = plane_from_lines(order, [images[p] for p in range(len(images))])
    return default_correspondence(plane)


def serialize_correspondence(corr: PointLineCorrespondence) -> str:
    body = [f"plane q {corr.plane.order}"]
    body += [
        f"lambda {p} " + " ".join(map(str, corr.line_of(p)))
        for p in range(corr.plane.num_points)
    ]
    return render(body)
