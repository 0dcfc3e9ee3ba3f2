import networkx as nx
import pytest
from src.errors import DomainError, ParseError, UnsupportedOrderError
from src.plane import build_pg2, default_correspondence, parse_correspondence, validate_plane
from src.presentation import (
    derived_correspondence,
    derived_plane,
    ensure_valid,
    link_graph,
    parse_presentation,
    search_presentations,
    serialize_presentation,
    validate_triangle_presentation,
)


def test_c1_parses_to_21_triples(c1_text):
    presentation = parse_presentation(c1_text)
    assert presentation.q == 2
    assert presentation.num_generators == 7
    assert len(presentation.triples) == 21
    assert not presentation.validated


def test_c1_lambda_of_x0(c1):
    assert c1.lambda_derived(0) == frozenset({0, 2, 6})


def test_c1_is_valid(c1):
    assert validate_triangle_presentation(c1).passed
    assert c1.validated


def test_relator_of_length_two(data_dir):
    with pytest.raises(ParseError) as excinfo:
        parse_presentation((data_dir / "broken.tri").read_text(encoding="utf-8"))
    assert excinfo.value.line_number == 5
    assert "length 2" in str(excinfo.value)


def test_undeclared_generator():
    with pytest.raises(ParseError) as excinfo:
        parse_presentation("q 2\ngenerators x0 x1\nrelator x0 x1 x9\n")
    assert "x9" in str(excinfo.value)
    assert excinfo.value.line_number == 3


def test_replaced_relator_fails(c1_text):
    broken = parse_presentation(c1_text.replace("relator x0 x2 x3", "relator x0 x2 x4"))
    report = validate_triangle_presentation(broken)
    assert not report.passed
    assert report.witness
    with pytest.raises(DomainError):
        ensure_valid(broken)


def test_empty_triple_set_fails_completion():
    empty = parse_presentation("q 2\ngenerators x0 x1 x2 x3 x4 x5 x6\n")
    report = validate_triangle_presentation(empty)
    assert not report.passed
    assert "completion" in report.axiom


def test_constant_relator_is_stored_once():
    presentation = parse_presentation("q 2\ngenerators a b c d e f g\nrelator a a a\n")
    assert presentation.triples == frozenset({(0, 0, 0)})


def test_serialize_round_trip(c1):
    text = serialize_presentation(c1)
    again = parse_presentation(text)
    assert again == c1
    assert serialize_presentation(again) == text
    assert "relator x0 x0 x6" in text


def test_pair_map_is_a_bijection(c1):
    pairs = {(x, y) for x, y, _ in c1.triples}
    shifted = {(y, z) for _, y, z in c1.triples}
    assert len(pairs) == 21
    assert pairs == shifted


def test_derived_plane(c1):
    plane = derived_plane(c1)
    assert validate_plane(plane).passed
    assert derived_correspondence(c1).line_of(1) == (2, 3, 5)


def test_link_graph_is_the_incidence_graph(c1):
    graph = link_graph(c1)
    assert graph.number_of_nodes() == 14
    assert graph.number_of_edges() == 21
    assert {d for _, d in graph.degree()} == {3}
    assert nx.is_bipartite(graph)
    assert nx.girth(graph) == 6


def test_search_rediscovers_c1(data_dir, c1):
    corr = parse_correspondence((data_dir / "c1.lambda").read_text(encoding="utf-8"))
    result = search_presentations(corr, limit=1000, timeout=120)
    assert not result.partial
    assert result.presentations
    assert any(p.triples == c1.triples for p in result.presentations)
    for presentation in result.presentations:
        assert validate_triangle_presentation(presentation).passed
        assert derived_plane(presentation).lines == corr.plane.lines


def test_search_backtracks_over_constant_triples(data_dir, c1):
    corr = parse_correspondence((data_dir / "c1.lambda").read_text(encoding="utf-8"))
    # x0 lies on lambda(x0), so (x0, x0, x0) is tried and undone
    assert 0 in corr.line_of(0)
    result = search_presentations(corr, limit=10)
    assert not result.partial
    assert [p.triples for p in result.presentations] == [c1.triples]


def test_search_respects_limit_and_order(data_dir):
    corr = parse_correspondence((data_dir / "c1.lambda").read_text(encoding="utf-8"))
    first = search_presentations(corr, limit=10)
    second = search_presentations(corr, limit=10)
    assert 1 <= len(first.presentations) <= 10
    assert [p.triples for p in first.presentations] == [p.triples for p in second.presentations]


def test_search_limit_zero(data_dir):
    corr = parse_correspondence((data_dir / "c1.lambda").read_text(encoding="utf-8"))
    assert search_presentations(corr, limit=0).presentations == []


def test_search_refuses_large_orders():
    with pytest.raises(UnsupportedOrderError):
        search_presentations(default_correspondence(build_pg2(5)), limit=1)
