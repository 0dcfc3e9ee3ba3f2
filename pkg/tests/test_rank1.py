import numpy as np
import pytest
from src.errors import DomainError, ParseError
from src.rank1 import (
    FiniteGraph,
    ck_simplicity_check,
    edge_alphabet,
    graph_to_matrix,
    load_rank1_system,
    parse_graph,
    serialize_graph,
    validate_graph,
)
from tests.conftest import F2_MATRIX, THETA_MATRIX


def _load(data_dir, name) -> FiniteGraph:
    return parse_graph((data_dir / name).read_text(encoding="utf-8"))


def test_bouquet_matrix(data_dir):
    system = graph_to_matrix(_load(data_dir, "bouquet2.g"))
    assert system.labels == ("a", "a^-1", "b", "b^-1")
    assert np.array_equal(system.matrices[0], F2_MATRIX)


def test_theta_matrix(data_dir):
    system = graph_to_matrix(_load(data_dir, "theta3.g"))
    assert np.array_equal(system.matrices[0], THETA_MATRIX)


def test_single_loop_gives_identity(data_dir):
    graph = _load(data_dir, "loop1.g")
    report = validate_graph(graph)
    assert report.passed
    assert report.warnings == ("vertex 0 has degree 2 < 3",)
    matrix = graph_to_matrix(graph).matrices[0]
    assert np.array_equal(matrix, np.identity(2, dtype=np.int64))


@pytest.mark.parametrize("name", ["bouquet2.g", "theta3.g"])
def test_reversal_symmetry(data_dir, name):
    graph = _load(data_dir, name)
    matrix = graph_to_matrix(graph).matrices[0]
    alphabet = edge_alphabet(graph)
    n = matrix.shape[0]
    for x in range(n):
        for y in range(n):
            assert matrix[y, x] == matrix[alphabet.reverse(x), alphabet.reverse(y)]
    degrees = [graph.degree(v) for v in range(graph.num_vertices)]
    assert int(matrix.sum()) == sum(d * (d - 1) for d in degrees)


def test_decoration_is_outgoing_edges_of_base_vertex(data_dir):
    system = graph_to_matrix(_load(data_dir, "theta3.g"), base_vertex=1)
    assert system.decoration.names == ("a^-1", "b^-1", "c^-1")
    assert system.decoration.delta == (1, 3, 5)


def test_simplicity():
    assert ck_simplicity_check(F2_MATRIX).simple
    assert ck_simplicity_check(THETA_MATRIX).render() == "simplicity=simple reasons=-"

    identity = ck_simplicity_check(np.identity(2, dtype=np.int64))
    assert not identity.simple
    assert identity.reasons == ("reducible", "permutation")

    cycle = ck_simplicity_check(np.array([[0, 1], [1, 0]], dtype=np.int64))
    assert cycle.reasons == ("permutation",)

    degenerate = ck_simplicity_check(np.array([[1, 0], [1, 0]], dtype=np.int64))
    assert "zero-column-1" in degenerate.reasons


def test_simplicity_rejects_non_binary_matrices():
    with pytest.raises(DomainError):
        ck_simplicity_check(np.array([[2]], dtype=np.int64))


def test_disconnected_graph_fails():
    graph = parse_graph("vertices 3\nedge a 0 1\n")
    report = validate_graph(graph)
    assert not report.passed
    assert report.axiom == "graph not connected"
    assert report.witness == (2,)


def test_graph_without_edges_fails():
    assert validate_graph(parse_graph("vertices 1\n")).axiom == "graph has no edges"


def test_graph_parse_errors():
    with pytest.raises(ParseError) as excinfo:
        parse_graph("vertices 2\nedge a 0 2\n")
    assert excinfo.value.line_number == 2
    with pytest.raises(ParseError):
        parse_graph("vertices 2\nedge a 0 1\nedge a 1 0\n")
    with pytest.raises(ParseError):
        parse_graph("edge a 0 1\n")


def test_graph_round_trip(data_dir):
    graph = _load(data_dir, "theta3.g")
    assert parse_graph(serialize_graph(graph)) == graph


def test_load_rank1_system_sniffs_the_format(data_dir):
    from_graph = load_rank1_system(data_dir / "bouquet2.g")
    from_matrix = load_rank1_system(data_dir / "f2.m")
    assert np.array_equal(from_graph.matrices[0], from_matrix.matrices[0])
    assert from_matrix.labels == ("0", "1", "2", "3")


def test_load_rank1_system_rejects_other_files(data_dir):
    with pytest.raises(ParseError):
        load_rank1_system(data_dir / "c1.tri")
