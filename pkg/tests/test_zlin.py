import math
import random
import pytest
import src.zlin as zlin
from src.config import get_settings
from src.errors import DomainError, InternalConsistencyError
from src.ktheory import block_matrices
from src.zlin import (
    AbelianGroup,
    IntegerMatrix,
    cokernel,
    direct_sum,
    element_order_in_cokernel,
    integer_rank,
    modular_rank,
    smith_normal_form,
)
from tests.conftest import F2_MATRIX
from tests.oracles import bareiss_det, brute_force_order, gcd_of_minors, in_lattice, lattice_basis


def _random_matrix(rng: random.Random, rows: int, cols: int, low: int = -5, high: int = 5) -> IntegerMatrix:
    return IntegerMatrix.from_rows([[rng.randint(low, high) for _ in range(cols)] for _ in range(rows)], cols)


def _random_sparse(rng: random.Random, rows: int, cols: int, density: float) -> IntegerMatrix:
    entries = {}
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                entries[(i, j)] = rng.choice([-2, -1, 1, 1, 2])
    return IntegerMatrix(rows, cols, entries)


def test_diagonal_two_three():
    snf = smith_normal_form(IntegerMatrix.from_rows([[2, 0], [0, 3]]))
    assert snf.invariant_factors == (1, 6)
    assert cokernel(IntegerMatrix.from_rows([[2, 0], [0, 3]])) == AbelianGroup(0, (6,))


def test_zero_matrix():
    zero = IntegerMatrix(2, 3)
    assert smith_normal_form(zero).invariant_factors == ()
    assert cokernel(zero) == AbelianGroup.free(2)


def test_identity_minus_f2():
    matrix = IntegerMatrix.identity(4) - IntegerMatrix.from_array(F2_MATRIX)
    snf = smith_normal_form(matrix)
    assert snf.rank == 2
    assert snf.invariant_factors == (1, 1)
    assert cokernel(matrix) == AbelianGroup.free(2)


def test_negative_pivots_are_normalised():
    snf = smith_normal_form(IntegerMatrix.from_rows([[-4, 0], [0, -6]]))
    assert snf.invariant_factors == (2, 12)


def test_transforms_reproduce_the_diagonal():
    rng = random.Random(11)
    for _ in range(50):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        matrix = _random_matrix(rng, rows, cols)
        snf = smith_normal_form(matrix, with_transforms=True)
        assert snf.U @ matrix @ snf.V == snf.diagonal()
        assert abs(bareiss_det(snf.U.to_rows())) == 1
        assert abs(bareiss_det(snf.V.to_rows())) == 1


def test_invariant_factors_against_minors():
    rng = random.Random(2024)
    for _ in range(500):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        matrix = _random_matrix(rng, rows, cols, -3, 3)
        dense = matrix.to_rows()
        snf = smith_normal_form(matrix, with_transforms=True)
        factors = snf.invariant_factors
        assert snf.U @ matrix @ snf.V == snf.diagonal()
        for d, e in zip(factors, factors[1:]):
            assert e % d == 0
        for k in range(1, min(rows, cols) + 1):
            expected = gcd_of_minors(dense, k)
            if k <= len(factors):
                assert math.prod(factors[:k]) == expected
            else:
                assert expected == 0


def test_element_orders_against_brute_force():
    rng = random.Random(99)
    for _ in range(500):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        matrix = _random_matrix(rng, rows, cols, -3, 3)
        vector = [rng.randint(-3, 3) for _ in range(rows)]
        order = element_order_in_cokernel(matrix, vector)
        brute = brute_force_order(matrix.to_rows(), vector)
        if order == 0 or order > 200:
            assert brute is None
        else:
            assert brute == order
        if order > 0:
            columns = [list(col) for col in zip(*matrix.to_rows())]
            assert in_lattice(lattice_basis(columns, rows), [order * x for x in vector])


def test_element_orders():
    diag = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    assert element_order_in_cokernel(diag, [1, 1]) == 6
    assert element_order_in_cokernel(diag, [0, 3]) == 1
    column = IntegerMatrix.from_rows([[2], [0]])
    assert element_order_in_cokernel(column, [0, 1]) == 0
    assert element_order_in_cokernel(column, [1, 0]) == 2
    with pytest.raises(DomainError):
        element_order_in_cokernel(column, [1])


def test_sparse_phase_agrees_with_dense_elimination(c1_system):
    forward, backward = block_matrices(*c1_system.matrices)
    for matrix in (forward, backward):
        assert matrix.density() < 0.25
        sparse = smith_normal_form(matrix)
        dense = smith_normal_form(matrix, with_transforms=True)
        assert sparse.invariant_factors == dense.invariant_factors

    rng = random.Random(5)
    for _ in range(40):
        matrix = _random_sparse(rng, rng.randint(5, 25), rng.randint(5, 25), 0.1)
        assert (
            smith_normal_form(matrix).invariant_factors
            == smith_normal_form(matrix, with_transforms=True).invariant_factors
        )


def test_modular_and_integer_rank():
    rng = random.Random(3)
    for _ in range(100):
        matrix = _random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        rank = smith_normal_form(matrix).rank
        assert modular_rank(matrix) <= rank
        assert integer_rank(matrix) == rank

    seven = IntegerMatrix.from_rows([[7]])
    assert modular_rank(seven, prime=7) == 0
    assert integer_rank(seven) == 1
    with pytest.raises(DomainError):
        modular_rank(seven, prime=2**31 + 11)


def test_precheck_agrees_with_exact_rank(c1_system):
    forward, backward = block_matrices(*c1_system.matrices)
    for matrix in (forward, backward):
        checked = smith_normal_form(matrix, precheck=True)
        assert checked.invariant_factors == smith_normal_form(matrix).invariant_factors
        assert modular_rank(matrix) <= checked.rank


def test_precheck_flags_an_exact_rank_below_the_modular_rank(monkeypatch):
    matrix = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    monkeypatch.setattr(zlin, "modular_rank", lambda m, prime=None: 3)
    with pytest.raises(InternalConsistencyError):
        smith_normal_form(matrix, precheck=True)


def test_precheck_is_skipped_above_the_size_cap(monkeypatch):
    def fail(m, prime=None):
        raise AssertionError("modular rank computed above the cap")

    monkeypatch.setattr(get_settings(), "precheck_max_entries", 3)
    monkeypatch.setattr(zlin, "modular_rank", fail)
    matrix = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    assert smith_normal_form(matrix, precheck=True).invariant_factors == (1, 6)


def test_integer_matrix_operations():
    a = IntegerMatrix.from_rows([[1, 2], [0, 1]])
    b = IntegerMatrix.from_rows([[0, 1], [1, 0]])
    assert (a @ b).to_rows() == [[2, 1], [1, 0]]
    assert a.transpose().to_rows() == [[1, 0], [2, 1]]
    assert (a - a).entries == {}
    assert IntegerMatrix.hstack([a, b]).to_rows() == [[1, 2, 0, 1], [0, 1, 1, 0]]
    with pytest.raises(DomainError):
        IntegerMatrix(1, 1, {(1, 0): 1})


def test_group_canonical_form():
    assert AbelianGroup(0, (2, 3)) == AbelianGroup(0, (6,))
    group = AbelianGroup(0, (6, 2, 2, 2))
    assert group.torsion == (2, 2, 2, 6)
    assert group.render() == "(Z/2)^4 (+) Z/3"
    assert group.invariant_factors_text() == "2,2,2,6"
    assert group.torsion_order == 48
    assert AbelianGroup(0, (12,)).elementary_divisors() == [3, 4]
    assert AbelianGroup(0, (1, 1)).is_trivial


def test_group_rendering():
    assert AbelianGroup().render() == "0"
    assert AbelianGroup().invariant_factors_text() == "-"
    assert AbelianGroup.free(1).render() == "Z"
    assert AbelianGroup.free(2).render() == "Z^2"
    assert str(AbelianGroup(2, (4,))) == "Z^2 (+) Z/4"
    assert AbelianGroup.cyclic(0) == AbelianGroup.free(1)
    assert AbelianGroup(1, (3,)).cyclic_factors() == [0, 3]


def test_group_operations():
    z4, z6, z = AbelianGroup.cyclic(4), AbelianGroup.cyclic(6), AbelianGroup.free(1)
    assert z4.tensor(z6) == AbelianGroup.cyclic(2)
    assert z.tensor(AbelianGroup.cyclic(3)) == AbelianGroup.cyclic(3)
    assert AbelianGroup.free(2).tensor(AbelianGroup.free(3)) == AbelianGroup.free(6)
    assert z4.tor(z6) == AbelianGroup.cyclic(2)
    assert z.tor(z6).is_trivial
    assert direct_sum([z4, z6, z]) == AbelianGroup(1, (2, 12))
    assert (z4.direct_sum(z)).torsion_part() == z4
