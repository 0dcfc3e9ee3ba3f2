import numpy as np
import pytest
from src.errors import ConditionRefusedError, DomainError
from src.ktheory import (
    building_k_theory,
    divisibility_diagnostics,
    k_theory_rank1,
    k_theory_rank2,
    kunneth_check,
    kunneth_predict,
    tensor_system,
)
from src.tiles import TransitionSystem
from src.zlin import AbelianGroup
from tests.conftest import F2_MATRIX, THETA_MATRIX

C1_GROUP = "(Z/2)^4 (+) Z/3"


def _rank1(matrix) -> TransitionSystem:
    return TransitionSystem(labels=tuple(str(i) for i in range(matrix.shape[0])), matrices=(matrix,))


@pytest.mark.parametrize("matrix", [F2_MATRIX, THETA_MATRIX])
def test_free_group_boundaries(matrix):
    result = k_theory_rank1(matrix)
    assert result.k0 == AbelianGroup.free(2)
    assert result.k1 == AbelianGroup.free(2)
    assert result.identity_order == 1


def test_full_shift_on_two_letters_is_trivial():
    result = k_theory_rank1(np.ones((2, 2), dtype=np.int64))
    assert result.k0.is_trivial
    assert result.k1.is_trivial
    assert "K0=0\nK1=0" in result.render()


def test_rank1_rejects_non_square():
    with pytest.raises(DomainError):
        k_theory_rank1(np.ones((2, 3), dtype=np.int64))


def test_c1_building_k_theory(c1_system):
    result = building_k_theory(c1_system)
    assert str(result.k0) == C1_GROUP
    assert str(result.k1) == C1_GROUP
    assert result.k0.torsion == (2, 2, 2, 6)
    assert result.identity_order == 1
    assert result.diagnostic("building_k0_eq_k1") == "pass"
    assert result.diagnostic("order_divides_q2_minus_1") == "pass"
    assert result.diagnostic("order_multiple_of_q_minus_1_rule") == "pass"
    assert result.diagnostic("nonzero_identity_class") == "n/a"
    assert result.diagnostic("identity_order_matches_experiment") == "observed"

    text = result.render()
    assert "K0=(Z/2)^4 (+) Z/3" in text
    assert "K0_invariant_factors=2,2,2,6" in text
    assert "order_of_identity=1" in text


def test_c1_generic_rank2_matches_building_formula(c1_system):
    m1, m2 = c1_system.matrices
    generic = k_theory_rank2(m1, m2)
    building = building_k_theory(c1_system)
    assert generic.k0 == building.k0
    assert generic.k1 == building.k1


def test_threads_do_not_change_the_result(c1_system):
    assert building_k_theory(c1_system, threads=2).render() == building_k_theory(c1_system, threads=1).render()


def test_building_k_theory_needs_a_building_system():
    f2 = _rank1(F2_MATRIX)
    with pytest.raises(DomainError):
        building_k_theory(f2)
    with pytest.raises(DomainError):
        building_k_theory(tensor_system(f2, f2))


def test_tensor_product_of_free_groups():
    f2 = _rank1(F2_MATRIX)
    system = tensor_system(f2, f2)
    assert system.size == 16
    assert system.labels[1] == "0|1"

    result = kunneth_check(f2, f2)
    assert result.k0 == AbelianGroup.free(8)
    assert result.k1 == AbelianGroup.free(8)
    assert result.diagnostic("kunneth") == "pass"
    assert "diagnostic kunneth=pass" in result.render()


def test_kunneth_prediction():
    z, z2, z3 = AbelianGroup.free(1), AbelianGroup.cyclic(2), AbelianGroup.cyclic(3)
    prediction = kunneth_predict((z3, z), (z2, z))
    assert prediction.resolved
    assert prediction.k0 == z
    assert prediction.k1 == AbelianGroup.cyclic(6)

    unresolved = kunneth_predict((z2, z), (z2, z))
    assert not unresolved.resolved
    assert AbelianGroup.cyclic(2) in unresolved.tor_terms


def test_failing_conditions_refuse_rank2():
    identity = np.identity(2, dtype=np.int64)
    with pytest.raises(ConditionRefusedError) as excinfo:
        k_theory_rank2(identity, identity.copy())
    assert excinfo.value.condition == "H2"


def test_acknowledged_conditions_are_recorded():
    identity = np.identity(2, dtype=np.int64)
    result = k_theory_rank2(identity, identity.copy(), acknowledge_conditions=True)
    assert result.k0 == AbelianGroup.free(4)
    assert result.identity_order == 0
    assert result.render_order() == "infinite"
    assert result.diagnostic("h_conditions") == "overridden"


def test_divisibility_diagnostics():
    statuses = {d.name: d.status for d in divisibility_diagnostics(3, 2)}
    assert statuses == {
        "order_divides_q2_minus_1": "pass",
        "order_multiple_of_q_minus_1_rule": "pass",
        "nonzero_identity_class": "pass",
        "identity_order_matches_experiment": "observed",
    }

    # q = 4 gives the rule (q - 1) / 3 = 1
    statuses = {d.name: d.status for d in divisibility_diagnostics(4, 5)}
    assert statuses["order_divides_q2_minus_1"] == "pass"
    assert statuses["nonzero_identity_class"] == "n/a"
    assert statuses["identity_order_matches_experiment"] == "n/a"

    statuses = {d.name: d.status for d in divisibility_diagnostics(3, 0)}
    assert statuses["order_divides_q2_minus_1"] == "fail"
    assert statuses["order_multiple_of_q_minus_1_rule"] == "fail"
