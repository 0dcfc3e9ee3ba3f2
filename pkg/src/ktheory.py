"""
K-theory of rank-1 and rank-2 Cuntz-Krieger systems.

K-groups are read off cokernels of I - M type matrices; the class of the
identity is the all-ones vector in the K0 presentation.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple
import numpy as np
from src.config import get_settings
from src.errors import DomainError, InternalConsistencyError
from src.logger import get_logger
from src.tiles import TransitionSystem
from src.words import HReport, check_conditions
from src.zlin import (
    AbelianGroup,
    IntegerMatrix,
    SmithDecomposition,
    element_order_in_cokernel,
    smith_normal_form,
)

logger = get_logger(__name__)

RANK2_CONDITIONS = ("H0", "H1a", "H1b", "H2", "H3")

PASS, FAIL, OBSERVED, NOT_APPLICABLE = "pass", "fail", "observed", "n/a"


@dataclass(frozen=True)
class Diagnostic:
    name: str
    status: str
    detail: str = ""

    def render(self) -> str:
        return f"diagnostic {self.name}={self.status}"


@dataclass(frozen=True)
class KTheoryResult:
    """
    K0, K1 and the order of [1].

    identity_order is None when not computed and 0 when [1] has infinite order.
    """

    k0: AbelianGroup
    k1: AbelianGroup
    identity_order: Optional[int] = None
    diagnostics: Tuple[Diagnostic, ...] = field(default_factory=tuple)

    def diagnostic(self, name: str) -> Optional[str]:
        for entry in self.diagnostics:
            if entry.name == name:
                return entry.status
        return None

    def with_diagnostics(self, *extra: Diagnostic) -> "KTheoryResult":
        return replace(self, diagnostics=self.diagnostics + tuple(extra))

    def render_order(self) -> str:
        if self.identity_order is None:
            return "not-computed"
        return "infinite" if self.identity_order == 0 else str(self.identity_order)

    def render(self) -> str:
        lines = [
            f"K0={self.k0}",
            f"K1={self.k1}",
            f"K0_invariant_factors={self.k0.invariant_factors_text()}",
            f"K1_invariant_factors={self.k1.invariant_factors_text()}",
            f"order_of_identity={self.render_order()}",
        ]
        lines += [entry.render() for entry in self.diagnostics]
        return "\n".join(lines)


def _to_integer(matrix: np.ndarray) -> IntegerMatrix:
    return IntegerMatrix.from_array(np.asarray(matrix, dtype=np.int64))


def _identity_minus(matrix: np.ndarray) -> IntegerMatrix:
    n = matrix.shape[0]
    return IntegerMatrix.identity(n) - _to_integer(matrix)


def _square(matrix: np.ndarray, what: str):
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"{what} must be square, got shape {matrix.shape}")


def _group_from(snf: SmithDecomposition) -> AbelianGroup:
    return AbelianGroup(snf.rows - snf.rank, tuple(d for d in snf.invariant_factors if d > 1))


def k_theory_rank1(matrix: np.ndarray) -> KTheoryResult:
    """
    K0 = coker(I - M^t), K1 = Z^(n - rank(I - M^t)).

    Args:
        matrix: Square {0,1} transition matrix

    Returns:
        KTheoryResult with the order of the all-ones class in K0
    """
    _square(matrix, "rank-1 matrix")
    n = matrix.shape[0]
    presentation = _identity_minus(matrix.T)
    snf = smith_normal_form(presentation, with_transforms=True, precheck=True)
    k0 = _group_from(snf)
    k1 = AbelianGroup.free(n - snf.rank)
    order = element_order_in_cokernel(presentation, [1] * n, snf=snf)
    logger.info(f"Rank-1 K-theory ({n} letters): K0={k0}, K1={k1}")
    return KTheoryResult(k0=k0, k1=k1, identity_order=order)


def block_matrices(m1: np.ndarray, m2: np.ndarray) -> Tuple[IntegerMatrix, IntegerMatrix]:
    """[I - M1 | I - M2] and [I - M1^t | I - M2^t]."""
    forward = IntegerMatrix.hstack([_identity_minus(m1), _identity_minus(m2)])
    backward = IntegerMatrix.hstack([_identity_minus(m1.T), _identity_minus(m2.T)])
    return forward, backward


def _cokernels(forward: IntegerMatrix, backward: IntegerMatrix, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=2) as executor:
            first = executor.submit(smith_normal_form, forward, with_transforms=True, precheck=True)
            second = executor.submit(smith_normal_form, backward, precheck=True)
            return first.result(), second.result()
    return (
        smith_normal_form(forward, with_transforms=True, precheck=True),
        smith_normal_form(backward, precheck=True),
    )


@dataclass(frozen=True)
class Rank2Computation:
    result: KTheoryResult
    forward: AbelianGroup
    backward: AbelianGroup


def _rank2(
    m1: np.ndarray,
    m2: np.ndarray,
    threads: Optional[int],
    h_report: Optional[HReport],
    acknowledge_conditions: bool,
) -> Rank2Computation:
    _square(m1, "M1")
    _square(m2, "M2")
    if m1.shape != m2.shape:
        raise DomainError(f"M1 {m1.shape} and M2 {m2.shape} differ in size")

    diagnostics: List[Diagnostic] = []
    if h_report is None:
        labels = tuple(str(i) for i in range(m1.shape[0]))
        h_report = check_conditions(TransitionSystem(labels=labels, matrices=(m1, m2)))
    if acknowledge_conditions and not h_report.passed(RANK2_CONDITIONS):
        logger.warning("Rank-2 K-theory computed with failing H-conditions by explicit override")
        diagnostics.append(Diagnostic("h_conditions", "overridden"))
    else:
        h_report.gate(RANK2_CONDITIONS)

    threads = threads if threads is not None else get_settings().threads
    n = m1.shape[0]
    forward, backward = block_matrices(m1, m2)
    snf_forward, snf_backward = _cokernels(forward, backward, threads)
    coker_forward = _group_from(snf_forward)
    coker_backward = _group_from(snf_backward)
    if coker_forward.free_rank != coker_backward.free_rank:
        logger.warning(
            f"Cokernel free ranks differ: {coker_forward.free_rank} vs {coker_backward.free_rank}"
        )

    rank = coker_forward.free_rank + coker_backward.free_rank
    k0 = AbelianGroup(rank, coker_forward.torsion)
    k1 = AbelianGroup(rank, coker_backward.torsion)
    order = element_order_in_cokernel(forward, [1] * n, snf=snf_forward)
    logger.info(f"Rank-2 K-theory ({n} letters): K0={k0}, K1={k1}, order of [1]={order or 'infinite'}")
    result = KTheoryResult(k0=k0, k1=k1, identity_order=order, diagnostics=tuple(diagnostics))
    return Rank2Computation(result=result, forward=coker_forward, backward=coker_backward)


def k_theory_rank2(
    m1: np.ndarray,
    m2: np.ndarray,
    threads: Optional[int] = None,
    h_report: Optional[HReport] = None,
    acknowledge_conditions: bool = False,
) -> KTheoryResult:
    """
    K-theory of a rank-2 system from the two block cokernels.

    rank K0 = rank K1 = rank coker[I-M1 | I-M2] + rank coker[I-M1^t | I-M2^t];
    the torsion of K0 (resp. K1) is that of the first (resp. second) cokernel.

    Args:
        m1, m2: Square {0,1} matrices of equal size
        threads: Compute the two cokernels concurrently when > 1
        h_report: Precomputed H-report; computed here when omitted
        acknowledge_conditions: Proceed despite failing H-conditions, recorded as a diagnostic

    Returns:
        KTheoryResult
    """
    return _rank2(m1, m2, threads, h_report, acknowledge_conditions).result


def _q_minus_one_rule(q: int) -> int:
    return (q - 1) // 3 if q % 3 == 1 else q - 1


def divisibility_diagnostics(q: int, order: int) -> List[Diagnostic]:
    """Divisibility laws for the order of [1] in a building system of order q."""
    rule = _q_minus_one_rule(q)
    finite = order > 0
    diagnostics = [
        Diagnostic(
            "order_divides_q2_minus_1",
            PASS if finite and (q * q - 1) % order == 0 else FAIL,
            f"{order} | {q * q - 1}",
        ),
        Diagnostic(
            "order_multiple_of_q_minus_1_rule",
            PASS if finite and order % rule == 0 else FAIL,
            f"{rule} | {order}",
        ),
    ]
    if q in (2, 4):
        diagnostics.append(Diagnostic("nonzero_identity_class", NOT_APPLICABLE, f"q={q}"))
    else:
        diagnostics.append(Diagnostic("nonzero_identity_class", PASS if order != 1 else FAIL))
    diagnostics.append(Diagnostic(
        "identity_order_matches_experiment",
        OBSERVED if order == rule else NOT_APPLICABLE,
        f"expected {rule}",
    ))
    return diagnostics


def building_k_theory(
    system: TransitionSystem,
    threads: Optional[int] = None,
    h_report: Optional[HReport] = None,
) -> KTheoryResult:
    """
    K0 = K1 = Z^(2n) (+) tor coker[I-M1 | I-M2], n = rank coker[I-M1 | I-M2].

    Args:
        system: Building system from tiles.build_building_system
        threads: Worker count for the two cokernels
        h_report: Precomputed H-report

    Returns:
        KTheoryResult with the building cross-check and divisibility diagnostics
    """
    if not system.is_building_system or system.q is None or system.rank != 2:
        raise DomainError("building K-theory needs a rank-2 system built from a triangle presentation")
    m1, m2 = system.matrices
    if h_report is None:
        h_report = check_conditions(system)
    computation = _rank2(m1, m2, threads, h_report, False)
    rank2 = computation.result

    n = computation.forward.free_rank
    group = AbelianGroup(2 * n, computation.forward.torsion)
    if computation.forward.torsion != computation.backward.torsion or rank2.k0 != group or rank2.k1 != group:
        logger.error(
            f"Building cross-check failed: coker forward {computation.forward}, "
            f"backward {computation.backward}"
        )
        raise InternalConsistencyError(
            f"K0 and K1 of a building system differ: {rank2.k0} vs {rank2.k1}"
        )

    diagnostics = [Diagnostic("building_k0_eq_k1", PASS)]
    diagnostics += divisibility_diagnostics(system.q, rank2.identity_order)
    for entry in diagnostics:
        if entry.status == FAIL:
            logger.warning(f"Building diagnostic failed: {entry.name} ({entry.detail})")
    logger.info(f"Building K-theory q={system.q}: K0=K1={group}, order of [1]={rank2.identity_order}")
    return KTheoryResult(
        k0=group,
        k1=group,
        identity_order=rank2.identity_order,
        diagnostics=rank2.diagnostics + tuple(diagnostics),
    )


# ---------------------------------------------------------------------------
# Tensor products
# ---------------------------------------------------------------------------

def tensor_system(a: TransitionSystem, b: TransitionSystem) -> TransitionSystem:
    """M1 = Ma (x) I, M2 = I (x) Mb on the alphabet A x B in row-major order."""
    if a.rank != 1 or b.rank != 1:
        raise DomainError("tensor systems are built from two rank-1 systems")
    (ma,), (mb,) = a.matrices, b.matrices
    m1 = np.kron(ma, np.identity(b.size, dtype=np.int64))
    m2 = np.kron(np.identity(a.size, dtype=np.int64), mb)
    labels = tuple(f"{x}|{y}" for x in a.labels for y in b.labels)
    return TransitionSystem(labels=labels, matrices=(m1.astype(np.int64), m2.astype(np.int64)))


@dataclass(frozen=True)
class KunnethPrediction:
    k0: Optional[AbelianGroup]
    k1: Optional[AbelianGroup]
    tor_terms: Tuple[AbelianGroup, ...] = ()

    @property
    def resolved(self) -> bool:
        return self.k0 is not None


def kunneth_predict(
    ka: Tuple[AbelianGroup, AbelianGroup],
    kb: Tuple[AbelianGroup, AbelianGroup],
) -> KunnethPrediction:
    """
    K0 = K0a(x)K0b (+) K1a(x)K1b, K1 = K0a(x)K1b (+) K1a(x)K0b.

    Only when every Tor term vanishes; otherwise the extension is left unresolved.
    """
    (k0a, k1a), (k0b, k1b) = ka, kb
    tor_terms = tuple(x.tor(y) for x in (k0a, k1a) for y in (k0b, k1b))
    if any(not term.is_trivial for term in tor_terms):
        logger.info("Kunneth prediction unresolved: nonzero Tor terms")
        return KunnethPrediction(None, None, tor_terms)
    k0 = k0a.tensor(k0b).direct_sum(k1a.tensor(k1b))
    k1 = k0a.tensor(k1b).direct_sum(k1a.tensor(k0b))
    return KunnethPrediction(k0, k1, tor_terms)


def kunneth_check(
    a: TransitionSystem,
    b: TransitionSystem,
    threads: Optional[int] = None,
    h_report: Optional[HReport] = None,
) -> KTheoryResult:
    """
    Rank-2 K-theory of the tensor system compared with the Kunneth prediction.

    Args:
        a, b: Rank-1 factors
        threads: Worker count for the two cokernels
        h_report: Precomputed H-report of tensor_system(a, b)

    Returns:
        Rank-2 result carrying a `kunneth` diagnostic (pass, fail or n/a)
    """
    first = k_theory_rank1(a.matrices[0])
    second = k_theory_rank1(b.matrices[0])
    prediction = kunneth_predict((first.k0, first.k1), (second.k0, second.k1))

    system = tensor_system(a, b)
    if h_report is None:
        h_report = check_conditions(system)
    m1, m2 = system.matrices
    result = k_theory_rank2(m1, m2, threads=threads, h_report=h_report)

    if not prediction.resolved:
        diagnostic = Diagnostic("kunneth", NOT_APPLICABLE, "unresolved extension")
    elif prediction.k0 == result.k0 and prediction.k1 == result.k1:
        diagnostic = Diagnostic("kunneth", PASS)
    else:
        logger.warning(
            f"Kunneth mismatch: predicted ({prediction.k0}, {prediction.k1}), "
            f"computed ({result.k0}, {result.k1})"
        )
        diagnostic = Diagnostic("kunneth", FAIL, f"predicted {prediction.k0}, {prediction.k1}")
    return result.with_diagnostics(diagnostic)
