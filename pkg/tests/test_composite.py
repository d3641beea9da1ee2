import numpy as np
import pytest

from kahlerq.composite import (
    Field,
    entangled_pair,
    label_of,
    schmidt_rank,
    tensor_dim_complex,
    tensor_dim_real,
    tensor_operator_complex,
    tensor_state_complex,
)
from kahlerq.core import decomplexify
from kahlerq.errors import StructureViolation
from kahlerq.operators import PAULI_Z, KahlerOperator, expectation, gamma_lift, identity, lift_matrix
from kahlerq.sampling import random_complex_matrix, random_hermitian, random_state


def ket(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def test_basis_kronecker():
    assert tensor_state_complex(decomplexify(ket("0")), decomplexify(ket("0"))) == decomplexify(ket("00"))


def test_phase_migrates_to_p_part():
    out = tensor_state_complex(decomplexify(1j * ket("0")), decomplexify(ket("1")))
    assert out == decomplexify(1j * ket("01"))
    assert out.q.tolist() == [0, 0, 0, 0]
    assert out.p.tolist() == [0, 1, 0, 0]


def test_norm_multiplicative(rng):
    for _ in range(50):
        m, n = rng.integers(1, 5, size=2)
        a, b = random_state(rng, int(m)), random_state(rng, int(n))
        assert tensor_state_complex(a, b).norm_sq() == pytest.approx(1.0, abs=1e-13)
        a2 = a * 3.0
        assert np.sqrt(tensor_state_complex(a2, b).norm_sq()) == pytest.approx(3.0, abs=1e-12)


def test_dimension_labels():
    assert tensor_dim_real(1, 1).result_dim == 4
    assert tensor_dim_real(2, 2).result_dim == 16
    assert tensor_dim_real(2, 3).result_dim == 24
    assert tensor_dim_complex(2, 3).result_dim == 12
    assert tensor_dim_real(2, 3).mode is Field.REAL
    with pytest.raises(ValueError):
        tensor_dim_real(0, 2)


@pytest.mark.parametrize("m,n", [(2, 2), (2, 3)])
def test_complex_tensor_real_dimension(rng, m, n):
    a, b = random_state(rng, m), random_state(rng, n)
    ab = tensor_state_complex(a, b)
    assert 2 * ab.n == 2 * m * n == label_of(a, b).result_dim


def test_operator_tensor_examples(rng):
    np.testing.assert_array_equal(tensor_operator_complex(identity(2), identity(3)).block, np.eye(12))
    zz = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(PAULI_Z))
    s01 = decomplexify(ket("01"))
    assert zz.apply(s01) == -s01


def test_operator_tensor_action_and_mixed_product(rng):
    for _ in range(30):
        a, b, c, d = (lift_matrix(random_complex_matrix(rng, 2)) for _ in range(4))
        lhs = tensor_operator_complex(a, b).block @ tensor_operator_complex(c, d).block
        rhs = tensor_operator_complex(KahlerOperator(a.block @ c.block), KahlerOperator(b.block @ d.block)).block
        assert np.max(np.abs(lhs - rhs)) <= 1e-12
        x, y = random_state(rng, 2), random_state(rng, 2)
        act = tensor_operator_complex(a, b).apply(tensor_state_complex(x, y))
        assert np.max(np.abs(act.vector - tensor_state_complex(a.apply(x), b.apply(y)).vector)) <= 1e-12


def test_operator_tensor_rejects_non_lift(rng):
    with pytest.raises(StructureViolation):
        tensor_operator_complex(KahlerOperator(np.diag([2.0, 0.5])), identity(1))


def test_associativity(rng):
    a, b, c = (random_state(rng, n) for n in (2, 3, 2))
    left = tensor_state_complex(tensor_state_complex(a, b), c)
    right = tensor_state_complex(a, tensor_state_complex(b, c))
    assert np.max(np.abs(left.vector - right.vector)) <= 1e-13


def test_bell_pair():
    phi = entangled_pair()
    assert phi.vector.size == 8
    assert phi.norm_sq() == pytest.approx(1.0, abs=1e-15)
    zz = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(PAULI_Z))
    zi = tensor_operator_complex(lift_matrix(PAULI_Z), lift_matrix(np.eye(2)))
    assert expectation(zz, phi)[0] == pytest.approx(1.0, abs=1e-12)
    assert expectation(zi, phi)[0] == pytest.approx(0.0, abs=1e-12)
    assert schmidt_rank(phi, (2, 2)) == 2


def test_product_states_have_schmidt_rank_one(rng):
    for _ in range(10):
        ab = tensor_state_complex(random_state(rng, 2), random_state(rng, 3))
        assert schmidt_rank(ab, (2, 3)) == 1


def test_expectation_factorisation(rng):
    for _ in range(50):
        m, n = (int(x) for x in rng.integers(1, 4, size=2))
        A, B = gamma_lift(random_hermitian(rng, m)), gamma_lift(random_hermitian(rng, n))
        a, b = random_state(rng, m), random_state(rng, n)
        ga, wa = expectation(A, a)
        gb, wb = expectation(B, b)
        gab, _ = expectation(tensor_operator_complex(A, B), tensor_state_complex(a, b))
        assert abs(gab - ga * gb) <= 1e-12
        assert abs(wa) <= 1e-12 and abs(wb) <= 1e-12


def test_factorisation_general_operators(rng):
    # g-part of a product expectation is ga*gb - wa*wb for arbitrary lifts
    for _ in range(20):
        A, B = lift_matrix(random_complex_matrix(rng, 2)), lift_matrix(random_complex_matrix(rng, 3))
        a, b = random_state(rng, 2), random_state(rng, 3)
        ga, wa = expectation(A, a)
        gb, wb = expectation(B, b)
        gab, wab = expectation(tensor_operator_complex(A, B), tensor_state_complex(a, b))
        assert abs(gab - (ga * gb - wa * wb)) <= 1e-12
        assert abs(wab - (ga * wb + wa * gb)) <= 1e-12
